#ifndef PATHGEO_PATHSPACE_HPP
#define PATHGEO_PATHSPACE_HPP

#include "pathgeo/parallel.hpp"
#include "pathgeo/path.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace pathgeo {

struct Interval {
    double a = 0.0;
    double b = 1.0;
    double length() const { return b - a; }
};

struct IntegrationOptions {
    int steps_per_unit = kDefaultStepsPerUnit;
    /// Parameter value at which the sheet equals the initial path.
    double anchor = 0.0;
};

/// S+1 uniform nodes on [a, b]; a single node when a == b.
inline std::vector<double> uniform_nodes(Interval iv, std::size_t S) {
    if (!(iv.b >= iv.a)) throw DomainError("interval needs a <= b");
    if (iv.a == iv.b) return {iv.a};
    if (S < 1) throw DomainError("a worldsheet needs S >= 1 when a < b");
    std::vector<double> s(S + 1);
    for (std::size_t j = 0; j <= S; ++j)
        s[j] = j == S ? iv.b : iv.a + (iv.b - iv.a) * static_cast<double>(j) / static_cast<double>(S);
    return s;
}

/// A path-space geodesic segment sampled on an s-grid times the t-grid of its
/// paths. Node (j, i) stores Gamma(s_j, t_i) and the fiber velocity there.
class Worldsheet {
public:
    Worldsheet(ManifoldSpec manifold, std::vector<double> s_nodes, std::size_t t_segments, double collar,
               std::vector<Vec> points, std::vector<Vec> velocities)
        : manifold_(std::move(manifold)), s_(std::move(s_nodes)), n_(t_segments), collar_(collar),
          points_(std::move(points)), velocities_(std::move(velocities)) {
        if (s_.empty()) throw DomainError("Worldsheet needs at least one s-node");
        for (std::size_t j = 0; j + 1 < s_.size(); ++j)
            if (!(s_[j + 1] > s_[j])) throw DomainError("Worldsheet s-nodes must be strictly increasing");
        if (n_ < 2) throw DomainError("Worldsheet needs N >= 2");
        if (points_.size() != s_.size() * (n_ + 1) || velocities_.size() != points_.size())
            throw DomainError("Worldsheet grid size mismatch");
    }

    const ManifoldSpec& manifold() const { return manifold_; }
    Interval interval() const { return {s_.front(), s_.back()}; }
    const std::vector<double>& s_nodes() const { return s_; }
    std::size_t s_count() const { return s_.size(); }
    std::size_t t_segments() const { return n_; }
    std::size_t t_count() const { return n_ + 1; }
    double collar() const { return collar_; }

    const Vec& point(std::size_t j, std::size_t i) const { return points_[j * (n_ + 1) + i]; }
    const Vec& velocity(std::size_t j, std::size_t i) const { return velocities_[j * (n_ + 1) + i]; }
    const std::vector<Vec>& points() const { return points_; }
    const std::vector<Vec>& velocities() const { return velocities_; }

    /// Index of an s-node equal to s (within 1e-12 relative), if any.
    std::optional<std::size_t> find_node(double s) const {
        for (std::size_t j = 0; j < s_.size(); ++j)
            if (std::abs(s_[j] - s) <= 1e-12 * std::max(1.0, std::abs(s))) return j;
        return std::nullopt;
    }

    /// Longitudinal path Gamma^{s_j}.
    DiscretePath longitudinal(std::size_t j) const {
        std::vector<Vec> xs(points_.begin() + static_cast<std::ptrdiff_t>(j * (n_ + 1)),
                            points_.begin() + static_cast<std::ptrdiff_t>((j + 1) * (n_ + 1)));
        return DiscretePath(manifold_, std::move(xs), collar_);
    }

    /// Gamma'(s_j) as a tangent field along Gamma^{s_j}.
    PathTangentField longitudinal_velocity(std::size_t j) const {
        std::vector<Vec> vs(velocities_.begin() + static_cast<std::ptrdiff_t>(j * (n_ + 1)),
                            velocities_.begin() + static_cast<std::ptrdiff_t>((j + 1) * (n_ + 1)));
        return PathTangentField(longitudinal(j), std::move(vs));
    }

    /// Transverse curve Gamma_{t_i} as (s, point) samples.
    std::vector<CurveNode> transverse(std::size_t i) const {
        std::vector<CurveNode> out;
        out.reserve(s_.size());
        for (std::size_t j = 0; j < s_.size(); ++j) out.push_back({s_[j], ManifoldPoint(manifold_, point(j, i))});
        return out;
    }

private:
    ManifoldSpec manifold_;
    std::vector<double> s_;
    std::size_t n_;
    double collar_;
    std::vector<Vec> points_;
    std::vector<Vec> velocities_;
};

namespace detail {

inline void require_based_on(const DiscretePath& path, const PathTangentField& field, const char* what) {
    const DiscretePath& base = field.base();
    if (!(base.manifold() == path.manifold()) || base.segments() != path.segments())
        throw DomainError(std::string(what) + ": field is not based on the given path");
    for (std::size_t i = 0; i < path.size(); ++i)
        if (path.manifold().dist(base[i], path[i]) > kBaseTolerance)
            throw DomainError(std::string(what) + ": field base differs from the path at node " + std::to_string(i));
}

/// Geodesic states at the requested parameters for the fiber through (x, v) at
/// `anchor`. Integration runs on the fixed lattice anchor + k*h in each direction,
/// and off-lattice nodes take one partial step from the preceding lattice state.
/// Nodes that coincide as doubles therefore get bitwise identical states, no
/// matter which other nodes are requested.
inline std::vector<GeodesicState> fiber_states(const ManifoldSpec& m, const Vec& x, const Vec& v, double anchor,
                                               std::span<const double> s_nodes, int steps_per_unit) {
    std::vector<GeodesicState> out(s_nodes.size());
    // A zero velocity gives a stationary fiber; keep the sample bit for bit.
    if ((v.array() == 0.0).all()) {
        for (auto& st : out) st = {x, v};
        return out;
    }
    const double h = 1.0 / static_cast<double>(steps_per_unit);
    auto sweep = [&](double direction, auto&& indices) {
        GeodesicState lattice{x, direction * v};
        long k = 0;
        for (std::size_t idx : indices) {
            const double sigma = std::abs(s_nodes[idx] - anchor);
            if (sigma == 0.0) {
                out[idx] = {x, v};
                continue;
            }
            const double q = sigma / h;
            long target = static_cast<long>(std::floor(q));
            if (std::abs(q - std::round(q)) <= 1e-9) target = static_cast<long>(std::round(q));
            if (k < target) {
                const long done = rk4_advance(m, lattice, h, target - k);
                k += done;
                if (k < target)
                    throw IntegrationError(m.name() + ": geodesic left the chart domain", lattice.point,
                                           lattice.velocity, anchor + direction * h * static_cast<double>(k));
            }
            const double rest = sigma - h * static_cast<double>(k);
            GeodesicState st = lattice;
            if (std::abs(rest) > 1e-9 * h) {
                st = rk4_geodesic_step(m, lattice, rest);
                if (!state_in_domain(m, st))
                    throw IntegrationError(m.name() + ": geodesic left the chart domain", lattice.point,
                                           lattice.velocity, anchor + direction * h * static_cast<double>(k));
            }
            out[idx] = {m.canonical_point(st.point), direction * st.velocity};
        }
    };
    std::vector<std::size_t> forward, backward;
    for (std::size_t j = 0; j < s_nodes.size(); ++j) (s_nodes[j] >= anchor ? forward : backward).push_back(j);
    std::sort(forward.begin(), forward.end(), [&](auto a, auto b) { return s_nodes[a] < s_nodes[b]; });
    std::sort(backward.begin(), backward.end(), [&](auto a, auto b) { return s_nodes[a] > s_nodes[b]; });
    sweep(1.0, forward);
    sweep(-1.0, backward);
    return out;
}

} // namespace detail

/// Path-space geodesic with Gamma(anchor) = gamma and Gamma'(anchor) = V, sampled at
/// `s_nodes`. Each fiber is the RK4 geodesic of its node's initial data; nodes
/// before the anchor are reached by integrating with -V.
inline Worldsheet pathspace_geodesic(const PathTangentField& V, std::vector<double> s_nodes,
                                     IntegrationOptions opts = {}) {
    if (opts.steps_per_unit < 1) throw DomainError("steps_per_unit must be positive");
    const DiscretePath& gamma = V.base();
    const ManifoldSpec& m = gamma.manifold();
    const std::size_t nt = gamma.size();
    const std::size_t ns = s_nodes.size();
    std::vector<Vec> points(ns * nt), velocities(ns * nt);
    parallel_for(nt, [&](std::size_t i) {
        std::vector<GeodesicState> states;
        try {
            states = detail::fiber_states(m, gamma[i], V[i], opts.anchor, s_nodes, opts.steps_per_unit);
        } catch (const IntegrationError& e) {
            throw IntegrationError(std::string(e.what()) + " on the fiber at t = " + std::to_string(gamma.t(i)) +
                                       " (index " + std::to_string(i) + ")",
                                   e.last_point(), e.last_velocity(), e.last_s(), i);
        }
        for (std::size_t j = 0; j < ns; ++j) {
            points[j * nt + i] = std::move(states[j].point);
            velocities[j * nt + i] = std::move(states[j].velocity);
        }
    });
    return Worldsheet(m, std::move(s_nodes), gamma.segments(), gamma.collar(), std::move(points),
                      std::move(velocities));
}

inline Worldsheet pathspace_geodesic(const PathTangentField& V, Interval interval,
                                     std::size_t S = kDefaultSheetSegments, IntegrationOptions opts = {}) {
    return pathspace_geodesic(V, uniform_nodes(interval, S), opts);
}

/// Exp(V) = Gamma^1.
inline DiscretePath pathspace_exp(const PathTangentField& V, IntegrationOptions opts = {}) {
    opts.anchor = 0.0;
    return pathspace_geodesic(V, std::vector<double>{1.0}, opts).longitudinal(0);
}

/// L^2 inner product of two tangent fields along gamma (trapezoid rule in t).
inline double l2_metric(const DiscretePath& gamma, const PathTangentField& K1, const PathTangentField& K2) {
    detail::require_based_on(gamma, K1, "l2_metric");
    detail::require_based_on(gamma, K2, "l2_metric");
    const ManifoldSpec& m = gamma.manifold();
    const std::vector<double> w = trapezoid_weights(gamma.segments());
    double sum = 0.0;
    for (std::size_t i = 0; i < gamma.size(); ++i) sum += w[i] * m.inner(gamma[i], K1[i], K2[i]);
    return sum;
}

/// Parallel transport of V (based on Gamma's first slice) along every fiber.
/// Returns one field per s-node.
inline std::vector<PathTangentField> pathspace_transport(const Worldsheet& sheet, const PathTangentField& V,
                                                         int substeps = 4) {
    const ManifoldSpec& m = sheet.manifold();
    detail::require_based_on(sheet.longitudinal(0), V, "pathspace_transport");
    const std::size_t nt = sheet.t_count();
    const std::size_t ns = sheet.s_count();
    std::vector<std::vector<Vec>> by_fiber(nt);
    parallel_for(nt, [&](std::size_t i) {
        std::vector<Vec> pts;
        pts.reserve(ns);
        for (std::size_t j = 0; j < ns; ++j) pts.push_back(sheet.point(j, i));
        by_fiber[i] = detail::transport_kernel(m, pts, V[i], std::max(1, substeps));
    });
    std::vector<PathTangentField> out;
    out.reserve(ns);
    for (std::size_t j = 0; j < ns; ++j) {
        std::vector<Vec> vs;
        vs.reserve(nt);
        for (std::size_t i = 0; i < nt; ++i) vs.push_back(by_fiber[i][j]);
        out.emplace_back(sheet.longitudinal(j), std::move(vs));
    }
    return out;
}

/// Energy of the fiber Gamma_{t_i}: 1/2 sum_j w_j g(Gamma', Gamma') over the s-grid.
inline double transverse_energy(const Worldsheet& sheet, std::size_t i) {
    const ManifoldSpec& m = sheet.manifold();
    const std::vector<double> w = trapezoid_weights(sheet.s_nodes());
    double sum = 0.0;
    for (std::size_t j = 0; j < sheet.s_count(); ++j)
        sum += w[j] * m.inner(sheet.point(j, i), sheet.velocity(j, i), sheet.velocity(j, i));
    return 0.5 * sum;
}

/// sum_i w_i E(Gamma_{t_i}): the energy integrated along t first.
inline double transverse_energy_sum(const Worldsheet& sheet) {
    const std::vector<double> w = trapezoid_weights(sheet.t_segments());
    double sum = 0.0;
    for (std::size_t i = 0; i < sheet.t_count(); ++i) sum += w[i] * transverse_energy(sheet, i);
    return sum;
}

/// E_Gamma = 1/2 sum_j w_j g~(Gamma'(s_j), Gamma'(s_j)), the energy integrated along s first.
inline double sheet_energy(const Worldsheet& sheet) {
    const ManifoldSpec& m = sheet.manifold();
    const std::vector<double> ws = trapezoid_weights(sheet.s_nodes());
    const std::vector<double> wt = trapezoid_weights(sheet.t_segments());
    double sum = 0.0;
    for (std::size_t j = 0; j < sheet.s_count(); ++j) {
        double g = 0.0;
        for (std::size_t i = 0; i < sheet.t_count(); ++i)
            g += wt[i] * m.inner(sheet.point(j, i), sheet.velocity(j, i), sheet.velocity(j, i));
        sum += ws[j] * g;
    }
    return 0.5 * sum;
}

/// L(Gamma) = sqrt(2 |b - a| E_Gamma).
inline double sheet_length(const Worldsheet& sheet) {
    return std::sqrt(2.0 * sheet.interval().length() * sheet_energy(sheet));
}

/// Arc length in path space, sum_j w_j sqrt(g~(Gamma', Gamma')).
inline double sheet_arc_length(const Worldsheet& sheet) {
    const ManifoldSpec& m = sheet.manifold();
    const std::vector<double> ws = trapezoid_weights(sheet.s_nodes());
    const std::vector<double> wt = trapezoid_weights(sheet.t_segments());
    double sum = 0.0;
    for (std::size_t j = 0; j < sheet.s_count(); ++j) {
        double g = 0.0;
        for (std::size_t i = 0; i < sheet.t_count(); ++i)
            g += wt[i] * m.inner(sheet.point(j, i), sheet.velocity(j, i), sheet.velocity(j, i));
        sum += ws[j] * std::sqrt(g);
    }
    return sum;
}

/// Energy of a sheet from its points alone: fiber velocities are taken
/// constant between s-nodes, log(Gamma(s_j), Gamma(s_{j+1})) / (s_{j+1} - s_j).
/// Needed for sheets that are not geodesics, where stored velocities have no meaning.
inline double sampled_sheet_energy(const ManifoldSpec& m, std::span<const double> s_nodes, std::size_t t_segments,
                                   std::span<const Vec> points) {
    const std::size_t nt = t_segments + 1;
    const std::vector<double> wt = trapezoid_weights(t_segments);
    double sum = 0.0;
    for (std::size_t j = 0; j + 1 < s_nodes.size(); ++j) {
        const double ds = s_nodes[j + 1] - s_nodes[j];
        for (std::size_t i = 0; i < nt; ++i) {
            const Vec& x = points[j * nt + i];
            const Vec u = m.log(x, points[(j + 1) * nt + i]);
            sum += wt[i] * m.inner(x, u, u) / ds;
        }
    }
    return 0.5 * sum;
}

/// Largest one-step defect of the stored fibers: each node is propagated to the
/// next s-node by the closed-form geodesic and compared with what is stored
/// (points by distance, velocities componentwise).
inline double geodesic_residual(const Worldsheet& sheet) {
    const ManifoldSpec& m = sheet.manifold();
    double worst = 0.0;
    for (std::size_t j = 0; j + 1 < sheet.s_count(); ++j) {
        const double ds = sheet.s_nodes()[j + 1] - sheet.s_nodes()[j];
        for (std::size_t i = 0; i < sheet.t_count(); ++i) {
            const GeodesicState pred = m.geodesic(sheet.point(j, i), sheet.velocity(j, i), ds);
            worst = std::max(worst, m.dist(pred.point, sheet.point(j + 1, i)));
            worst = std::max(worst, (pred.velocity - sheet.velocity(j + 1, i)).norm());
        }
    }
    return worst;
}

namespace detail {

inline void require_same_grid(const DiscretePath& a, const DiscretePath& b, const char* what) {
    if (!(a.manifold() == b.manifold())) throw DomainError(std::string(what) + ": paths live on different manifolds");
    if (a.segments() != b.segments()) throw DomainError(std::string(what) + ": paths must share the grid");
}

/// Pointwise distances; throws NormalNeighborhoodError naming the worst node
/// when any reaches the injectivity radius.
inline std::vector<double> pointwise_distances(const DiscretePath& a, const DiscretePath& b, const char* what) {
    require_same_grid(a, b, what);
    const ManifoldSpec& m = a.manifold();
    std::vector<double> d(a.size());
    std::size_t worst = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        d[i] = m.dist(a[i], b[i]);
        if (d[i] > d[worst]) worst = i;
    }
    if (d[worst] >= m.injectivity_radius())
        throw NormalNeighborhoodError(std::string(what) + ": paths leave each other's normal neighbourhood at t = " +
                                          std::to_string(a.t(worst)) + " (distance " + std::to_string(d[worst]) + ")",
                                      worst, a.t(worst), d[worst]);
    return d;
}

} // namespace detail

inline bool in_normal_neighborhood(const DiscretePath& gamma0, const DiscretePath& gamma) {
    detail::require_same_grid(gamma0, gamma, "in_normal_neighborhood");
    const ManifoldSpec& m = gamma0.manifold();
    double worst = 0.0;
    for (std::size_t i = 0; i < gamma0.size(); ++i) worst = std::max(worst, m.dist(gamma0[i], gamma[i]));
    return worst < m.injectivity_radius();
}

/// d~(gamma1, gamma2) = sqrt(int d(gamma1(t), gamma2(t))^2 dt), trapezoid rule.
inline double pathspace_distance(const DiscretePath& gamma1, const DiscretePath& gamma2) {
    const std::vector<double> d = detail::pointwise_distances(gamma1, gamma2, "pathspace_distance");
    const std::vector<double> w = trapezoid_weights(gamma1.segments());
    double sum = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) sum += w[i] * d[i] * d[i];
    return std::sqrt(sum);
}

/// The path-space geodesic on [0, 1] from gamma1 to gamma2, fibers in closed form.
inline Worldsheet connecting_geodesic(const DiscretePath& gamma1, const DiscretePath& gamma2,
                                      std::size_t S = kDefaultSheetSegments) {
    detail::pointwise_distances(gamma1, gamma2, "connecting_geodesic");
    const ManifoldSpec& m = gamma1.manifold();
    const std::vector<double> s = uniform_nodes({0.0, 1.0}, S);
    const std::size_t nt = gamma1.size();
    std::vector<Vec> points(s.size() * nt), velocities(s.size() * nt);
    for (std::size_t i = 0; i < nt; ++i) {
        const Vec u = m.log(gamma1[i], gamma2[i]);
        for (std::size_t j = 0; j < s.size(); ++j) {
            GeodesicState st = m.geodesic(gamma1[i], u, s[j]);
            if (j == 0) st.point = gamma1[i];
            if (j + 1 == s.size()) st.point = gamma2[i];
            points[j * nt + i] = m.canonical_point(st.point);
            velocities[j * nt + i] = m.tangent_projection(points[j * nt + i], st.velocity);
        }
    }
    return Worldsheet(m, s, gamma1.segments(), std::min(gamma1.collar(), gamma2.collar()), std::move(points),
                      std::move(velocities));
}

} // namespace pathgeo

#endif // PATHGEO_PATHSPACE_HPP
