#ifndef PATHGEO_BACKTRACK_HPP
#define PATHGEO_BACKTRACK_HPP

#include "pathgeo/path.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace pathgeo {

/// A retrace gamma(T + u) = gamma(T + 2 sigma - u), u in [0, sigma], in grid indices.
struct BackTrackWindow {
    std::size_t T = 0;
    std::size_t sigma = 0;

    std::size_t end() const { return T + 2 * sigma; }
    friend bool operator==(const BackTrackWindow&, const BackTrackWindow&) = default;
};

namespace detail {

/// Sample list, optionally with one tangent vector per sample.
struct NodeList {
    std::vector<Vec> x;
    std::vector<Vec> X;

    bool has_field() const { return !X.empty(); }
    std::size_t size() const { return x.size(); }
};

inline bool same_vector(const Vec& a, const Vec& b, double tol) {
    return (a - b).norm() <= tol * (1.0 + std::max(a.norm(), b.norm()));
}

/// Largest sigma with x[c - u] ~ x[c + u] for u = 1..sigma.
inline std::size_t reflection_width(const ManifoldSpec& m, const std::vector<Vec>& x, std::size_t c, double tol) {
    std::size_t s = 0;
    while (s < c && c + s + 1 < x.size() && m.dist(x[c - s - 1], x[c + s + 1]) <= tol) ++s;
    return s;
}

/// True when the half window x[lo..c] never leaves x[c]: a pure pause, not a retrace.
inline bool stationary_run(const ManifoldSpec& m, const std::vector<Vec>& x, std::size_t lo, std::size_t c,
                           double tol) {
    for (std::size_t k = lo; k < c; ++k)
        if (m.dist(x[k], x[c]) > tol) return false;
    return true;
}

/// Maximal non-stationary reflection windows, sorted by start.
inline std::vector<BackTrackWindow> maximal_windows(const ManifoldSpec& m, const std::vector<Vec>& x, double tol) {
    std::vector<BackTrackWindow> found;
    for (std::size_t c = 1; c + 1 < x.size(); ++c) {
        const std::size_t s = reflection_width(m, x, c, tol);
        if (s >= 1 && !stationary_run(m, x, c - s, c, tol)) found.push_back({c - s, s});
    }
    std::vector<BackTrackWindow> maximal;
    for (const auto& w : found) {
        const bool contained = std::any_of(found.begin(), found.end(), [&](const BackTrackWindow& o) {
            return !(o == w) && o.T <= w.T && w.end() <= o.end();
        });
        if (!contained) maximal.push_back(w);
    }
    std::sort(maximal.begin(), maximal.end(), [](const auto& a, const auto& b) { return a.T < b.T; });
    return maximal;
}

/// Merges consecutive samples that coincide (and whose vectors agree, if any).
inline void collapse_stationary(const ManifoldSpec& m, NodeList& nodes, double tol) {
    NodeList out;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        if (!out.x.empty() && m.dist(out.x.back(), nodes.x[k]) <= tol &&
            (!nodes.has_field() || same_vector(out.X.back(), nodes.X[k], tol)))
            continue;
        out.x.push_back(nodes.x[k]);
        if (nodes.has_field()) out.X.push_back(nodes.X[k]);
    }
    nodes = std::move(out);
}

inline void check_field_reflection(const NodeList& nodes, const BackTrackWindow& w, double tol) {
    if (!nodes.has_field()) return;
    // The reflected base points coincide, so the vectors live in the same tangent
    // space and are compared directly.
    for (std::size_t u = 0; u < w.sigma; ++u) {
        if (!same_vector(nodes.X[w.T + u], nodes.X[w.end() - u], tol))
            throw TangentCompatibilityError("tangent field does not retrace the back-track of its base at node " +
                                                std::to_string(w.end() - u),
                                            w.end() - u);
    }
}

/// Removes the nodes (T, T + 2 sigma].
inline void erase_window(NodeList& nodes, const BackTrackWindow& w) {
    const auto first = static_cast<std::ptrdiff_t>(w.T + 1);
    const auto last = static_cast<std::ptrdiff_t>(w.end() + 1);
    nodes.x.erase(nodes.x.begin() + first, nodes.x.begin() + last);
    if (nodes.has_field()) nodes.X.erase(nodes.X.begin() + first, nodes.X.begin() + last);
}

/// Back-track free node sequence: pauses merged, leftmost maximal windows erased
/// until none remain.
inline NodeList reduce(const ManifoldSpec& m, NodeList nodes, double tol) {
    collapse_stationary(m, nodes, tol);
    while (true) {
        const std::vector<BackTrackWindow> ws = maximal_windows(m, nodes.x, tol);
        if (ws.empty()) break;
        check_field_reflection(nodes, ws.front(), tol);
        erase_window(nodes, ws.front());
        collapse_stationary(m, nodes, tol);
    }
    return nodes;
}

/// Smallest power-of-two grid, at least 16 steps, whose dyadic collar N/16 leaves
/// room for `interior` steps.
inline std::size_t packed_grid(std::size_t interior) {
    std::size_t n = 16;
    while (interior + 2 * (n / 16) > n) n *= 2;
    return n;
}

/// Lays the reduced nodes out on the packed grid: collar, the nodes one per
/// step, then the last node repeated to fill.
inline NodeList pack(const NodeList& nodes, std::size_t& n_out) {
    const std::size_t interior = nodes.size() - 1;
    n_out = packed_grid(interior);
    const std::size_t c = n_out / 16;
    NodeList out;
    out.x.reserve(n_out + 1);
    for (std::size_t k = 0; k < c; ++k) out.x.push_back(nodes.x.front());
    out.x.insert(out.x.end(), nodes.x.begin(), nodes.x.end());
    while (out.x.size() < n_out + 1) out.x.push_back(nodes.x.back());
    if (nodes.has_field()) {
        for (std::size_t k = 0; k < c; ++k) out.X.push_back(nodes.X.front());
        out.X.insert(out.X.end(), nodes.X.begin(), nodes.X.end());
        while (out.X.size() < n_out + 1) out.X.push_back(nodes.X.back());
    }
    return out;
}

/// Piecewise-geodesic curve through a node list, addressed by arc length.
class Polyline {
public:
    Polyline(const ManifoldSpec& m, const NodeList& nodes) : m_(m), nodes_(nodes) {
        for (std::size_t k = 0; k + 1 < nodes.size(); ++k) {
            u_.push_back(m.log(nodes.x[k], nodes.x[k + 1]));
            length_ += m.norm(nodes.x[k], u_.back());
            cumulative_.push_back(length_);
        }
    }

    struct Position {
        std::size_t k;
        double lambda;
    };

    double length() const { return length_; }

    Position at_arc_length(double s) const {
        const auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), s);
        const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()), u_.size() - 1);
        const double before = k == 0 ? 0.0 : cumulative_[k - 1];
        const double seg = cumulative_[k] - before;
        return {k, seg > 0.0 ? std::clamp((s - before) / seg, 0.0, 1.0) : 0.0};
    }

    Vec at(Position p) const {
        if (p.lambda == 0.0) return nodes_.x[p.k];
        if (p.lambda == 1.0) return nodes_.x[p.k + 1];
        return m_.canonical_point(m_.exp(nodes_.x[p.k], p.lambda * u_[p.k]));
    }

    /// Field between nodes: both end vectors transported to the point, blended linearly.
    Vec field_at(Position p) const {
        if (p.lambda == 0.0) return nodes_.X[p.k];
        if (p.lambda == 1.0) return nodes_.X[p.k + 1];
        const Vec y = at(p);
        const Vec a = m_.transport_along_geodesic(nodes_.x[p.k], y, nodes_.X[p.k]);
        const Vec b = m_.transport_along_geodesic(nodes_.x[p.k + 1], y, nodes_.X[p.k + 1]);
        return m_.tangent_projection(y, (1.0 - p.lambda) * a + p.lambda * b);
    }

private:
    const ManifoldSpec& m_;
    const NodeList& nodes_;
    std::vector<Vec> u_;
    std::vector<double> cumulative_;
    double length_ = 0.0;
};

/// `segments` steps at equal arc length along the polyline through `nodes`.
inline NodeList arc_length_resample(const ManifoldSpec& m, const NodeList& nodes, std::size_t segments) {
    const Polyline line(m, nodes);
    NodeList out;
    out.x.push_back(nodes.x.front());
    if (nodes.has_field()) out.X.push_back(nodes.X.front());
    for (std::size_t k = 1; k < segments; ++k) {
        const auto pos = line.at_arc_length(line.length() * static_cast<double>(k) / static_cast<double>(segments));
        out.x.push_back(line.at(pos));
        if (nodes.has_field()) out.X.push_back(line.field_at(pos));
    }
    out.x.push_back(nodes.x.back());
    if (nodes.has_field()) out.X.push_back(nodes.X.back());
    return out;
}

inline double chord_spread(const ManifoldSpec& m, const NodeList& nodes) {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (std::size_t k = 0; k + 1 < nodes.size(); ++k) {
        const double d = m.dist(nodes.x[k], nodes.x[k + 1]);
        lo = std::min(lo, d);
        hi = std::max(hi, d);
    }
    return hi - lo;
}

/// Constant-speed layout of a back-track free node list on `segments` steps,
/// `collar` of them repeating each end point. The interior is resampled at equal
/// arc length and the resampling repeated until it stops moving the nodes; its
/// fixed points are exactly the equal-chord polygons, so applying this to its
/// own output changes nothing. The first resampling depends only on the curve,
/// not on how it was sampled.
inline NodeList equal_chord(const ManifoldSpec& m, const NodeList& nodes, std::size_t segments, std::size_t collar) {
    const std::size_t interior = segments - 2 * collar;
    NodeList core;
    if (nodes.size() >= 2 && interior >= 1) {
        core = arc_length_resample(m, nodes, interior);
        const double total = Polyline(m, nodes).length();
        for (int it = 0; it < 5000 && chord_spread(m, core) > 1e-14 * total; ++it) {
            NodeList next = arc_length_resample(m, core, interior);
            double moved = 0.0;
            for (std::size_t k = 0; k < core.size(); ++k) moved = std::max(moved, m.dist(core.x[k], next.x[k]));
            core = std::move(next);
            if (moved <= 1e-15 * total) break;
        }
    } else {
        core.x = {nodes.x.front()};
        if (nodes.has_field()) core.X = {nodes.X.front()};
    }
    NodeList out;
    for (std::size_t k = 0; k < collar; ++k) {
        out.x.push_back(core.x.front());
        if (nodes.has_field()) out.X.push_back(core.X.front());
    }
    out.x.insert(out.x.end(), core.x.begin(), core.x.end());
    if (nodes.has_field()) out.X.insert(out.X.end(), core.X.begin(), core.X.end());
    while (out.x.size() <= segments) {
        out.x.push_back(core.x.back());
        if (nodes.has_field()) out.X.push_back(core.X.back());
    }
    return out;
}

inline std::size_t canonical_collar(std::size_t segments) {
    return static_cast<std::size_t>(std::floor(kDefaultCollar * static_cast<double>(segments)));
}

} // namespace detail

/// All maximal retrace windows, disjoint and left to right. Windows that only
/// pause (every sample equal) are not reported.
inline std::vector<BackTrackWindow> detect_backtracks(const DiscretePath& gamma,
                                                      double tol = kDefaultBacktrackTolerance) {
    if (!(tol >= 0.0)) throw DomainError("detect_backtracks: tol must be >= 0");
    std::vector<BackTrackWindow> out;
    for (const auto& w : detail::maximal_windows(gamma.manifold(), gamma.samples(), tol))
        if (out.empty() || w.T >= out.back().end()) out.push_back(w);
    return out;
}

/// Removes the retrace (T, T + 2 sigma] and resamples the remainder onto the
/// original grid by geodesic interpolation.
inline DiscretePath erase_backtrack(const DiscretePath& gamma, const BackTrackWindow& w,
                                    double tol = kDefaultBacktrackTolerance) {
    const ManifoldSpec& m = gamma.manifold();
    if (w.sigma < 1 || w.end() > gamma.segments())
        throw DomainError("erase_backtrack: window does not fit on the grid");
    for (std::size_t u = 0; u < w.sigma; ++u)
        if (m.dist(gamma[w.T + u], gamma[w.end() - u]) > tol)
            throw DomainError("erase_backtrack: the path does not retrace itself on this window");
    std::vector<Vec> kept(gamma.samples().begin(), gamma.samples().begin() + static_cast<std::ptrdiff_t>(w.T + 1));
    kept.insert(kept.end(), gamma.samples().begin() + static_cast<std::ptrdiff_t>(w.end() + 1),
                gamma.samples().end());
    const std::size_t n = gamma.segments();
    const std::size_t remaining = kept.size() - 1;
    std::vector<Vec> xs;
    xs.reserve(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        if (remaining == 0) {
            xs.push_back(kept.front());
            continue;
        }
        const double u = static_cast<double>(i) * static_cast<double>(remaining) / static_cast<double>(n);
        const std::size_t k = std::min(static_cast<std::size_t>(std::floor(u)), remaining - 1);
        xs.push_back(detail::geodesic_interpolate(m, kept[k], kept[k + 1], u - static_cast<double>(k)));
    }
    const double collar = detail::fit_collar(m, xs, gamma.collar());
    return DiscretePath(m, std::move(xs), collar);
}

/// Back-track free representative laid out on the smallest dyadic grid that
/// holds it (grid steps carry the reduced nodes verbatim).
inline DiscretePath reduced_form(const DiscretePath& gamma, double tol = kDefaultBacktrackTolerance) {
    detail::NodeList nodes{gamma.samples(), {}};
    nodes = detail::reduce(gamma.manifold(), std::move(nodes), tol);
    std::size_t n = 0;
    detail::NodeList packed = detail::pack(nodes, n);
    return DiscretePath(gamma.manifold(), std::move(packed.x), static_cast<double>(n / 16) / static_cast<double>(n));
}

/// Joint reduced form of a field and its base. Samples merge only when both
/// point and vector agree.
inline PathTangentField reduced_form(const PathTangentField& field, double tol = kDefaultBacktrackTolerance) {
    detail::NodeList nodes{field.base().samples(), field.vectors()};
    nodes = detail::reduce(field.manifold(), std::move(nodes), tol);
    std::size_t n = 0;
    detail::NodeList packed = detail::pack(nodes, n);
    DiscretePath base(field.manifold(), std::move(packed.x), static_cast<double>(n / 16) / static_cast<double>(n));
    return PathTangentField(std::move(base), std::move(packed.X));
}

/// Representative of the back-track class: retraces erased, then reparametrised
/// by equal chords on `segments` steps (default: the input grid) with the
/// default collar.
inline DiscretePath canonical_form(const DiscretePath& gamma, double tol = kDefaultBacktrackTolerance,
                                   std::optional<std::size_t> segments = std::nullopt) {
    const ManifoldSpec& m = gamma.manifold();
    const std::size_t n = segments.value_or(gamma.segments());
    if (n < 2) throw DomainError("canonical_form: grid needs at least 2 steps");
    detail::NodeList nodes = detail::reduce(m, {gamma.samples(), {}}, tol);
    const std::size_t c = detail::canonical_collar(n);
    detail::NodeList out = detail::equal_chord(m, nodes, n, c);
    return DiscretePath(m, std::move(out.x), static_cast<double>(c) / static_cast<double>(n));
}

/// Canonical form of a tangent field together with its base. Throws
/// TangentCompatibilityError when the field does not retrace a back-track of the base.
inline PathTangentField field_canonical_form(const PathTangentField& field, double tol = kDefaultBacktrackTolerance,
                                             std::optional<std::size_t> segments = std::nullopt) {
    const ManifoldSpec& m = field.manifold();
    const std::size_t n = segments.value_or(field.base().segments());
    if (n < 2) throw DomainError("field_canonical_form: grid needs at least 2 steps");
    detail::NodeList nodes = detail::reduce(m, {field.base().samples(), field.vectors()}, tol);
    const std::size_t c = detail::canonical_collar(n);
    detail::NodeList out = detail::equal_chord(m, nodes, n, c);
    DiscretePath base(m, std::move(out.x), static_cast<double>(c) / static_cast<double>(n));
    return PathTangentField(std::move(base), std::move(out.X));
}

/// Largest node-wise distance between two paths on the same grid.
inline double max_node_distance(const DiscretePath& a, const DiscretePath& b) {
    if (!(a.manifold() == b.manifold()) || a.segments() != b.segments())
        return std::numeric_limits<double>::infinity();
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, a.manifold().dist(a[i], b[i]));
    return worst;
}

/// Back-track equivalence, decided by comparing canonical forms on a common grid.
/// Chains of k comparisons accumulate at most k * tol (transitivity holds within 3 tol
/// for three paths compared pairwise).
inline bool bt_equivalent(const DiscretePath& gamma1, const DiscretePath& gamma2, double tol,
                          double detect_tol = kDefaultBacktrackTolerance) {
    if (!(gamma1.manifold() == gamma2.manifold())) throw DomainError("bt_equivalent: paths on different manifolds");
    const std::size_t n = std::max(gamma1.segments(), gamma2.segments());
    return max_node_distance(canonical_form(gamma1, detect_tol, n), canonical_form(gamma2, detect_tol, n)) <= tol;
}

} // namespace pathgeo

#endif // PATHGEO_BACKTRACK_HPP
