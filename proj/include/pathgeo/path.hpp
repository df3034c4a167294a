#ifndef PATHGEO_PATH_HPP
#define PATHGEO_PATH_HPP

#include "pathgeo/manifold.hpp"

#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace pathgeo {

namespace detail {

/// Point at fraction lambda along the geodesic from a to b. Returns a exactly
/// for lambda == 0 and b exactly for lambda == 1.
inline Vec geodesic_interpolate(const ManifoldSpec& m, const Vec& a, const Vec& b, double lambda) {
    if (lambda == 0.0) return a;
    if (lambda == 1.0) return b;
    Vec u;
    try {
        u = m.log(a, b);
    } catch (const NormalNeighborhoodError&) {
        throw ResolutionError(m.name() + ": adjacent samples are too far apart to interpolate");
    }
    return m.canonical_point(m.exp(a, lambda * u));
}

/// Number of leading grid steps over which the samples stay at samples[0].
inline std::size_t stationary_prefix(const ManifoldSpec& m, std::span<const Vec> xs, double tol) {
    std::size_t k = 0;
    while (k + 1 < xs.size() && m.dist(xs[0], xs[k + 1]) <= tol) ++k;
    return k;
}

inline std::size_t stationary_suffix(const ManifoldSpec& m, std::span<const Vec> xs, double tol) {
    std::size_t k = 0;
    const std::size_t n = xs.size();
    while (k + 1 < n && m.dist(xs[n - 1], xs[n - 2 - k]) <= tol) ++k;
    return k;
}

/// Largest collar not exceeding `max_collar` that the samples satisfy.
inline double fit_collar(const ManifoldSpec& m, std::span<const Vec> xs, double max_collar) {
    const std::size_t n_seg = xs.size() - 1;
    const std::size_t k = std::min(stationary_prefix(m, xs, kBaseTolerance), stationary_suffix(m, xs, kBaseTolerance));
    const double fitted = static_cast<double>(k) / static_cast<double>(n_seg);
    return std::min(max_collar, std::min(fitted, std::nextafter(0.5, 0.0)));
}

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

} // namespace detail

/// Samples of a path [0,1] -> M on the uniform grid t_i = i/N.
///
/// A positive collar delta records that the path is constant on [0, delta] and on
/// [1 - delta, 1]; the constructor checks this against the samples.
class DiscretePath {
public:
    DiscretePath(ManifoldSpec manifold, std::vector<Vec> samples, double collar = 0.0)
        : manifold_(std::move(manifold)), samples_(std::move(samples)), collar_(collar) {
        if (samples_.size() < 3) throw DomainError("DiscretePath needs N >= 2 (at least 3 samples)");
        if (!(collar_ >= 0.0 && collar_ < 0.5)) throw DomainError("DiscretePath collar must lie in [0, 1/2)");
        for (std::size_t i = 0; i < samples_.size(); ++i) {
            if (auto defect = manifold_.point_defect(samples_[i]); !defect.empty())
                throw DomainError("DiscretePath sample " + std::to_string(i) + ": " + defect);
        }
        const std::size_t k = collar_nodes();
        const std::size_t n = segments();
        for (std::size_t i = 1; i <= k; ++i) {
            if (manifold_.dist(samples_[0], samples_[i]) > kBaseTolerance ||
                manifold_.dist(samples_[n], samples_[n - i]) > kBaseTolerance)
                throw DomainError("DiscretePath samples are not constant on the collar");
        }
    }

    static DiscretePath constant(const ManifoldSpec& m, const Vec& point, std::size_t segments = kDefaultSegments,
                                 double collar = kDefaultCollar) {
        return DiscretePath(m, std::vector<Vec>(segments + 1, point), collar);
    }

    const ManifoldSpec& manifold() const { return manifold_; }
    std::size_t segments() const { return samples_.size() - 1; }
    std::size_t size() const { return samples_.size(); }
    const std::vector<Vec>& samples() const { return samples_; }
    const Vec& operator[](std::size_t i) const { return samples_[i]; }
    const Vec& front() const { return samples_.front(); }
    const Vec& back() const { return samples_.back(); }
    ManifoldPoint point(std::size_t i) const { return ManifoldPoint(manifold_, samples_[i]); }
    double t(std::size_t i) const { return static_cast<double>(i) / static_cast<double>(segments()); }
    double dt() const { return 1.0 / static_cast<double>(segments()); }
    double collar() const { return collar_; }

    /// Grid steps covered by each collar: the nodes with t_i <= delta.
    std::size_t collar_nodes() const {
        return static_cast<std::size_t>(std::floor(collar_ * static_cast<double>(segments()) + 1e-9));
    }

private:
    ManifoldSpec manifold_;
    std::vector<Vec> samples_;
    double collar_;
};

/// A tangent vector to path space at a path: one tangent vector per sample.
class PathTangentField {
public:
    PathTangentField(DiscretePath base, std::vector<Vec> vectors)
        : base_(std::move(base)), vectors_(std::move(vectors)) {
        if (vectors_.size() != base_.size()) throw DomainError("PathTangentField length does not match its base grid");
        const ManifoldSpec& m = base_.manifold();
        for (std::size_t i = 0; i < vectors_.size(); ++i) m.require_tangent(base_[i], vectors_[i]);
        const std::size_t k = base_.collar_nodes();
        const std::size_t n = base_.segments();
        for (std::size_t i = 1; i <= k; ++i) {
            if ((vectors_[i] - vectors_[0]).norm() > kBaseTolerance * (1.0 + vectors_[0].norm()) ||
                (vectors_[n - i] - vectors_[n]).norm() > kBaseTolerance * (1.0 + vectors_[n].norm()))
                throw DomainError("PathTangentField is not constant on the collar of its base");
        }
    }

    static PathTangentField zero(const DiscretePath& base) {
        return PathTangentField(base, std::vector<Vec>(base.size(), Vec::Zero(base.manifold().coord_dim())));
    }

    /// The same chart components at every node (projected onto each tangent plane on the sphere).
    static PathTangentField constant(const DiscretePath& base, const Vec& components) {
        std::vector<Vec> vs;
        vs.reserve(base.size());
        for (const Vec& x : base.samples()) vs.push_back(base.manifold().tangent_projection(x, components));
        return PathTangentField(base, std::move(vs));
    }

    const DiscretePath& base() const { return base_; }
    const ManifoldSpec& manifold() const { return base_.manifold(); }
    const std::vector<Vec>& vectors() const { return vectors_; }
    const Vec& operator[](std::size_t i) const { return vectors_[i]; }
    std::size_t size() const { return vectors_.size(); }
    TangentVector at(std::size_t i) const { return TangentVector(base_.point(i), vectors_[i]); }

private:
    DiscretePath base_;
    std::vector<Vec> vectors_;
};

// ---------------------------------------------------------------------------

/// gamma(t). Grid nodes return the stored sample; otherwise the neighbouring
/// samples are joined by a geodesic.
inline ManifoldPoint evaluate(const DiscretePath& path, double t) {
    if (!(t >= 0.0 && t <= 1.0)) throw DomainError("evaluate: t must lie in [0, 1]");
    const double u = t * static_cast<double>(path.segments());
    const double nearest = std::round(u);
    if (std::abs(u - nearest) <= 1e-9) return path.point(static_cast<std::size_t>(nearest));
    const std::size_t i = std::min(static_cast<std::size_t>(std::floor(u)), path.segments() - 1);
    const double lambda = u - static_cast<double>(i);
    return ManifoldPoint(path.manifold(),
                         detail::geodesic_interpolate(path.manifold(), path[i], path[i + 1], lambda));
}

/// Samples gamma(phi(t_i)) on a uniform grid of `segments` steps.
inline DiscretePath resample(const DiscretePath& path, std::size_t segments,
                             const std::function<double(double)>& phi = [](double t) { return t; },
                             std::optional<double> collar = std::nullopt) {
    std::vector<Vec> xs;
    xs.reserve(segments + 1);
    for (std::size_t i = 0; i <= segments; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(segments);
        xs.push_back(evaluate(path, std::clamp(phi(t), 0.0, 1.0)).coords);
    }
    const double delta = collar ? *collar : detail::fit_collar(path.manifold(), xs, path.collar());
    return DiscretePath(path.manifold(), std::move(xs), delta);
}

inline DiscretePath reverse(const DiscretePath& path) {
    std::vector<Vec> xs(path.samples().rbegin(), path.samples().rend());
    return DiscretePath(path.manifold(), std::move(xs), path.collar());
}

inline PathTangentField reverse(const PathTangentField& field) {
    std::vector<Vec> vs(field.vectors().rbegin(), field.vectors().rend());
    return PathTangentField(reverse(field.base()), std::move(vs));
}

namespace detail {

inline void require_concatenable(const DiscretePath& first, const DiscretePath& second) {
    if (!(first.manifold() == second.manifold()))
        throw DomainError("concatenate: paths live on different manifolds");
    if (!(first.collar() > 0.0) || !(second.collar() > 0.0))
        throw SmoothnessError("concatenate: both paths must be constant near their end points (collar > 0)");
    if (first.manifold().dist(first.back(), second.front()) > kBaseTolerance)
        throw ComposabilityError("concatenate: end of the first path does not meet the start of the second",
                                 ComposabilityCondition::path_endpoint);
}

} // namespace detail

/// gamma1 followed by gamma2: gamma1(2t) on [0, 1/2], gamma2(2t - 1) on [1/2, 1].
/// The result has 2N steps and collar min(delta1, delta2) / 2. A coarser operand
/// is first resampled onto the finer grid.
inline DiscretePath concatenate(const DiscretePath& first, const DiscretePath& second) {
    detail::require_concatenable(first, second);
    if (first.segments() != second.segments()) {
        const std::size_t n = std::max(first.segments(), second.segments());
        return concatenate(first.segments() == n ? first : resample(first, n, [](double t) { return t; }, first.collar()),
                           second.segments() == n ? second
                                                  : resample(second, n, [](double t) { return t; }, second.collar()));
    }
    std::vector<Vec> xs(first.samples());
    xs.insert(xs.end(), second.samples().begin() + 1, second.samples().end());
    return DiscretePath(first.manifold(), std::move(xs), 0.5 * std::min(first.collar(), second.collar()));
}

/// Joins two fields along concatenate(first.base(), second.base()); the vectors
/// must agree at the junction.
inline PathTangentField concatenate(const PathTangentField& first, const PathTangentField& second) {
    detail::require_concatenable(first.base(), second.base());
    if (first.base().segments() != second.base().segments())
        throw DomainError("concatenate: tangent fields must share the grid size");
    const Vec& a = first.vectors().back();
    const Vec& b = second.vectors().front();
    if ((a - b).norm() > kBaseTolerance * (1.0 + a.norm()))
        throw ComposabilityError("concatenate: tangent fields disagree at the junction",
                                 ComposabilityCondition::field_endpoint);
    DiscretePath base = concatenate(first.base(), second.base());
    std::vector<Vec> vs(first.vectors());
    vs.insert(vs.end(), second.vectors().begin() + 1, second.vectors().end());
    return PathTangentField(std::move(base), std::move(vs));
}

/// Velocity on each grid step, log(x_i, x_{i+1}) / dt.
inline std::vector<Vec> segment_velocities(const DiscretePath& path) {
    const ManifoldSpec& m = path.manifold();
    std::vector<Vec> vs;
    vs.reserve(path.segments());
    const double inv_dt = static_cast<double>(path.segments());
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        try {
            vs.push_back(m.log(path[i], path[i + 1]) * inv_dt);
        } catch (const NormalNeighborhoodError&) {
            throw ResolutionError("adjacent samples " + std::to_string(i) + " and " + std::to_string(i + 1) +
                                  " are beyond the injectivity radius");
        }
    }
    return vs;
}

/// Energy 1/2 int g(gamma', gamma') dt with the velocity taken constant on each
/// grid step. With this rule L^2 <= 2E holds exactly for every discrete path.
inline double path_energy(const DiscretePath& path) {
    const ManifoldSpec& m = path.manifold();
    const std::vector<Vec> vs = segment_velocities(path);
    double sum = 0.0;
    for (std::size_t i = 0; i < vs.size(); ++i) sum += m.inner(path[i], vs[i], vs[i]);
    return 0.5 * sum * path.dt();
}

inline double arc_length(const DiscretePath& path) {
    const ManifoldSpec& m = path.manifold();
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        const double d = m.dist(path[i], path[i + 1]);
        if (d >= m.injectivity_radius())
            throw ResolutionError("arc_length: adjacent samples " + std::to_string(i) +
                                  " are beyond the injectivity radius");
        sum += d;
    }
    return sum;
}

/// Trapezoid weights on the uniform grid with `segments` steps.
inline std::vector<double> trapezoid_weights(std::size_t segments) {
    std::vector<double> w(segments + 1, 1.0 / static_cast<double>(segments));
    w.front() *= 0.5;
    w.back() *= 0.5;
    return w;
}

/// Trapezoid weights on arbitrary increasing nodes (a single node gets weight 0).
inline std::vector<double> trapezoid_weights(std::span<const double> nodes) {
    std::vector<double> w(nodes.size(), 0.0);
    for (std::size_t j = 0; j + 1 < nodes.size(); ++j) {
        const double h = nodes[j + 1] - nodes[j];
        w[j] += 0.5 * h;
        w[j + 1] += 0.5 * h;
    }
    return w;
}

} // namespace pathgeo

#endif // PATHGEO_PATH_HPP
