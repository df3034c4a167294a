#ifndef PATHGEO_RANDOM_HPP
#define PATHGEO_RANDOM_HPP

#include "pathgeo/backtrack.hpp"
#include "pathgeo/generators.hpp"

#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

namespace pathgeo::sample {

using Rng = std::mt19937_64;

/// Independent stream for case `index` of a property, so each case can be
/// reproduced on its own from the run seed.
inline Rng stream(std::uint64_t seed, std::uint64_t property, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(property), static_cast<std::uint32_t>(index)};
    return Rng(seq);
}

inline double uniform(Rng& g, double a, double b) { return std::uniform_real_distribution<double>(a, b)(g); }
inline double normal(Rng& g) { return std::normal_distribution<double>(0.0, 1.0)(g); }

/// The built-in manifolds used by the property suites.
inline std::vector<ManifoldSpec> standard_manifolds() {
    return {ManifoldSpec::euclidean(2), ManifoldSpec::sphere(1.0), ManifoldSpec::hyperbolic_half_plane(),
            ManifoldSpec::flat_torus({1.0, 2.0})};
}

inline Vec point(const ManifoldSpec& m, Rng& g) {
    Vec x(m.coord_dim());
    switch (m.kind()) {
    case ManifoldKind::euclidean:
        for (int i = 0; i < x.size(); ++i) x[i] = uniform(g, -1.0, 1.0);
        return x;
    case ManifoldKind::sphere:
        for (int i = 0; i < 3; ++i) x[i] = normal(g);
        return m.canonical_point(x);
    case ManifoldKind::hyperbolic_half_plane:
        x << uniform(g, -1.0, 1.0), uniform(g, 0.5, 2.0);
        return x;
    case ManifoldKind::flat_torus:
        for (int i = 0; i < x.size(); ++i) x[i] = uniform(g, 0.0, m.circumferences()[i]);
        return m.canonical_point(x);
    }
    return x;
}

/// Tangent vector at x with uniformly random direction and g-norm in [0, max_norm].
inline Vec tangent(const ManifoldSpec& m, const Vec& x, Rng& g, double max_norm) {
    const std::vector<Vec> basis = m.tangent_basis(x);
    Vec v = Vec::Zero(m.coord_dim());
    for (const Vec& b : basis) v += normal(g) * b;
    const double len = m.norm(x, v);
    if (!(len > 0.0)) return v;
    return m.tangent_projection(x, v * (uniform(g, 0.0, max_norm) / len));
}

/// Smooth collared path exp_p(c(tau)) with c(tau) a low-frequency tangent curve
/// at a random p; metric size of c bounded by `amplitude`.
inline DiscretePath smooth_path(const ManifoldSpec& m, Rng& g, std::size_t segments, double amplitude,
                                double collar = kDefaultCollar, std::optional<Vec> start = std::nullopt) {
    const Vec p = start ? *start : point(m, g);
    const std::vector<Vec> basis = m.tangent_basis(p);
    std::vector<std::array<double, 3>> coeff(basis.size());
    for (auto& c : coeff)
        for (double& a : c) a = uniform(g, -1.0, 1.0);
    const double scale = amplitude / (std::sqrt(3.0 * static_cast<double>(basis.size())));
    auto curve = [&, p](double tau) {
        Vec c = Vec::Zero(m.coord_dim());
        for (std::size_t k = 0; k < basis.size(); ++k)
            c += scale *
                 (coeff[k][0] * tau + coeff[k][1] * std::sin(std::numbers::pi * tau) +
                  coeff[k][2] * std::sin(2.0 * std::numbers::pi * tau) * 0.5) *
                 basis[k];
        return m.exp(p, c);
    };
    return collared_path(m, curve, segments, collar);
}

/// Grid parameter of the interior of a collared path: 0 on the first collar,
/// 1 on the last, linear in between.
inline double interior_parameter(const DiscretePath& path, std::size_t i) {
    const double c = static_cast<double>(path.collar_nodes());
    const double n = static_cast<double>(path.segments());
    return std::clamp((static_cast<double>(i) - c) / (n - 2.0 * c), 0.0, 1.0);
}

/// Smooth tangent field along a path, constant on its collars, with chart size
/// about `amplitude` (scaled by y on the half-plane so the g-size matches).
/// When `start` is given the field takes that value at t = 0.
inline PathTangentField smooth_field(const DiscretePath& path, Rng& g, double amplitude,
                                     std::optional<Vec> start = std::nullopt) {
    const ManifoldSpec& m = path.manifold();
    const int d = m.coord_dim();
    Vec A(d), B(d), C(d);
    for (int k = 0; k < d; ++k) {
        A[k] = amplitude * uniform(g, -1.0, 1.0);
        B[k] = amplitude * uniform(g, -1.0, 1.0);
        C[k] = amplitude * uniform(g, -1.0, 1.0);
    }
    const double y0 = m.kind() == ManifoldKind::hyperbolic_half_plane ? path[0][1] : 1.0;
    std::vector<Vec> vs(path.size());
    for (std::size_t i = 0; i < path.size(); ++i) {
        const double tau = interior_parameter(path, i);
        const double y = m.kind() == ManifoldKind::hyperbolic_half_plane ? path[i][1] : 1.0;
        Vec v;
        if (start) {
            // Matches `start` at tau = 0 and varies smoothly away from it.
            v = *start * (y / y0) + y * (tau * B + std::sin(std::numbers::pi * tau) * C);
        } else {
            v = y * (A + tau * B + std::sin(std::numbers::pi * tau) * C);
        }
        vs[i] = m.tangent_projection(path[i], v);
    }
    if (start) vs[0] = *start;
    for (std::size_t i = 1; i <= path.collar_nodes(); ++i) vs[i] = vs[0];
    return PathTangentField(path, std::move(vs));
}

/// A path and field that retrace themselves exactly on `window`: out along a
/// branch from the junction x_T to x_{T+sigma} and back, node for node.
struct SpurFixture {
    PathTangentField field;
    BackTrackWindow window;
};

inline SpurFixture spur_fixture(const ManifoldSpec& m, Rng& g, std::size_t segments = 256, std::size_t T = 64,
                                std::size_t sigma = 48, double amplitude = 0.6) {
    const std::size_t n = segments;
    const std::size_t c = n / 16;
    if (!(c < T && T + 2 * sigma + c < n)) throw DomainError("spur_fixture: window does not fit");
    amplitude = std::min(amplitude, 0.45 * m.injectivity_radius());
    const Vec J = point(m, g);
    const Vec a = tangent(m, J, g, amplitude), b = tangent(m, J, g, amplitude), b2 = tangent(m, J, g, amplitude),
              dd = tangent(m, J, g, amplitude);
    const int dim = m.coord_dim();
    Vec fa(dim), fb(dim), fc(dim);
    for (int k = 0; k < dim; ++k) {
        fa[k] = uniform(g, -amplitude, amplitude);
        fb[k] = uniform(g, -amplitude, amplitude);
        fc[k] = uniform(g, -amplitude, amplitude);
    }
    // Field profile in a branch parameter u that equals 1 at the junction on every branch.
    auto vec_at = [&](const Vec& x, double u) {
        const double y = m.kind() == ManifoldKind::hyperbolic_half_plane ? x[1] : 1.0;
        return m.tangent_projection(x, Vec(y * (fa + std::cos(u) * fb + u * fc)));
    };
    std::vector<Vec> xs(n + 1), vs(n + 1);
    const double pi = std::numbers::pi;
    for (std::size_t i = 0; i <= n; ++i) {
        if (i <= T) {
            const double tau = std::clamp((static_cast<double>(i) - c) / static_cast<double>(T - c), 0.0, 1.0);
            xs[i] = m.canonical_point(m.exp(J, (1.0 - tau) * a));
            vs[i] = vec_at(xs[i], tau);
        } else if (i <= T + sigma) {
            const double tau = static_cast<double>(i - T) / static_cast<double>(sigma);
            xs[i] = m.canonical_point(m.exp(J, tau * b + 0.5 * std::sin(pi * tau) * b2));
            vs[i] = vec_at(xs[i], 1.0 + tau);
        } else if (i <= T + 2 * sigma) {
            xs[i] = xs[2 * (T + sigma) - i];
            vs[i] = vs[2 * (T + sigma) - i];
        } else {
            const double tau = std::clamp(static_cast<double>(i - T - 2 * sigma) /
                                              static_cast<double>(n - c - T - 2 * sigma),
                                          0.0, 1.0);
            xs[i] = m.canonical_point(m.exp(J, tau * dd));
            vs[i] = vec_at(xs[i], 1.0 - tau);
        }
    }
    // The junction node is shared by all three branches.
    xs[T] = J;
    vs[T] = vec_at(J, 1.0);
    xs[T + 2 * sigma] = xs[T];
    vs[T + 2 * sigma] = vs[T];
    for (std::size_t i = 0; i <= c; ++i) {
        xs[i] = xs[0];
        vs[i] = vs[0];
        xs[n - i] = xs[n];
        vs[n - i] = vs[n];
    }
    DiscretePath base(m, std::move(xs), static_cast<double>(c) / static_cast<double>(n));
    return {PathTangentField(std::move(base), std::move(vs)), {T, sigma}};
}

} // namespace pathgeo::sample

#endif // PATHGEO_RANDOM_HPP
