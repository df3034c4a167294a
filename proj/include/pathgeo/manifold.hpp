#ifndef PATHGEO_MANIFOLD_HPP
#define PATHGEO_MANIFOLD_HPP

#include "pathgeo/core.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <initializer_list>
#include <limits>
#include <numbers>
#include <span>
#include <sstream>
#include <string>
#include <vector>

namespace pathgeo {

enum class ManifoldKind { euclidean, sphere, hyperbolic_half_plane, flat_torus };

inline const char* to_string(ManifoldKind kind) {
    switch (kind) {
    case ManifoldKind::euclidean: return "euclidean";
    case ManifoldKind::sphere: return "sphere";
    case ManifoldKind::hyperbolic_half_plane: return "hyperbolic_half_plane";
    case ManifoldKind::flat_torus: return "flat_torus";
    }
    return "unknown";
}

/// Rank-3 array of connection coefficients, indexed (k, i, j) for Gamma^k_{ij}.
class ChristoffelSymbols {
public:
    explicit ChristoffelSymbols(int dim) : dim_(dim) { values_.fill(0.0); }

    int dim() const { return dim_; }
    double operator()(int k, int i, int j) const { return values_[index(k, i, j)]; }
    double& operator()(int k, int i, int j) { return values_[index(k, i, j)]; }

private:
    static std::size_t index(int k, int i, int j) {
        return (static_cast<std::size_t>(k) * kMaxDim + static_cast<std::size_t>(i)) * kMaxDim +
               static_cast<std::size_t>(j);
    }

    int dim_;
    std::array<double, kMaxDim * kMaxDim * kMaxDim> values_;
};

/// Position and velocity of a geodesic at some parameter.
struct GeodesicState {
    Vec point;
    Vec velocity;
};

/// One of the built-in Riemannian manifolds, together with its chart-level kernels.
///
/// Coordinates: euclidean(n) and flat_torus use R^n (torus coordinates are taken
/// modulo the circumferences), the sphere of radius r is embedded in R^3, and the
/// hyperbolic half-plane uses (x, y) with y > 0 and metric (dx^2 + dy^2) / y^2.
///
/// The kernels operate on raw coordinate vectors and do not re-validate inputs;
/// the free functions further down take ManifoldPoint / TangentVector and check
/// their preconditions.
class ManifoldSpec {
public:
    static ManifoldSpec euclidean(int dim) {
        if (dim < 1 || dim > kMaxDim)
            throw DomainError("euclidean dimension must be in [1, " + std::to_string(kMaxDim) + "]");
        ManifoldSpec m(ManifoldKind::euclidean);
        m.dim_ = dim;
        return m;
    }

    static ManifoldSpec sphere(double radius = 1.0) {
        if (!(radius > 0.0) || !std::isfinite(radius)) throw DomainError("sphere radius must be positive");
        ManifoldSpec m(ManifoldKind::sphere);
        m.dim_ = 2;
        m.radius_ = radius;
        return m;
    }

    static ManifoldSpec hyperbolic_half_plane() {
        ManifoldSpec m(ManifoldKind::hyperbolic_half_plane);
        m.dim_ = 2;
        return m;
    }

    static ManifoldSpec flat_torus(std::span<const double> circumferences) {
        if (circumferences.empty() || circumferences.size() > static_cast<std::size_t>(kMaxDim))
            throw DomainError("flat_torus needs between 1 and " + std::to_string(kMaxDim) + " circumferences");
        ManifoldSpec m(ManifoldKind::flat_torus);
        m.dim_ = static_cast<int>(circumferences.size());
        m.circumferences_.resize(m.dim_);
        for (int i = 0; i < m.dim_; ++i) {
            if (!(circumferences[i] > 0.0) || !std::isfinite(circumferences[i]))
                throw DomainError("torus circumferences must be positive");
            m.circumferences_[i] = circumferences[i];
        }
        return m;
    }

    static ManifoldSpec flat_torus(std::initializer_list<double> circumferences) {
        return flat_torus(std::span<const double>(circumferences.begin(), circumferences.size()));
    }

    ManifoldKind kind() const { return kind_; }
    /// Intrinsic dimension.
    int dimension() const { return dim_; }
    /// Number of chart coordinates (3 for the embedded sphere).
    int coord_dim() const { return kind_ == ManifoldKind::sphere ? 3 : dim_; }
    double radius() const { return radius_; }
    const Vec& circumferences() const { return circumferences_; }
    bool is_flat() const { return kind_ == ManifoldKind::euclidean || kind_ == ManifoldKind::flat_torus; }

    double injectivity_radius() const {
        switch (kind_) {
        case ManifoldKind::sphere: return std::numbers::pi * radius_;
        case ManifoldKind::flat_torus: return 0.5 * circumferences_.minCoeff();
        default: return std::numeric_limits<double>::infinity();
        }
    }

    std::string name() const {
        switch (kind_) {
        case ManifoldKind::euclidean: return "euclidean(" + std::to_string(dim_) + ")";
        case ManifoldKind::sphere: {
            std::ostringstream os;
            os << "sphere(" << radius_ << ")";
            return os.str();
        }
        case ManifoldKind::hyperbolic_half_plane: return "hyperbolic_half_plane";
        case ManifoldKind::flat_torus: return "flat_torus(" + std::to_string(dim_) + ")";
        }
        return "unknown";
    }

    friend bool operator==(const ManifoldSpec& a, const ManifoldSpec& b) {
        if (a.kind_ != b.kind_ || a.dim_ != b.dim_) return false;
        if (a.kind_ == ManifoldKind::sphere) return a.radius_ == b.radius_;
        if (a.kind_ == ManifoldKind::flat_torus) return a.circumferences_ == b.circumferences_;
        return true;
    }

    // ---- validation and normalisation -------------------------------------

    /// Empty string when x is a valid point, otherwise the reason it is not.
    std::string point_defect(const Vec& x) const {
        if (x.size() != coord_dim()) return "expected " + std::to_string(coord_dim()) + " coordinates";
        if (!x.allFinite()) return "non-finite coordinates";
        if (kind_ == ManifoldKind::sphere && std::abs(x.norm() - radius_) > 1e-9 * radius_)
            return "point is not on the sphere";
        if (kind_ == ManifoldKind::hyperbolic_half_plane && !(x[1] > 0.0)) return "half-plane point needs y > 0";
        return {};
    }

    void require_point(const Vec& x) const {
        if (auto defect = point_defect(x); !defect.empty()) throw DomainError(name() + ": " + defect);
    }

    void require_tangent(const Vec& x, const Vec& v) const {
        if (v.size() != coord_dim()) throw DomainError(name() + ": tangent vector has wrong size");
        if (!v.allFinite()) throw DomainError(name() + ": non-finite tangent vector");
        if (kind_ == ManifoldKind::sphere && std::abs(x.dot(v)) > 1e-9 * v.norm() * radius_ + 1e-300)
            throw DomainError(name() + ": tangent vector is not orthogonal to its base point");
    }

    /// Projects onto the sphere / wraps torus coordinates; identity otherwise.
    Vec canonical_point(const Vec& x) const {
        if (kind_ == ManifoldKind::sphere) return x * (radius_ / x.norm());
        if (kind_ == ManifoldKind::flat_torus) {
            Vec y = x;
            for (int i = 0; i < dim_; ++i) {
                const double c = circumferences_[i];
                y[i] = x[i] - c * std::floor(x[i] / c);
                if (y[i] >= c) y[i] -= c;
            }
            return y;
        }
        return x;
    }

    Vec tangent_projection(const Vec& x, const Vec& v) const {
        if (kind_ == ManifoldKind::sphere) return v - x * (x.dot(v) / x.squaredNorm());
        return v;
    }

    /// Orthonormal (with respect to g) basis of the tangent space at x.
    std::vector<Vec> tangent_basis(const Vec& x) const {
        std::vector<Vec> basis;
        if (kind_ == ManifoldKind::sphere) {
            const Eigen::Vector3d n = Eigen::Vector3d(x[0], x[1], x[2]).normalized();
            Eigen::Index axis = 0;
            n.cwiseAbs().minCoeff(&axis);
            Eigen::Vector3d e = Eigen::Vector3d::Unit(axis);
            Eigen::Vector3d b1 = (e - n * n.dot(e)).normalized();
            Eigen::Vector3d b2 = n.cross(b1);
            basis.emplace_back(Vec(b1));
            basis.emplace_back(Vec(b2));
            return basis;
        }
        const double scale = kind_ == ManifoldKind::hyperbolic_half_plane ? x[1] : 1.0;
        for (int i = 0; i < dim_; ++i) {
            Vec e = Vec::Zero(dim_);
            e[i] = scale;
            basis.push_back(e);
        }
        return basis;
    }

    // ---- metric and connection ---------------------------------------------

    double inner(const Vec& x, const Vec& u, const Vec& v) const {
        if (kind_ == ManifoldKind::hyperbolic_half_plane) return u.dot(v) / (x[1] * x[1]);
        return u.dot(v);
    }

    double norm(const Vec& x, const Vec& v) const { return std::sqrt(inner(x, v, v)); }

    /// Coordinate Christoffel symbols. For the embedded sphere these are the
    /// ambient coefficients Gamma^k_{ij} = delta_ij x^k / r^2, which give the
    /// Levi-Civita connection when applied to tangent vectors.
    ChristoffelSymbols christoffel(const Vec& x) const {
        ChristoffelSymbols gamma(coord_dim());
        if (kind_ == ManifoldKind::sphere) {
            const double inv_r2 = 1.0 / (radius_ * radius_);
            for (int k = 0; k < 3; ++k)
                for (int i = 0; i < 3; ++i) gamma(k, i, i) = x[k] * inv_r2;
        } else if (kind_ == ManifoldKind::hyperbolic_half_plane) {
            const double inv_y = 1.0 / x[1];
            gamma(0, 0, 1) = -inv_y;
            gamma(0, 1, 0) = -inv_y;
            gamma(1, 0, 0) = inv_y;
            gamma(1, 1, 1) = -inv_y;
        }
        return gamma;
    }

    /// Gamma^k_{ij} u^i w^j.
    Vec christoffel_contract(const Vec& x, const Vec& u, const Vec& w) const {
        switch (kind_) {
        case ManifoldKind::sphere: return x * (u.dot(w) / (radius_ * radius_));
        case ManifoldKind::hyperbolic_half_plane: {
            const double inv_y = 1.0 / x[1];
            Vec r(2);
            r[0] = -(u[0] * w[1] + u[1] * w[0]) * inv_y;
            r[1] = (u[0] * w[0] - u[1] * w[1]) * inv_y;
            return r;
        }
        default: return Vec::Zero(u.size());
        }
    }

    // ---- closed-form geodesics -----------------------------------------------

    /// State at parameter s of the geodesic with initial point x and velocity v.
    GeodesicState geodesic(const Vec& x, const Vec& v, double s) const {
        switch (kind_) {
        case ManifoldKind::euclidean: return {x + s * v, v};
        case ManifoldKind::flat_torus: return {canonical_point(x + s * v), v};
        case ManifoldKind::sphere: return sphere_geodesic(x, v, s);
        case ManifoldKind::hyperbolic_half_plane: return half_plane_geodesic(x, v, s);
        }
        return {x, v};
    }

    Vec exp(const Vec& x, const Vec& v) const { return geodesic(x, v, 1.0).point; }

    double dist(const Vec& x, const Vec& y) const {
        switch (kind_) {
        case ManifoldKind::euclidean: return (y - x).norm();
        case ManifoldKind::flat_torus: return wrapped_difference(x, y).norm();
        case ManifoldKind::sphere: {
            const Eigen::Vector3d a(x[0], x[1], x[2]);
            const Eigen::Vector3d b(y[0], y[1], y[2]);
            return radius_ * std::atan2(a.cross(b).norm(), a.dot(b));
        }
        case ManifoldKind::hyperbolic_half_plane: {
            const double delta = (y - x).squaredNorm() / (2.0 * x[1] * y[1]);
            return std::log1p(delta + std::sqrt(delta * (delta + 2.0)));
        }
        }
        return 0.0;
    }

    /// Inverse of exp inside the injectivity radius. Throws
    /// NormalNeighborhoodError when y is at or beyond it.
    Vec log(const Vec& x, const Vec& y) const {
        switch (kind_) {
        case ManifoldKind::euclidean: return y - x;
        case ManifoldKind::flat_torus: {
            Vec d = wrapped_difference(x, y);
            if (d.norm() >= injectivity_radius()) throw outside_neighbourhood(d.norm());
            return d;
        }
        case ManifoldKind::sphere: return sphere_log(x, y);
        case ManifoldKind::hyperbolic_half_plane: return half_plane_log(x, y);
        }
        return Vec::Zero(x.size());
    }

    /// Shortest coordinate difference y - x (wrapped on the torus).
    Vec chart_difference(const Vec& x, const Vec& y) const {
        if (kind_ == ManifoldKind::flat_torus) return wrapped_difference(x, y);
        return y - x;
    }

    /// Parallel transport of v from x to y along the minimising geodesic.
    Vec transport_along_geodesic(const Vec& x, const Vec& y, const Vec& v) const {
        if (is_flat()) return v;
        const Vec u = log(x, y);
        const double len = norm(x, u);
        if (len == 0.0) return v;
        if (kind_ == ManifoldKind::sphere) {
            const Vec xhat = x / radius_;
            const Vec e = u / len;
            const double theta = len / radius_;
            const Vec e_end = -std::sin(theta) * xhat + std::cos(theta) * e;
            const double a = v.dot(e);
            return tangent_projection(y, v - a * e + a * e_end);
        }
        // Half-plane: the angle to the geodesic tangent is preserved, and rotating
        // a chart vector by 90 degrees keeps g-orthonormality (conformal metric).
        const GeodesicState end = geodesic(x, u, 1.0);
        const Vec t0 = u / len;
        const Vec n0 = rot90(t0);
        const Vec t1 = end.velocity / norm(end.point, end.velocity);
        const Vec n1 = rot90(t1);
        const double a = inner(x, v, t0);
        const double b = inner(x, v, n0);
        return a * t1 + b * n1;
    }

private:
    explicit ManifoldSpec(ManifoldKind kind) : kind_(kind) {}

    static Vec rot90(const Vec& v) {
        Vec r(2);
        r[0] = -v[1];
        r[1] = v[0];
        return r;
    }

    NormalNeighborhoodError outside_neighbourhood(double d) const {
        return NormalNeighborhoodError(name() + ": point at distance " + std::to_string(d) +
                                           " is outside the normal neighbourhood (injectivity radius " +
                                           std::to_string(injectivity_radius()) + ")",
                                       0, 0.0, d);
    }

    Vec wrapped_difference(const Vec& x, const Vec& y) const {
        Vec d = y - x;
        for (int i = 0; i < dim_; ++i) {
            const double c = circumferences_[i];
            d[i] -= c * std::round(d[i] / c);
        }
        return d;
    }

    GeodesicState sphere_geodesic(const Vec& x, const Vec& v, double s) const {
        const double speed = v.norm();
        if (speed == 0.0) return {x, v};
        const double omega = speed / radius_;
        const double c = std::cos(omega * s);
        const double sn = std::sin(omega * s);
        Vec point = c * x + (sn / omega) * v;
        Vec velocity = (-omega * sn) * x + c * v;
        point = canonical_point(point);
        return {point, tangent_projection(point, velocity)};
    }

    Vec sphere_log(const Vec& x, const Vec& y) const {
        const double d = dist(x, y);
        const Vec xhat = x / radius_;
        const Vec diff = y - x;
        const Vec w = diff - xhat * xhat.dot(diff);
        const double wn = w.norm();
        if (d == 0.0 || wn == 0.0) {
            if (xhat.dot(y) < 0.0) throw outside_neighbourhood(injectivity_radius());
            return Vec::Zero(3);
        }
        if (d >= injectivity_radius() * (1.0 - 1e-12)) throw outside_neighbourhood(d);
        return w * (d / wn);
    }

    // Geodesics of the half-plane are computed by mapping the base point to i,
    // sending the upper half-plane to the disk with the Cayley transform, and
    // following the radial geodesic there.
    GeodesicState half_plane_geodesic(const Vec& x, const Vec& v, double s) const {
        using C = std::complex<double>;
        const double x0 = x[0];
        const double y0 = x[1];
        const double chart_speed = std::hypot(v[0], v[1]);
        if (chart_speed == 0.0) return {x, v};
        const double lambda = chart_speed / y0;
        const C unit(v[0] / chart_speed, v[1] / chart_speed);
        const C dir = C(0.0, -1.0) * unit; // e^{i alpha}
        const C beta_dir = s >= 0.0 ? dir : -dir;
        const double e = std::exp(-lambda * std::abs(s));
        const double sb = beta_dir.imag();
        // cos^2(beta/2) = (1 + cos beta) / 2 and sin^2(beta/2) = (1 - cos beta) / 2,
        // evaluated without cancellation.
        const double half_angle = std::arg(beta_dir) / 2.0;
        const double cos2 = std::cos(half_angle) * std::cos(half_angle);
        const double sin2 = std::sin(half_angle) * std::sin(half_angle);
        const C num(2.0 * cos2 + 2.0 * e * sin2, (1.0 - e) * sb);
        const C den(2.0 * sin2 + 2.0 * e * cos2, -(1.0 - e) * sb);
        const C w = C(0.0, 1.0) * num / den;
        const C vel = y0 * C(0.0, 4.0) * lambda * e * dir / (den * den);
        Vec point(2);
        point[0] = x0 + y0 * w.real();
        point[1] = y0 * w.imag();
        Vec velocity(2);
        velocity[0] = vel.real();
        velocity[1] = vel.imag();
        return {point, velocity};
    }

    Vec half_plane_log(const Vec& x, const Vec& y) const {
        using C = std::complex<double>;
        const double d = dist(x, y);
        if (d == 0.0) return Vec::Zero(2);
        const C w((y[0] - x[0]) / x[1], y[1] / x[1]);
        const C zeta = (w - C(0.0, 1.0)) / (w + C(0.0, 1.0));
        const double az = std::abs(zeta);
        if (az == 0.0) return Vec::Zero(2);
        const C unit = C(0.0, 1.0) * zeta / az;
        Vec v(2);
        v[0] = x[1] * d * unit.real();
        v[1] = x[1] * d * unit.imag();
        return v;
    }

    ManifoldKind kind_;
    int dim_ = 0;
    double radius_ = 1.0;
    Vec circumferences_;
};

// ---------------------------------------------------------------------------
// Value types carrying manifold identity

struct ManifoldPoint {
    ManifoldSpec manifold;
    Vec coords;

    ManifoldPoint(ManifoldSpec m, Vec x) : manifold(std::move(m)), coords(std::move(x)) {
        manifold.require_point(coords);
    }
};

struct TangentVector {
    ManifoldPoint base;
    Vec components;

    TangentVector(ManifoldPoint p, Vec v) : base(std::move(p)), components(std::move(v)) {
        base.manifold.require_tangent(base.coords, components);
    }
};

namespace detail {

inline void require_same_point(const ManifoldPoint& p, const ManifoldPoint& q, const char* what) {
    if (!(p.manifold == q.manifold)) throw DomainError(std::string(what) + ": points live on different manifolds");
    if (p.manifold.dist(p.coords, q.coords) > kBaseTolerance)
        throw DomainError(std::string(what) + ": base points do not coincide");
}

inline void require_same_manifold(const ManifoldPoint& p, const ManifoldPoint& q, const char* what) {
    if (!(p.manifold == q.manifold)) throw DomainError(std::string(what) + ": points live on different manifolds");
}

/// Right-hand side of the geodesic equation, (x', v') = (v, -Gamma(v, v)).
inline GeodesicState geodesic_rhs(const ManifoldSpec& m, const Vec& x, const Vec& v) {
    return {v, -m.christoffel_contract(x, v, v)};
}

/// One classical RK4 step of the geodesic equation. The sphere state is projected
/// back onto the constraint afterwards.
inline GeodesicState rk4_geodesic_step(const ManifoldSpec& m, const GeodesicState& st, double h) {
    const Vec& x = st.point;
    const Vec& v = st.velocity;
    const GeodesicState k1 = geodesic_rhs(m, x, v);
    const GeodesicState k2 = geodesic_rhs(m, x + 0.5 * h * k1.point, v + 0.5 * h * k1.velocity);
    const GeodesicState k3 = geodesic_rhs(m, x + 0.5 * h * k2.point, v + 0.5 * h * k2.velocity);
    const GeodesicState k4 = geodesic_rhs(m, x + h * k3.point, v + h * k3.velocity);
    GeodesicState out{x + (h / 6.0) * (k1.point + 2.0 * k2.point + 2.0 * k3.point + k4.point),
                      v + (h / 6.0) * (k1.velocity + 2.0 * k2.velocity + 2.0 * k3.velocity + k4.velocity)};
    if (m.kind() == ManifoldKind::sphere) {
        out.point = m.canonical_point(out.point);
        out.velocity = m.tangent_projection(out.point, out.velocity);
    }
    return out;
}

inline bool state_in_domain(const ManifoldSpec& m, const GeodesicState& st) {
    if (!st.point.allFinite() || !st.velocity.allFinite()) return false;
    if (m.kind() == ManifoldKind::hyperbolic_half_plane && !(st.point[1] > 0.0)) return false;
    return true;
}

// Fixed-size versions of rk4_geodesic_step for the 2- and 3-coordinate charts,
// where the dynamic vector overhead dominates the arithmetic.
template <int D, class Accel, class Fix, class Valid>
long rk4_loop(GeodesicState& st, double h, long steps, Accel accel, Fix fix, Valid valid) {
    using V = Eigen::Matrix<double, D, 1>;
    V x = st.point;
    V v = st.velocity;
    long k = 0;
    for (; k < steps; ++k) {
        const V a1 = accel(x, v);
        const V x2 = x + 0.5 * h * v, v2 = v + 0.5 * h * a1;
        const V a2 = accel(x2, v2);
        const V x3 = x + 0.5 * h * v2, v3 = v + 0.5 * h * a2;
        const V a3 = accel(x3, v3);
        const V x4 = x + h * v3, v4 = v + h * a3;
        const V a4 = accel(x4, v4);
        V xn = x + (h / 6.0) * (v + 2.0 * v2 + 2.0 * v3 + v4);
        V vn = v + (h / 6.0) * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
        fix(xn, vn);
        if (!valid(xn, vn)) break;
        x = xn;
        v = vn;
    }
    st.point = x;
    st.velocity = v;
    return k;
}

/// Takes up to `steps` RK4 steps of size h in place. Returns the number of steps
/// taken; fewer than requested means the next step would leave the chart domain
/// and `st` holds the last valid state.
inline long rk4_advance(const ManifoldSpec& m, GeodesicState& st, double h, long steps) {
    auto finite2 = [](const Eigen::Vector2d& x, const Eigen::Vector2d& v) { return x.allFinite() && v.allFinite(); };
    auto no_fix2 = [](Eigen::Vector2d&, Eigen::Vector2d&) {};
    switch (m.kind()) {
    case ManifoldKind::sphere: {
        const double r = m.radius();
        const double inv_r2 = 1.0 / (r * r);
        return rk4_loop<3>(
            st, h, steps,
            [inv_r2](const Eigen::Vector3d& x, const Eigen::Vector3d& v) {
                return Eigen::Vector3d(-x * (v.squaredNorm() * inv_r2));
            },
            [r](Eigen::Vector3d& x, Eigen::Vector3d& v) {
                x *= r / x.norm();
                v -= x * (x.dot(v) / x.squaredNorm());
            },
            [](const Eigen::Vector3d& x, const Eigen::Vector3d& v) { return x.allFinite() && v.allFinite(); });
    }
    case ManifoldKind::hyperbolic_half_plane:
        return rk4_loop<2>(
            st, h, steps,
            [](const Eigen::Vector2d& x, const Eigen::Vector2d& v) {
                const double inv_y = 1.0 / x[1];
                return Eigen::Vector2d(2.0 * v[0] * v[1] * inv_y, (v[1] * v[1] - v[0] * v[0]) * inv_y);
            },
            no_fix2,
            [](const Eigen::Vector2d& x, const Eigen::Vector2d& v) {
                return x.allFinite() && v.allFinite() && x[1] > 0.0;
            });
    default:
        if (m.coord_dim() == 2)
            return rk4_loop<2>(
                st, h, steps, [](const Eigen::Vector2d&, const Eigen::Vector2d&) { return Eigen::Vector2d::Zero(); },
                no_fix2, finite2);
        break;
    }
    long k = 0;
    for (; k < steps; ++k) {
        GeodesicState next = rk4_geodesic_step(m, st, h);
        if (!state_in_domain(m, next)) break;
        st = std::move(next);
    }
    return k;
}

/// Integrates the geodesic ODE from `start` over a signed parameter span using
/// `steps` equal RK4 steps. Torus coordinates are left unwrapped.
inline GeodesicState integrate_geodesic(const ManifoldSpec& m, GeodesicState start, double span, long steps,
                                        double s_offset = 0.0) {
    if (steps <= 0 || span == 0.0) return start;
    const double h = span / static_cast<double>(steps);
    const long done = rk4_advance(m, start, h, steps);
    if (done < steps)
        throw IntegrationError(m.name() + ": geodesic left the chart domain", start.point, start.velocity,
                               s_offset + h * static_cast<double>(done));
    return start;
}

/// Parallel transport of X along the geodesic segment from x0 with velocity u over
/// unit parameter time, RK4 with `substeps` steps. The curve is evaluated in closed form.
inline Vec transport_segment(const ManifoldSpec& m, const Vec& x0, const Vec& u, Vec X, int substeps) {
    const double h = 1.0 / substeps;
    auto rhs = [&](double tau, const Vec& v) {
        const GeodesicState c = m.geodesic(x0, u, tau);
        return Vec(-m.christoffel_contract(c.point, c.velocity, v));
    };
    for (int k = 0; k < substeps; ++k) {
        const double tau = h * k;
        const Vec k1 = rhs(tau, X);
        const Vec k2 = rhs(tau + 0.5 * h, X + 0.5 * h * k1);
        const Vec k3 = rhs(tau + 0.5 * h, X + 0.5 * h * k2);
        const Vec k4 = rhs(tau + h, X + h * k3);
        X += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (m.kind() == ManifoldKind::sphere) X = m.tangent_projection(m.geodesic(x0, u, tau + h).point, X);
    }
    return X;
}

/// Transports v0 along the piecewise-geodesic curve through `points`.
/// Coincident consecutive samples are skipped (identity transport).
inline std::vector<Vec> transport_kernel(const ManifoldSpec& m, std::span<const Vec> points, const Vec& v0,
                                         int substeps) {
    std::vector<Vec> out;
    out.reserve(points.size());
    if (points.empty()) return out;
    out.push_back(v0);
    Vec X = v0;
    for (std::size_t k = 0; k + 1 < points.size(); ++k) {
        const Vec u = m.log(points[k], points[k + 1]);
        if (u.squaredNorm() > 0.0) {
            X = transport_segment(m, points[k], u, X, substeps);
            if (m.kind() == ManifoldKind::sphere) X = m.tangent_projection(points[k + 1], X);
        }
        out.push_back(X);
    }
    return out;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Operations

inline double metric_eval(const ManifoldPoint& p, const TangentVector& u, const TangentVector& v) {
    detail::require_same_point(p, u.base, "metric_eval");
    detail::require_same_point(p, v.base, "metric_eval");
    return p.manifold.inner(p.coords, u.components, v.components);
}

inline ChristoffelSymbols christoffel(const ManifoldPoint& p) { return p.manifold.christoffel(p.coords); }

struct GeodesicNode {
    double s;
    ManifoldPoint point;
    TangentVector velocity;
};

/// Fixed-step RK4 solution of the geodesic equation on [0, s_end]; returns steps+1 nodes.
inline std::vector<GeodesicNode> geodesic_integrate(const ManifoldPoint& p, const TangentVector& v, double s_end,
                                                    long steps) {
    detail::require_same_point(p, v.base, "geodesic_integrate");
    if (steps < 1) throw DomainError("geodesic_integrate: steps must be >= 1");
    const ManifoldSpec& m = p.manifold;
    std::vector<GeodesicNode> out;
    out.reserve(static_cast<std::size_t>(steps) + 1);
    GeodesicState st{p.coords, v.components};
    out.push_back({0.0, p, v});
    const double h = s_end / static_cast<double>(steps);
    for (long k = 0; k < steps; ++k) {
        GeodesicState next = detail::rk4_geodesic_step(m, st, h);
        if (!detail::state_in_domain(m, next))
            throw IntegrationError(m.name() + ": geodesic left the chart domain", st.point, st.velocity,
                                   h * static_cast<double>(k));
        st = std::move(next);
        ManifoldPoint q(m, m.canonical_point(st.point));
        TangentVector w(q, st.velocity);
        out.push_back({h * static_cast<double>(k + 1), q, std::move(w)});
    }
    return out;
}

/// Closed-form exponential map.
inline ManifoldPoint exp_map(const ManifoldPoint& p, const TangentVector& v) {
    detail::require_same_point(p, v.base, "exp_map");
    return ManifoldPoint(p.manifold, p.manifold.exp(p.coords, v.components));
}

/// Exponential map by RK4 integration (regression route for the closed form).
inline ManifoldPoint exp_map_integrated(const ManifoldPoint& p, const TangentVector& v,
                                        long steps = kDefaultStepsPerUnit) {
    detail::require_same_point(p, v.base, "exp_map_integrated");
    const GeodesicState end = detail::integrate_geodesic(p.manifold, {p.coords, v.components}, 1.0, steps);
    return ManifoldPoint(p.manifold, p.manifold.canonical_point(end.point));
}

inline TangentVector log_map(const ManifoldPoint& p, const ManifoldPoint& q) {
    detail::require_same_manifold(p, q, "log_map");
    return TangentVector(p, p.manifold.log(p.coords, q.coords));
}

struct ShootingOptions {
    long steps = kDefaultStepsPerUnit;
    int max_iterations = 50;
    double tolerance = 1e-10;
    double jacobian_step = 1e-6;
};

/// Logarithm by geodesic shooting: Newton iteration on the endpoint residual of
/// the RK4 integrator, in tangent-basis coordinates. Used to regress the closed forms.
inline TangentVector log_map_shooting(const ManifoldPoint& p, const ManifoldPoint& q, ShootingOptions opts = {}) {
    detail::require_same_manifold(p, q, "log_map_shooting");
    const ManifoldSpec& m = p.manifold;
    if (m.dist(p.coords, q.coords) >= m.injectivity_radius())
        throw NormalNeighborhoodError("log_map_shooting: target outside the normal neighbourhood", 0, 0.0,
                                      m.dist(p.coords, q.coords));
    const std::vector<Vec> basis = m.tangent_basis(p.coords);
    const int n = static_cast<int>(basis.size());
    auto to_vector = [&](const Eigen::VectorXd& c) {
        Vec v = Vec::Zero(m.coord_dim());
        for (int i = 0; i < n; ++i) v += c[i] * basis[i];
        return v;
    };
    auto residual = [&](const Eigen::VectorXd& c) {
        const GeodesicState end = detail::integrate_geodesic(m, {p.coords, to_vector(c)}, 1.0, opts.steps);
        const Vec diff = m.chart_difference(q.coords, m.canonical_point(end.point));
        return Eigen::VectorXd(diff);
    };
    // Start from the chart difference expressed in the basis.
    Eigen::VectorXd c(n);
    const Vec d0 = m.tangent_projection(p.coords, m.chart_difference(p.coords, q.coords));
    for (int i = 0; i < n; ++i) c[i] = m.inner(p.coords, d0, basis[i]);
    Eigen::VectorXd r = residual(c);
    for (int it = 0; it < opts.max_iterations && r.norm() > opts.tolerance; ++it) {
        Eigen::MatrixXd J(r.size(), n);
        for (int j = 0; j < n; ++j) {
            Eigen::VectorXd cp = c, cm = c;
            cp[j] += opts.jacobian_step;
            cm[j] -= opts.jacobian_step;
            J.col(j) = (residual(cp) - residual(cm)) / (2.0 * opts.jacobian_step);
        }
        c -= J.colPivHouseholderQr().solve(r);
        r = residual(c);
    }
    if (r.norm() > opts.tolerance * 1e3)
        throw IntegrationError("log_map_shooting: Newton iteration did not converge", p.coords, to_vector(c), 1.0);
    return TangentVector(p, m.tangent_projection(p.coords, to_vector(c)));
}

inline double distance(const ManifoldPoint& p, const ManifoldPoint& q) {
    detail::require_same_manifold(p, q, "distance");
    return p.manifold.dist(p.coords, q.coords);
}

struct CurveNode {
    double s;
    ManifoldPoint point;
};

/// RK4 parallel transport along a sampled curve joined by geodesic segments.
/// `substeps` RK4 steps are taken per segment.
inline std::vector<TangentVector> parallel_transport(std::span<const CurveNode> curve, const TangentVector& v0,
                                                     int substeps = 4) {
    if (curve.empty()) throw DomainError("parallel_transport: empty curve");
    detail::require_same_point(curve.front().point, v0.base, "parallel_transport");
    const ManifoldSpec& m = curve.front().point.manifold;
    std::vector<Vec> pts;
    pts.reserve(curve.size());
    for (std::size_t k = 0; k < curve.size(); ++k) {
        if (!(curve[k].point.manifold == m)) throw DomainError("parallel_transport: mixed manifolds");
        if (k > 0 && curve[k].s < curve[k - 1].s) throw DomainError("parallel_transport: curve samples out of order");
        pts.push_back(curve[k].point.coords);
    }
    const std::vector<Vec> raw = detail::transport_kernel(m, pts, v0.components, std::max(1, substeps));
    std::vector<TangentVector> out;
    out.reserve(raw.size());
    for (std::size_t k = 0; k < raw.size(); ++k) out.emplace_back(curve[k].point, raw[k]);
    return out;
}

} // namespace pathgeo

#endif // PATHGEO_MANIFOLD_HPP
