#ifndef PATHGEO_GENERATORS_HPP
#define PATHGEO_GENERATORS_HPP

#include "pathgeo/path.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

namespace pathgeo {

/// Samples curve(tau), tau in [0, 1], on the grid, holding it at curve(0) for
/// t <= collar and at curve(1) for t >= 1 - collar.
inline DiscretePath collared_path(const ManifoldSpec& m, const std::function<Vec(double)>& curve,
                                  std::size_t segments = kDefaultSegments, double collar = kDefaultCollar) {
    if (segments < 2) throw DomainError("paths need N >= 2");
    const std::size_t c = static_cast<std::size_t>(std::floor(collar * static_cast<double>(segments) + 1e-9));
    if (2 * c >= segments) throw DomainError("collar leaves no interior");
    const Vec start = m.canonical_point(curve(0.0));
    const Vec end = m.canonical_point(curve(1.0));
    std::vector<Vec> xs;
    xs.reserve(segments + 1);
    const double interior = static_cast<double>(segments - 2 * c);
    for (std::size_t i = 0; i <= segments; ++i) {
        if (i <= c) xs.push_back(start);
        else if (i >= segments - c) xs.push_back(end);
        else xs.push_back(m.canonical_point(curve(static_cast<double>(i - c) / interior)));
    }
    return DiscretePath(m, std::move(xs), collar);
}

/// Straight line in chart coordinates.
inline DiscretePath line_path(const ManifoldSpec& m, const Vec& from, const Vec& to,
                              std::size_t segments = kDefaultSegments, double collar = kDefaultCollar) {
    if (m.kind() == ManifoldKind::sphere) throw DomainError("line: not available on the sphere, use great_circle_arc");
    return collared_path(m, [&](double tau) { return Vec(from + tau * (to - from)); }, segments, collar);
}

/// Constant-speed geodesic from `from` to `to` (inside the normal neighbourhood).
inline DiscretePath geodesic_path(const ManifoldSpec& m, const Vec& from, const Vec& to,
                                  std::size_t segments = kDefaultSegments, double collar = kDefaultCollar) {
    const Vec u = m.log(from, to);
    return collared_path(
        m, [&](double tau) { return tau == 1.0 ? to : m.geodesic(from, u, tau).point; }, segments, collar);
}

/// Arc r (cos theta e1 + sin theta e2), theta from 0 to `angle`, where e1 = start / r
/// and e2 is the unit direction of `tangent` orthogonal to start.
inline DiscretePath great_circle_arc(const ManifoldSpec& m, const Vec& start, const Vec& tangent, double angle,
                                     std::size_t segments = kDefaultSegments, double collar = kDefaultCollar) {
    if (m.kind() != ManifoldKind::sphere) throw DomainError("great_circle_arc: needs the sphere");
    const double r = m.radius();
    const Vec e1 = start / start.norm();
    Vec e2 = tangent - e1 * e1.dot(tangent);
    if (!(e2.norm() > 0.0)) throw DomainError("great_circle_arc: tangent is parallel to the start point");
    e2 /= e2.norm();
    return collared_path(
        m, [&](double tau) { return Vec(r * (std::cos(tau * angle) * e1 + std::sin(tau * angle) * e2)); }, segments,
        collar);
}

/// Circle of colatitude theta, longitude from phi0 to phi1.
inline DiscretePath latitude_circle(const ManifoldSpec& m, double colatitude, double phi0 = 0.0,
                                    double phi1 = 2.0 * std::numbers::pi, std::size_t segments = kDefaultSegments,
                                    double collar = kDefaultCollar) {
    if (m.kind() != ManifoldKind::sphere) throw DomainError("latitude_circle: needs the sphere");
    const double r = m.radius();
    return collared_path(
        m,
        [&](double tau) {
            const double phi = phi0 + tau * (phi1 - phi0);
            Vec x(3);
            x << r * std::sin(colatitude) * std::cos(phi), r * std::sin(colatitude) * std::sin(phi),
                r * std::cos(colatitude);
            return x;
        },
        segments, collar);
}

/// Vertical half-plane geodesic x = x0, y from y0 to y1 at constant hyperbolic speed.
inline DiscretePath vertical_ray(const ManifoldSpec& m, double x0, double y0, double y1,
                                 std::size_t segments = kDefaultSegments, double collar = kDefaultCollar) {
    if (m.kind() != ManifoldKind::hyperbolic_half_plane) throw DomainError("vertical_ray: needs the half-plane");
    if (!(y0 > 0.0 && y1 > 0.0)) throw DomainError("vertical_ray: heights must be positive");
    return collared_path(
        m,
        [&](double tau) {
            Vec x(2);
            x << x0, y0 * std::pow(y1 / y0, tau);
            return x;
        },
        segments, collar);
}

namespace detail {

/// Unit (w.r.t. g) direction of motion at each node: log to the next distinct
/// neighbour, or from the previous one at the end. Collar nodes take the
/// direction of the adjacent interior step so the result stays constant there.
inline std::vector<Vec> unit_directions(const DiscretePath& path) {
    const ManifoldSpec& m = path.manifold();
    const std::size_t n = path.segments();
    const std::size_t c = path.collar_nodes();
    std::vector<Vec> out(path.size());
    for (std::size_t i = 0; i <= n; ++i) {
        const std::size_t k = std::clamp(i, c, n - c);
        Vec d = k < n ? m.log(path[k], path[k + 1]) : Vec(-m.log(path[k], path[k - 1]));
        if (d.squaredNorm() == 0.0 && k > 0) d = -m.log(path[k], path[k - 1]);
        const double len = m.norm(path[k], d);
        if (!(len > 0.0)) throw DomainError("normal field: path is stationary at node " + std::to_string(i));
        out[i] = m.transport_along_geodesic(path[k], path[i], d / len);
    }
    return out;
}

} // namespace detail

/// Unit normals along a path scaled by `scale`: the tangent rotated by +90 degrees
/// in 2D charts, and position x tangent on the sphere (northward along an
/// eastward equator).
inline PathTangentField normal_field(const DiscretePath& path, double scale = 1.0) {
    const ManifoldSpec& m = path.manifold();
    if (m.dimension() != 2) throw DomainError("normal field: needs a 2-dimensional manifold");
    const std::vector<Vec> dirs = detail::unit_directions(path);
    std::vector<Vec> vs(path.size());
    for (std::size_t i = 0; i < path.size(); ++i) {
        const Vec& d = dirs[i];
        if (m.kind() == ManifoldKind::sphere) {
            const Eigen::Vector3d x = Eigen::Vector3d(path[i][0], path[i][1], path[i][2]) / m.radius();
            const Eigen::Vector3d n = x.cross(Eigen::Vector3d(d[0], d[1], d[2]));
            vs[i] = m.tangent_projection(path[i], Vec(scale * n));
        } else {
            Vec n(2);
            n << -d[1], d[0];
            vs[i] = scale * n;
        }
    }
    return PathTangentField(path, std::move(vs));
}

} // namespace pathgeo

#endif // PATHGEO_GENERATORS_HPP
