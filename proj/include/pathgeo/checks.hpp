#ifndef PATHGEO_CHECKS_HPP
#define PATHGEO_CHECKS_HPP

#include "pathgeo/io.hpp"
#include "pathgeo/random.hpp"

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

namespace pathgeo::checks {

/// Outcome of one property: the worst observed value of its error measure and
/// the bound it has to stay below.
struct PropertyResult {
    std::string suite;
    std::string name;
    std::size_t cases = 0;
    double worst = 0.0;
    double bound = 0.0;
    bool passed = false;
    std::string note;
};

struct CheckOptions {
    std::uint64_t seed = 42;
    /// Replaces the reflection fixture of the back-track suite by a broken one
    /// (negative control: the suite must then fail).
    bool corrupt_reflection = false;
    /// Adds wall-clock fields to the report (which then is no longer reproducible byte for byte).
    bool timing = false;
};

struct CheckReport {
    std::uint64_t seed = 0;
    std::vector<PropertyResult> results;
    std::vector<std::pair<std::string, double>> suite_seconds;

    bool passed() const {
        return !results.empty() &&
               std::all_of(results.begin(), results.end(), [](const PropertyResult& r) { return r.passed; });
    }

    Json to_json(bool timing = false) const {
        Json props = Json::array();
        for (const auto& r : results) {
            Json j = {{"suite", r.suite}, {"property", r.name}, {"passed", r.passed}, {"cases", r.cases},
                      {"bound", r.bound}};
            j["worst"] = std::isfinite(r.worst) ? Json(r.worst) : Json(nullptr);
            if (!r.note.empty()) j["note"] = r.note;
            props.push_back(std::move(j));
        }
        Json out = {{"seed", seed}, {"passed", passed()}, {"properties", props}};
        if (timing) {
            Json t = Json::object();
            for (const auto& [s, sec] : suite_seconds) t[s] = sec;
            out["timing_seconds"] = t;
        }
        return out;
    }
};

inline const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names{"manifold", "pathspace", "backtrack", "category"};
    return names;
}

namespace detail {

/// Collects per-case error values (computed in parallel, reduced in case order).
class Tally {
public:
    Tally(std::string suite, std::string name, double bound) {
        result_.suite = std::move(suite);
        result_.name = std::move(name);
        result_.bound = bound;
    }

    /// Evaluates `n` cases; each returns its error value. Exceptions count as
    /// an infinite error and their message is kept as a note.
    template <class Fn>
    Tally& run(std::size_t n, Fn&& fn) {
        std::vector<double> errs(n, 0.0);
        std::vector<std::string> notes(n);
        parallel_for(n, [&](std::size_t i) {
            try {
                errs[i] = fn(i);
            } catch (const std::exception& e) {
                errs[i] = std::numeric_limits<double>::infinity();
                notes[i] = e.what();
            }
        });
        for (std::size_t i = 0; i < n; ++i) {
            add(errs[i]);
            if (!notes[i].empty() && result_.note.empty())
                result_.note = "case " + std::to_string(result_.cases - 1) + ": " + notes[i];
        }
        return *this;
    }

    void add(double err) {
        if (std::isnan(err)) err = std::numeric_limits<double>::infinity();
        result_.worst = std::max(result_.worst, err);
        ++result_.cases;
    }

    void note(std::string text) { result_.note = std::move(text); }

    PropertyResult finish() {
        result_.passed = result_.cases > 0 && result_.worst <= result_.bound;
        return result_;
    }

private:
    PropertyResult result_;
};

inline std::uint64_t property_id(const std::string& name) {
    std::uint64_t h = 1469598103934665603ull; // FNV-1a
    for (unsigned char c : name) h = (h ^ c) * 1099511628211ull;
    return h;
}

inline double wrap_angle(double a) {
    const double two_pi = 2.0 * std::numbers::pi;
    a = std::fmod(a, two_pi);
    if (a > std::numbers::pi) a -= two_pi;
    if (a < -std::numbers::pi) a += two_pi;
    return a;
}

/// Rotation angle of parallel transport once around the circle of the given
/// colatitude, and the predicted 2 pi (1 - cos theta).
inline std::pair<double, double> latitude_holonomy(double colatitude, std::size_t segments) {
    const ManifoldSpec m = ManifoldSpec::sphere(1.0);
    const DiscretePath circle = latitude_circle(m, colatitude, 0.0, 2.0 * std::numbers::pi, segments, 0.0);
    std::vector<CurveNode> curve;
    for (std::size_t i = 0; i < circle.size(); ++i) curve.push_back({circle.t(i), circle.point(i)});
    Vec v0(3);
    v0 << std::cos(colatitude), 0.0, -std::sin(colatitude);
    const auto out = parallel_transport(curve, TangentVector(circle.point(0), v0), 4);
    const Eigen::Vector3d a(v0[0], v0[1], v0[2]);
    const Vec& w = out.back().components;
    const Eigen::Vector3d b(w[0], w[1], w[2]);
    const Eigen::Vector3d n(circle[0][0], circle[0][1], circle[0][2]);
    const double angle = std::atan2(n.dot(a.cross(b)), a.dot(b));
    return {angle, 2.0 * std::numbers::pi * (1.0 - std::cos(colatitude))};
}

/// `path` with the excursion `spur` and its exact node-wise retrace attached at
/// its end (`at_end`) or at its start.
inline DiscretePath with_spur(const DiscretePath& path, const DiscretePath& spur, bool at_end) {
    const std::vector<Vec>& p = path.samples();
    const std::vector<Vec>& e = spur.samples();
    std::vector<Vec> xs;
    if (!at_end) {
        xs.assign(e.begin(), e.end());
        xs.insert(xs.end(), e.rbegin() + 1, e.rend());
        xs.insert(xs.end(), p.begin() + 1, p.end());
    } else {
        xs.assign(p.begin(), p.end());
        xs.insert(xs.end(), e.begin() + 1, e.end());
        xs.insert(xs.end(), e.rbegin() + 1, e.rend());
    }
    const double c = static_cast<double>(std::min(path.collar_nodes(), spur.collar_nodes()));
    const double n = static_cast<double>(xs.size() - 1);
    return DiscretePath(path.manifold(), std::move(xs), c / n);
}

inline double max_abs_diff(const Vec& a, const Vec& b) { return (a - b).cwiseAbs().maxCoeff(); }

/// Geodesic max norm for random initial data on each manifold.
inline double sample_speed(const ManifoldSpec& m, double cap) {
    return std::min(cap, 0.9 * m.injectivity_radius());
}

} // namespace detail

// ---------------------------------------------------------------------------

inline std::vector<PropertyResult> manifold_suite(const CheckOptions& opts) {
    using detail::Tally;
    const std::string suite = "manifold";
    std::vector<PropertyResult> out;
    const auto manifolds = sample::standard_manifolds();

    for (const ManifoldSpec& m : manifolds) {
        const std::string tag = m.name();
        // Integrator against closed form, measured at the end point, and speed drift along the way.
        Tally endpoint(suite, "geodesic_closed_form[" + tag + "]", 1e-5);
        Tally speed(suite, "speed_conservation[" + tag + "]", 1e-6);
        const std::uint64_t pid = detail::property_id("geodesic" + tag);
        std::vector<double> speed_err(200);
        endpoint.run(200, [&](std::size_t k) {
            auto g = sample::stream(opts.seed, pid, k);
            const Vec x = sample::point(m, g);
            const Vec v = sample::tangent(m, x, g, 2.0);
            GeodesicState st{x, v};
            const double e0 = m.inner(x, v, v);
            double drift = 0.0;
            for (int block = 0; block < 10; ++block) {
                st = pathgeo::detail::integrate_geodesic(m, st, 0.1, 100);
                drift = std::max(drift, std::abs(m.inner(st.point, st.velocity, st.velocity) - e0));
            }
            speed_err[k] = drift / (1.0 + e0);
            const GeodesicState exact = m.geodesic(x, v, 1.0);
            return m.dist(m.canonical_point(st.point), exact.point);
        });
        for (double e : speed_err) speed.add(e);
        out.push_back(endpoint.finish());
        out.push_back(speed.finish());

        Tally roundtrip(suite, "exp_log_roundtrip[" + tag + "]", 1e-5);
        const std::uint64_t rid = detail::property_id("roundtrip" + tag);
        roundtrip.run(200, [&](std::size_t k) {
            auto g = sample::stream(opts.seed, rid, k);
            const Vec x = sample::point(m, g);
            const Vec v = sample::tangent(m, x, g, detail::sample_speed(m, 3.0));
            return (m.log(x, m.exp(x, v)) - v).norm();
        });
        out.push_back(roundtrip.finish());

        Tally shooting(suite, "shooting_log[" + tag + "]", 1e-5);
        const std::uint64_t sid = detail::property_id("shooting" + tag);
        shooting.run(20, [&](std::size_t k) {
            auto g = sample::stream(opts.seed, sid, k);
            const ManifoldPoint p(m, sample::point(m, g));
            const Vec v = sample::tangent(m, p.coords, g, detail::sample_speed(m, 1.5));
            const ManifoldPoint q(m, m.exp(p.coords, v));
            const TangentVector closed = log_map(p, q);
            const TangentVector shot = log_map_shooting(p, q);
            return (closed.components - shot.components).norm();
        });
        out.push_back(shooting.finish());

        if (m.kind() != ManifoldKind::sphere) {
            // Levi-Civita formula applied to a centred finite difference of the metric.
            Tally fd(suite, "christoffel_finite_difference[" + tag + "]", 1e-4);
            const std::uint64_t cid = detail::property_id("christoffel" + tag);
            fd.run(50, [&](std::size_t k) {
                auto g = sample::stream(opts.seed, cid, k);
                const ManifoldPoint p(m, sample::point(m, g));
                const int d = m.coord_dim();
                const double h = 1e-5;
                auto metric = [&](const Vec& x, int i, int j) {
                    const ManifoldPoint q(m, x);
                    Vec ei = Vec::Zero(d), ej = Vec::Zero(d);
                    ei[i] = 1.0;
                    ej[j] = 1.0;
                    return metric_eval(q, TangentVector(q, ei), TangentVector(q, ej));
                };
                auto dmetric = [&](int l, int i, int j) {
                    Vec xp = p.coords, xm = p.coords;
                    xp[l] += h;
                    xm[l] -= h;
                    return (metric(xp, i, j) - metric(xm, i, j)) / (2.0 * h);
                };
                Eigen::MatrixXd G(d, d);
                for (int i = 0; i < d; ++i)
                    for (int j = 0; j < d; ++j) G(i, j) = metric(p.coords, i, j);
                const Eigen::MatrixXd Ginv = G.inverse();
                const ChristoffelSymbols gamma = christoffel(p);
                double worst = 0.0;
                for (int kk = 0; kk < d; ++kk)
                    for (int i = 0; i < d; ++i)
                        for (int j = 0; j < d; ++j) {
                            double fdv = 0.0;
                            for (int l = 0; l < d; ++l)
                                fdv += 0.5 * Ginv(kk, l) * (dmetric(i, j, l) + dmetric(j, i, l) - dmetric(l, i, j));
                            worst = std::max(worst, std::abs(fdv - gamma(kk, i, j)));
                            worst = std::max(worst, std::abs(gamma(kk, i, j) - gamma(kk, j, i)));
                        }
                return worst;
            });
            out.push_back(fd.finish());
        }

        Tally iso(suite, "transport_isometry[" + tag + "]", 1e-6);
        const std::uint64_t tid = detail::property_id("transport" + tag);
        iso.run(50, [&](std::size_t k) {
            auto g = sample::stream(opts.seed, tid, k);
            const DiscretePath path = sample::smooth_path(m, g, 64, 1.2, 0.0);
            std::vector<CurveNode> curve;
            for (std::size_t i = 0; i < path.size(); ++i) curve.push_back({path.t(i), path.point(i)});
            const TangentVector a(path.point(0), sample::tangent(m, path[0], g, 1.0));
            const TangentVector b(path.point(0), sample::tangent(m, path[0], g, 1.0));
            const auto ta = parallel_transport(curve, a);
            const auto tb = parallel_transport(curve, b);
            const double ab0 = m.inner(path[0], a.components, b.components);
            const double aa0 = m.inner(path[0], a.components, a.components);
            const double bb0 = m.inner(path[0], b.components, b.components);
            double worst = 0.0;
            for (std::size_t i = 0; i < curve.size(); ++i) {
                const Vec& x = path[i];
                worst = std::max(worst, std::abs(m.inner(x, ta[i].components, tb[i].components) - ab0));
                worst = std::max(worst, std::abs(m.inner(x, ta[i].components, ta[i].components) - aa0));
                worst = std::max(worst, std::abs(m.inner(x, tb[i].components, tb[i].components) - bb0));
            }
            return worst / std::max({aa0, bb0, 1e-300});
        });
        out.push_back(iso.finish());
    }

    Tally holonomy(suite, "latitude_holonomy[sphere]", 1e-4);
    const double thetas[] = {std::numbers::pi / 6.0, std::numbers::pi / 4.0, std::numbers::pi / 3.0, 2.0};
    for (double theta : thetas) {
        const auto [angle, predicted] = detail::latitude_holonomy(theta, 2048);
        holonomy.add(std::abs(detail::wrap_angle(angle - predicted)));
    }
    out.push_back(holonomy.finish());
    return out;
}

// ---------------------------------------------------------------------------

inline std::vector<PropertyResult> pathspace_suite(const CheckOptions& opts) {
    using detail::Tally;
    const std::string suite = "pathspace";
    std::vector<PropertyResult> out;
    const auto manifolds = sample::standard_manifolds();

    // Random worldsheets at N = 256, S = 64, spread over the manifolds.
    {
        Tally fubini(suite, "fubini_identity", 1e-6);
        Tally residual(suite, "fiber_geodesic_residual", 1e-4);
        const std::uint64_t pid = detail::property_id("fubini");
        std::vector<double> res(50);
        fubini.run(50, [&](std::size_t k) {
            auto g = sample::stream(opts.seed, pid, k);
            const ManifoldSpec& m = manifolds[k % manifolds.size()];
            const DiscretePath path = sample::smooth_path(m, g, 256, 0.8);
            const PathTangentField V = sample::smooth_field(path, g, 0.6);
            const double a = sample::uniform(g, -0.5, 0.0);
            const double b = sample::uniform(g, 0.5, 1.0);
            const Worldsheet sheet = pathspace_geodesic(V, Interval{a, b}, 64);
            res[k] = geodesic_residual(sheet);
            const double E = sheet_energy(sheet);
            return std::abs(E - transverse_energy_sum(sheet)) / (1.0 + E);
        });
        for (double r : res) residual.add(r);
        out.push_back(fubini.finish());
        out.push_back(residual.finish());
    }

    {
        Tally traces(suite, "exp_traces_sheet", 1e-6);
        const std::uint64_t pid = detail::property_id("traces");
        traces.run(20, [&](std::size_t k) {
            auto g = sample::stream(opts.seed, pid, k);
            const ManifoldSpec& m = manifolds[k % manifolds.size()];
            const DiscretePath path = sample::smooth_path(m, g, 64, 0.8);
            const PathTangentField V = sample::smooth_field(path, g, 0.6);
            const std::vector<double> s{0.0, 0.25, 0.5, 1.0};
            const Worldsheet sheet = pathspace_geodesic(V, s);
            double worst = 0.0;
            for (std::size_t j = 0; j < s.size(); ++j) {
                std::vector<Vec> scaled;
                for (const Vec& v : V.vectors()) scaled.push_back(s[j] * v);
                const DiscretePath e = pathspace_exp(PathTangentField(path, scaled));
                worst = std::max(worst, max_node_distance(e, sheet.longitudinal(j)));
            }
            return worst;
        });
        out.push_back(traces.finish());
    }

    for (const ManifoldSpec& m : manifolds) {
        const std::string tag = m.name();
        Tally chain(suite, "distance_chain[" + tag + "]", 1e-4);
        Tally cs(suite, "cauchy_schwarz_equality[" + tag + "]", 1e-4);
        Tally strict(suite, "cauchy_schwarz_strict_when_reparametrised[" + tag + "]", 0.0);
        Tally tri(suite, "distance_triangle[" + tag + "]", 1e-9);
        const std::uint64_t pid = detail::property_id("chain" + tag);
        std::vector<double> cs_err(50), strict_err(50), tri_err(50);
        chain.run(50, [&](std::size_t k) {
            auto g = sample::stream(opts.seed, pid, k);
            const DiscretePath g1 = sample::smooth_path(m, g, 128, 0.8);
            const double reach = std::min(1.2, 0.45 * m.injectivity_radius());
            const PathTangentField W = sample::smooth_field(g1, g, 1.0);
            std::vector<Vec> pts2, pts3;
            for (std::size_t i = 0; i < g1.size(); ++i) {
                Vec w = W[i];
                const double len = m.norm(g1[i], w);
                if (len > reach) w *= reach / len;
                pts2.push_back(m.canonical_point(m.exp(g1[i], w)));
                pts3.push_back(m.canonical_point(m.exp(g1[i], -0.5 * w)));
            }
            const DiscretePath g2(m, pts2, g1.collar());
            const DiscretePath g3(m, pts3, g1.collar());
            const Worldsheet sheet = connecting_geodesic(g1, g2, 64);
            const double dt = pathspace_distance(g1, g2);
            const double L = sheet_length(sheet);
            const double Larc = sheet_arc_length(sheet);
            cs_err[k] = std::abs(Larc * Larc - 2.0 * sheet.interval().length() * sheet_energy(sheet)) / (1.0 + Larc * Larc);
            // Same fibers traversed at non-constant speed s -> s^2: L^2 < 2E strictly.
            std::vector<Vec> pts;
            const std::vector<double> s = uniform_nodes({0.0, 1.0}, 64);
            for (double sj : s)
                for (std::size_t i = 0; i < g1.size(); ++i)
                    pts.push_back(m.geodesic(g1[i], m.log(g1[i], g2[i]), sj * sj).point);
            double Lr = 0.0;
            const std::size_t nt = g1.size();
            const std::vector<double> wt = trapezoid_weights(g1.segments());
            for (std::size_t j = 0; j + 1 < s.size(); ++j) {
                double sum = 0.0;
                for (std::size_t i = 0; i < nt; ++i) {
                    const double d = m.dist(pts[j * nt + i], pts[(j + 1) * nt + i]);
                    sum += wt[i] * d * d;
                }
                Lr += std::sqrt(sum);
            }
            const double Er = sampled_sheet_energy(m, s, g1.segments(), pts);
            strict_err[k] = dt > 1e-3 ? -(2.0 * Er - Lr * Lr) : 0.0; // must be negative
            tri_err[k] = std::max(0.0, pathspace_distance(g1, g2) -
                                           (pathspace_distance(g1, g3) + pathspace_distance(g3, g2)));
            return std::abs(L - dt);
        });
        for (std::size_t k = 0; k < 50; ++k) {
            cs.add(cs_err[k]);
            strict.add(strict_err[k] < 0.0 ? 0.0 : std::max(strict_err[k], 1e-300));
            tri.add(tri_err[k]);
        }
        out.push_back(chain.finish());
        out.push_back(cs.finish());
        out.push_back(strict.finish());
        out.push_back(tri.finish());
    }

    {
        // Equator against the latitude circle at colatitude pi/4.
        Tally fixture(suite, "latitude_pair_distance[sphere]", 1e-4);
        const ManifoldSpec m = ManifoldSpec::sphere(1.0);
        const DiscretePath eq = latitude_circle(m, std::numbers::pi / 2.0, 0.0, 2.0 * std::numbers::pi, 256);
        const DiscretePath lat = latitude_circle(m, std::numbers::pi / 4.0, 0.0, 2.0 * std::numbers::pi, 256);
        const double dt = pathspace_distance(eq, lat);
        const double L = sheet_length(connecting_geodesic(eq, lat, 64));
        fixture.add(std::abs(dt - std::numbers::pi / 4.0));
        fixture.add(std::abs(L - std::numbers::pi / 4.0));
        out.push_back(fixture.finish());
    }

    {
        // Endpoint-fixed perturbations of connecting sheets never get shorter than d~.
        Tally minimizing(suite, "minimizing_property", 1e-4);
        const std::uint64_t pid = detail::property_id("minimizing");
        minimizing.run(100, [&](std::size_t k) {
            auto g = sample::stream(opts.seed, pid, k);
            const ManifoldSpec& m = manifolds[k % manifolds.size()];
            const DiscretePath g1 = sample::smooth_path(m, g, 64, 0.8);
            const double reach = std::min(1.0, 0.4 * m.injectivity_radius());
            const PathTangentField W = sample::smooth_field(g1, g, 1.0);
            std::vector<Vec> pts2;
            for (std::size_t i = 0; i < g1.size(); ++i) {
                Vec w = W[i];
                const double len = m.norm(g1[i], w);
                if (len > reach) w *= reach / len;
                pts2.push_back(m.canonical_point(m.exp(g1[i], w)));
            }
            const DiscretePath g2(m, pts2, g1.collar());
            const Worldsheet sheet = connecting_geodesic(g1, g2, 32);
            const double eps = sample::uniform(g, 0.01, 0.3);
            const int mode = 1 + static_cast<int>(k % 3);
            const PathTangentField P = sample::smooth_field(g1, g, 1.0);
            std::vector<Vec> pts;
            const std::size_t nt = sheet.t_count();
            for (std::size_t j = 0; j < sheet.s_count(); ++j) {
                const double bump = std::sin(mode * std::numbers::pi * sheet.s_nodes()[j]);
                for (std::size_t i = 0; i < nt; ++i) {
                    const Vec& x = sheet.point(j, i);
                    Vec w = m.tangent_projection(x, P[i] * (x.size() == 2 && m.kind() ==
                                                                ManifoldKind::hyperbolic_half_plane
                                                            ? x[1] / g1[i][1]
                                                            : 1.0));
                    if (j == 0 || j + 1 == sheet.s_count()) w.setZero();
                    pts.push_back(m.canonical_point(m.exp(x, eps * bump * w)));
                }
            }
            const double E = sampled_sheet_energy(m, sheet.s_nodes(), sheet.t_segments(), pts);
            return std::max(0.0, pathspace_distance(g1, g2) - std::sqrt(2.0 * E));
        });
        out.push_back(minimizing.finish());
    }

    {
        Tally iso(suite, "sheet_transport_isometry", 1e-5);
        const std::uint64_t pid = detail::property_id("sheet_transport");
        iso.run(50, [&](std::size_t k) {
            auto g = sample::stream(opts.seed, pid, k);
            const ManifoldSpec& m = manifolds[k % manifolds.size()];
            const DiscretePath path = sample::smooth_path(m, g, 64, 0.8);
            const PathTangentField V = sample::smooth_field(path, g, 0.6);
            const Worldsheet sheet = pathspace_geodesic(V, Interval{0.0, sample::uniform(g, 0.5, 1.5)}, 64);
            const PathTangentField X = sample::smooth_field(path, g, 0.8);
            const auto fields = pathspace_transport(sheet, X);
            const double n0 = l2_metric(fields[0].base(), fields[0], fields[0]);
            double worst = 0.0;
            for (const auto& f : fields) worst = std::max(worst, std::abs(l2_metric(f.base(), f, f) - n0));
            return worst / std::max(n0, 1e-300);
        });
        out.push_back(iso.finish());
    }

    {
        // Long sphere sheet: the constraint |x| = r must not drift.
        Tally complete(suite, "sphere_completeness_20pi", 1e-6);
        const ManifoldSpec m = ManifoldSpec::sphere(1.0);
        auto g = sample::stream(opts.seed, detail::property_id("completeness"), 0);
        const DiscretePath path = sample::smooth_path(m, g, 64, 0.8);
        const PathTangentField V = sample::smooth_field(path, g, 1.0);
        const Worldsheet sheet = pathspace_geodesic(V, Interval{0.0, 20.0 * std::numbers::pi}, 640);
        double worst = 0.0;
        for (std::size_t j = 1; j < sheet.s_count(); ++j)
            for (std::size_t i = 0; i < sheet.t_count(); ++i)
                worst = std::max(worst, std::abs(sheet.point(j, i).norm() - 1.0) / sheet.s_nodes()[j]);
        complete.add(worst);
        complete.add(geodesic_residual(sheet) > 1e-4 ? std::numeric_limits<double>::infinity() : 0.0);
        out.push_back(complete.finish());
    }

    {
        Tally ineq(suite, "energy_length_inequality", 1e-6);
        const std::uint64_t pid = detail::property_id("energy_length");
        ineq.run(100, [&](std::size_t k) {
            auto g = sample::stream(opts.seed, pid, k);
            const ManifoldSpec& m = manifolds[k % manifolds.size()];
            DiscretePath path = sample::smooth_path(m, g, 64, 1.0, 0.0);
            // Jitter the samples so the velocity is far from constant.
            std::vector<Vec> xs = path.samples();
            for (Vec& x : xs) x = m.canonical_point(m.exp(x, sample::tangent(m, x, g, 0.05)));
            const DiscretePath rough(m, xs, 0.0);
            const double L = arc_length(rough);
            return std::max(0.0, L * L - 2.0 * path_energy(rough));
        });
        out.push_back(ineq.finish());
    }
    return out;
}

// ---------------------------------------------------------------------------

inline std::vector<PropertyResult> backtrack_suite(const CheckOptions& opts) {
    using detail::Tally;
    const std::string suite = "backtrack";
    std::vector<PropertyResult> out;
    const auto manifolds = sample::standard_manifolds();

    for (const ManifoldSpec& m : manifolds) {
        const std::string tag = m.name();
        const double bound = m.is_flat() ? 0.0 : 1e-9;
        Tally preserve(suite, "exp_preserves_windows[" + tag + "]", bound);
        const std::uint64_t pid = detail::property_id("preserve" + tag);
        preserve.run(5, [&](std::size_t k) {
            auto g = sample::stream(opts.seed, pid, k);
            sample::SpurFixture fx = sample::spur_fixture(m, g);
            const std::size_t T = fx.window.T, sigma = fx.window.sigma;
            PathTangentField field = fx.field;
            if (opts.corrupt_reflection) {
                std::vector<Vec> xs = field.base().samples();
                const std::size_t i = fx.window.end() - 1;
                xs[i] = m.canonical_point(m.exp(xs[i], sample::tangent(m, xs[i], g, 1e-3) + Vec(m.tangent_basis(xs[i])[0] * 1e-3)));
                field = PathTangentField(DiscretePath(m, xs, field.base().collar()),
                                         std::vector<Vec>(field.vectors()));
                std::vector<Vec> vs = field.vectors();
                vs[i] = m.tangent_projection(xs[i], vs[i]);
                field = PathTangentField(field.base(), vs);
            }
            const Worldsheet sheet = pathspace_geodesic(field, Interval{-0.5, 1.0}, 6);
            double worst = 0.0;
            for (std::size_t j = 0; j < sheet.s_count(); ++j) {
                const DiscretePath slice = sheet.longitudinal(j); // validates the collar
                for (std::size_t u = 0; u <= sigma; ++u) {
                    const Vec& a = slice[T + u];
                    const Vec& b = slice[T + 2 * sigma - u];
                    worst = std::max(worst, m.is_flat() ? detail::max_abs_diff(a, b) : m.dist(a, b));
                }
                const auto ws = detect_backtracks(slice, std::max(bound, 1e-12));
                if (std::find(ws.begin(), ws.end(), fx.window) == ws.end())
                    worst = std::max(worst, std::numeric_limits<double>::infinity());
            }
            return worst;
        });
        if (opts.corrupt_reflection) preserve.note("corrupted reflection fixture (negative control)");
        out.push_back(preserve.finish());

        Tally split(suite, "split_geodesic[" + tag + "]", 1e-9);
        const std::uint64_t sid = detail::property_id("split" + tag);
        split.run(10, [&](std::size_t k) {
            auto g = sample::stream(opts.seed, sid, k);
            const DiscretePath p1 = sample::smooth_path(m, g, 64, 0.8);
            const PathTangentField X1 = sample::smooth_field(p1, g, 0.5);
            const DiscretePath p2 = sample::smooth_path(m, g, 64, 0.8, kDefaultCollar, p1.back());
            const PathTangentField X2 = sample::smooth_field(p2, g, 0.5, X1.vectors().back());
            const PathTangentField X = concatenate(X1, X2);
            const Interval iv{0.0, 1.0};
            const Worldsheet whole = pathspace_geodesic(X, iv, 8);
            const Worldsheet first = pathspace_geodesic(X1, iv, 8);
            const Worldsheet second = pathspace_geodesic(X2, iv, 8);
            double worst = 0.0;
            for (std::size_t j = 0; j < whole.s_count(); ++j)
                worst = std::max(worst, max_node_distance(whole.longitudinal(j),
                                                          concatenate(first.longitudinal(j), second.longitudinal(j))));
            return worst;
        });
        out.push_back(split.finish());

        Tally descend(suite, "equivalence_descends_through_exp[" + tag + "]", 0.0);
        const std::uint64_t did = detail::property_id("descend" + tag);
        descend.run(5, [&](std::size_t k) {
            auto g = sample::stream(opts.seed, did, k);
            const sample::SpurFixture fx = sample::spur_fixture(m, g);
            // The same pair with the retrace deleted node by node.
            std::vector<Vec> xs, vs;
            for (std::size_t i = 0; i < fx.field.size(); ++i) {
                if (i > fx.window.T && i <= fx.window.end()) continue;
                xs.push_back(fx.field.base()[i]);
                vs.push_back(fx.field[i]);
            }
            const PathTangentField short_field(DiscretePath(m, xs, kDefaultCollar * 0.5), vs);
            const std::vector<double> s{0.25, 0.5, 1.0};
            const Worldsheet A = pathspace_geodesic(fx.field, s);
            const Worldsheet B = pathspace_geodesic(short_field, s);
            for (std::size_t j = 0; j < s.size(); ++j)
                if (!bt_equivalent(A.longitudinal(j), B.longitudinal(j), 1e-5)) return 1.0;
            return 0.0;
        });
        out.push_back(descend.finish());

        Tally idem(suite, "canonical_form_idempotent[" + tag + "]", 1e-9);
        const std::uint64_t iid = detail::property_id("idempotent" + tag);
        idem.run(10, [&](std::size_t k) {
            auto g = sample::stream(opts.seed, iid, k);
            const DiscretePath p = k % 2 == 0 ? sample::smooth_path(m, g, 128, 1.0)
                                              : sample::spur_fixture(m, g, 128, 30, 20).field.base();
            const DiscretePath c1 = canonical_form(p);
            return max_node_distance(canonical_form(c1), c1);
        });
        out.push_back(idem.finish());

        Tally reparam(suite, "reparametrization_invariance[" + tag + "]", 1e-6);
        const std::uint64_t rid = detail::property_id("reparam" + tag);
        reparam.run(10, [&](std::size_t k) {
            auto g = sample::stream(opts.seed, rid, k);
            // Geodesic polygon with vertices on grid nodes; phi fixes the vertices.
            const std::size_t n = 256, c = n / 16;
            const std::size_t corners[] = {c, 80, 150, n - c};
            std::vector<Vec> vert{sample::point(m, g)};
            for (int q = 0; q < 3; ++q)
                vert.push_back(m.canonical_point(
                    m.exp(vert.back(), sample::tangent(m, vert.back(), g, detail::sample_speed(m, 0.8) / 2.0))));
            std::vector<Vec> xs(n + 1);
            for (std::size_t i = 0; i <= n; ++i) {
                if (i <= corners[0]) { xs[i] = vert[0]; continue; }
                if (i >= corners[3]) { xs[i] = vert[3]; continue; }
                std::size_t q = 0;
                while (i > corners[q + 1]) ++q;
                const double lam = static_cast<double>(i - corners[q]) / static_cast<double>(corners[q + 1] - corners[q]);
                xs[i] = pathgeo::detail::geodesic_interpolate(m, vert[q], vert[q + 1], lam);
            }
            const DiscretePath poly(m, xs, kDefaultCollar);
            const double amp = sample::uniform(g, 0.2, 0.9);
            auto phi = [&](double t) {
                const double tc[] = {corners[0] / double(n), corners[1] / double(n), corners[2] / double(n),
                                     corners[3] / double(n)};
                if (t <= tc[0] || t >= tc[3]) return t;
                std::size_t q = 0;
                while (t > tc[q + 1]) ++q;
                const double u = (t - tc[q]) / (tc[q + 1] - tc[q]);
                return tc[q] + (tc[q + 1] - tc[q]) * (u + amp * std::sin(2.0 * std::numbers::pi * u) / (2.0 * std::numbers::pi));
            };
            const DiscretePath moved = resample(poly, n, phi);
            return max_node_distance(canonical_form(moved), canonical_form(poly));
        });
        out.push_back(reparam.finish());

        Tally compat(suite, "composition_compatibility[" + tag + "]", 0.0);
        const std::uint64_t cid = detail::property_id("compat" + tag);
        compat.run(5, [&](std::size_t k) {
            auto g = sample::stream(opts.seed, cid, k);
            const DiscretePath g1 = sample::smooth_path(m, g, 64, 0.8);
            const DiscretePath h1 = sample::smooth_path(m, g, 64, 0.8, kDefaultCollar, g1.back());
            const DiscretePath lam = sample::smooth_path(m, g, 32, 0.5, kDefaultCollar, g1.back());
            const DiscretePath mu = sample::smooth_path(m, g, 32, 0.5, kDefaultCollar, g1.back());
            const DiscretePath g2 = detail::with_spur(g1, lam, true);
            const DiscretePath h2 = detail::with_spur(h1, mu, false);
            if (!bt_equivalent(g1, g2, 1e-6) || !bt_equivalent(h1, h2, 1e-6)) return 1.0;
            return bt_equivalent(concatenate(g1, h1), concatenate(g2, h2), 1e-6) ? 0.0 : 1.0;
        });
        out.push_back(compat.finish());

        Tally field_err(suite, "field_reflection_violation_rejected[" + tag + "]", 0.0);
        const std::uint64_t fid = detail::property_id("field_violation" + tag);
        field_err.run(3, [&](std::size_t k) {
            auto g = sample::stream(opts.seed, fid, k);
            const sample::SpurFixture fx = sample::spur_fixture(m, g, 128, 30, 20);
            field_canonical_form(fx.field); // the intact fixture is compatible
            std::vector<Vec> vs = fx.field.vectors();
            const std::size_t i = fx.window.end() - 3;
            vs[i] = vs[i] + m.tangent_projection(fx.field.base()[i], Vec(m.tangent_basis(fx.field.base()[i])[0] * 1e-3));
            try {
                field_canonical_form(PathTangentField(fx.field.base(), vs));
            } catch (const TangentCompatibilityError&) {
                return 0.0;
            }
            return 1.0;
        });
        out.push_back(field_err.finish());
    }
    return out;
}

// ---------------------------------------------------------------------------

namespace detail {

/// A random 1-morphism at time a starting at `start` (with vector `vstart`) if given.
inline GeodMorphism1 random_morphism(const ManifoldSpec& m, sample::Rng& g, double a,
                                     std::optional<Vec> start = std::nullopt,
                                     std::optional<Vec> vstart = std::nullopt) {
    const DiscretePath p = sample::smooth_path(m, g, 16, 0.7, kDefaultCollar, start);
    const PathTangentField X = sample::smooth_field(p, g, 0.4, vstart);
    return GeodMorphism1(X, a);
}

struct CategoryConfig {
    GeodMorphism1 f1, f2, f3;
    double a, b, c, d;
};

inline CategoryConfig category_config(const ManifoldSpec& m, sample::Rng& g) {
    const double a = sample::uniform(g, -0.2, 0.2);
    const double b = a + sample::uniform(g, 0.1, 0.3);
    const double c = b + sample::uniform(g, 0.1, 0.3);
    const double d = c + sample::uniform(g, 0.1, 0.3);
    GeodMorphism1 f1 = random_morphism(m, g, a);
    GeodMorphism1 f2 = random_morphism(m, g, a, f1.path().back(), f1.field().vectors().back());
    GeodMorphism1 f3 = random_morphism(m, g, a, f2.path().back(), f2.field().vectors().back());
    return {std::move(f1), std::move(f2), std::move(f3), a, b, c, d};
}

} // namespace detail

inline std::vector<PropertyResult> category_suite(const CheckOptions& opts) {
    using detail::Tally;
    const std::string suite = "category";
    std::vector<PropertyResult> out;
    constexpr std::size_t cases = 100;
    constexpr std::size_t S = 4;

    for (const ManifoldSpec& m : sample::standard_manifolds()) {
        const std::string tag = m.name();
        const std::uint64_t pid = detail::property_id("category" + tag);
        struct Errors {
            double coherence = 0, exchange = 0, identity = 0, vassoc = 0, hassoc = 0, extension = 0, assoc1 = 0;
        };
        std::vector<Errors> errs(cases);
        std::vector<std::string> notes(cases);
        parallel_for(cases, [&](std::size_t k) {
            Errors& e = errs[k];
            try {
                auto g = sample::stream(opts.seed, pid, k);
                const detail::CategoryConfig cfg = detail::category_config(m, g);
                const GeodMorphism2 F1(cfg.f1, Interval{cfg.a, cfg.b}, S);
                const GeodMorphism2 G1(tgt2(F1), Interval{cfg.b, cfg.c}, S);
                const GeodMorphism2 H1(tgt2(G1), Interval{cfg.c, cfg.d}, S);
                const GeodMorphism2 F2(cfg.f2, Interval{cfg.a, cfg.b}, S);
                const GeodMorphism2 G2(tgt2(F2), Interval{cfg.b, cfg.c}, S);
                const GeodMorphism2 F3(cfg.f3, Interval{cfg.a, cfg.b}, S);

                // (i) source/target of a horizontal composite.
                const GeodMorphism2 F12 = compose2_horizontal(F1, F2);
                e.coherence = std::max(morphism_discrepancy(src2(F12), compose1(src2(F2), src2(F1))),
                                       morphism_discrepancy(tgt2(F12), compose1(tgt2(F2), tgt2(F1))));

                // (ii) exchange law.
                const ExchangeReport ex = check_exchange(F1, G1, F2, G2);
                e.exchange = ex.error.empty() ? ex.max_discrepancy : std::numeric_limits<double>::infinity();
                if (!ex.error.empty()) notes[k] = ex.error;

                // Identities.
                const GeodMorphism1 id_src = GeodMorphism1::identity(src1(cfg.f1));
                const GeodMorphism1 id_tgt = GeodMorphism1::identity(tgt1(cfg.f1));
                e.identity = std::max({morphism_discrepancy(compose1(cfg.f1, id_src), cfg.f1),
                                       morphism_discrepancy(compose1(id_tgt, cfg.f1), cfg.f1),
                                       sheet_discrepancy(compose2_vertical(F1, GeodMorphism2::identity(src2(F1))).sheet(),
                                                         F1.sheet()),
                                       sheet_discrepancy(compose2_vertical(GeodMorphism2::identity(tgt2(F1)), F1).sheet(),
                                                         F1.sheet()),
                                       sheet_discrepancy(compose2_horizontal(F1, GeodMorphism2(id_tgt, F1.sheet().s_nodes()))
                                                             .sheet(),
                                                         F1.sheet())});

                // Vertical associativity, against one integration over [a, d].
                const GeodMorphism2 GF = compose2_vertical(G1, F1);
                const GeodMorphism2 left = compose2_vertical(H1, GF);
                const GeodMorphism2 right = compose2_vertical(compose2_vertical(H1, G1), F1);
                const GeodMorphism2 direct(cfg.f1, left.sheet().s_nodes());
                e.vassoc = std::max(sheet_discrepancy(left.sheet(), right.sheet()),
                                    sheet_discrepancy(left.sheet(), direct.sheet()));

                // Horizontal associativity.
                const GeodMorphism2 h_left = compose2_horizontal(F12, F3);
                const GeodMorphism2 h_right = compose2_horizontal(F1, compose2_horizontal(F2, F3));
                e.hassoc = sheet_discrepancy(h_left.sheet(), h_right.sheet());

                // Vertical composite restricted to each part.
                double ext = 0.0;
                for (const GeodMorphism2* part : {&F1, &G1}) {
                    if (part->sheet().t_count() != GF.sheet().t_count()) {
                        ext = std::numeric_limits<double>::infinity();
                        continue;
                    }
                    for (std::size_t j = 0; j < part->sheet().s_count(); ++j) {
                        const auto jj = GF.sheet().find_node(part->sheet().s_nodes()[j]);
                        if (!jj) {
                            ext = std::numeric_limits<double>::infinity();
                            continue;
                        }
                        for (std::size_t i = 0; i < GF.sheet().t_count(); ++i)
                            ext = std::max({ext, m.dist(GF.sheet().point(*jj, i), part->sheet().point(j, i)),
                                            (GF.sheet().velocity(*jj, i) - part->sheet().velocity(j, i)).norm()});
                    }
                }
                e.extension = ext;

                // compose1 associativity.
                e.assoc1 = morphism_discrepancy(compose1(cfg.f3, compose1(cfg.f2, cfg.f1)),
                                                compose1(compose1(cfg.f3, cfg.f2), cfg.f1));
            } catch (const std::exception& ex) {
                notes[k] = ex.what();
                e = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
                     std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
                     std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
                     std::numeric_limits<double>::infinity()};
            }
        });
        Tally coh(suite, "src_tgt_coherence[" + tag + "]", 1e-9);
        Tally exch(suite, "exchange_law[" + tag + "]", 1e-9);
        Tally ids(suite, "identity_laws[" + tag + "]", 1e-9);
        Tally va(suite, "vertical_associativity[" + tag + "]", 1e-9);
        Tally ha(suite, "horizontal_associativity[" + tag + "]", 1e-9);
        Tally vx(suite, "vertical_is_extension[" + tag + "]", 1e-9);
        Tally a1(suite, "compose1_associativity[" + tag + "]", 1e-9);
        std::string note;
        for (std::size_t k = 0; k < cases; ++k) {
            coh.add(errs[k].coherence);
            exch.add(errs[k].exchange);
            ids.add(errs[k].identity);
            va.add(errs[k].vassoc);
            ha.add(errs[k].hassoc);
            vx.add(errs[k].extension);
            a1.add(errs[k].assoc1);
            if (note.empty() && !notes[k].empty()) note = "case " + std::to_string(k) + ": " + notes[k];
        }
        for (Tally* t : {&coh, &exch, &ids, &va, &ha, &vx, &a1}) {
            if (!note.empty()) t->note(note);
            out.push_back(t->finish());
        }
    }
    return out;
}

/// Runs one suite by name, or all of them for "all". Throws DomainError for an
/// unknown or empty name.
inline CheckReport run_checks(const std::string& suite, const CheckOptions& opts = {}) {
    if (suite.empty()) throw DomainError("no check suite selected");
    std::vector<std::string> selected;
    if (suite == "all") selected = suite_names();
    else if (std::find(suite_names().begin(), suite_names().end(), suite) != suite_names().end())
        selected = {suite};
    else throw DomainError("unknown check suite \"" + suite + "\"");
    CheckReport report;
    report.seed = opts.seed;
    for (const std::string& s : selected) {
        const auto t0 = std::chrono::steady_clock::now();
        std::vector<PropertyResult> r;
        if (s == "manifold") r = manifold_suite(opts);
        else if (s == "pathspace") r = pathspace_suite(opts);
        else if (s == "backtrack") r = backtrack_suite(opts);
        else r = category_suite(opts);
        report.results.insert(report.results.end(), r.begin(), r.end());
        report.suite_seconds.emplace_back(
            s, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    return report;
}

} // namespace pathgeo::checks

#endif // PATHGEO_CHECKS_HPP
