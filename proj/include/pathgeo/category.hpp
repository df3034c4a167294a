#ifndef PATHGEO_CATEGORY_HPP
#define PATHGEO_CATEGORY_HPP

#include "pathgeo/backtrack.hpp"
#include "pathgeo/pathspace.hpp"

#include <algorithm>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace pathgeo {

/// Tolerance for deciding that two seeds are the same (vertical composability).
inline constexpr double kSeedTolerance = 1e-6;

/// Object (p, X, a) of the geodesic category.
struct GeodObject {
    ManifoldPoint point;
    TangentVector vector;
    double time;

    GeodObject(ManifoldPoint p, TangentVector v, double a) : point(std::move(p)), vector(std::move(v)), time(a) {
        detail::require_same_point(point, vector.base, "GeodObject");
    }
};

/// 1-morphism (gamma, X, a). The stored representative is the joint reduced
/// form of (gamma, X): retraces erased, pauses merged, packed on a dyadic grid.
/// Equal classes built from the same data therefore share one representative.
class GeodMorphism1 {
public:
    GeodMorphism1(const PathTangentField& field, double time, double tol = kDefaultBacktrackTolerance)
        : field_(reduced_form(field, tol)), time_(time) {}

    static GeodMorphism1 identity(const GeodObject& object) {
        const DiscretePath path = DiscretePath::constant(object.point.manifold, object.point.coords, 16);
        std::vector<Vec> vs(path.size(), object.vector.components);
        return GeodMorphism1(PathTangentField(path, std::move(vs)), object.time);
    }

    const DiscretePath& path() const { return field_.base(); }
    const PathTangentField& field() const { return field_; }
    const ManifoldSpec& manifold() const { return field_.manifold(); }
    double time() const { return time_; }

private:
    PathTangentField field_;
    double time_;
};

inline GeodObject src1(const GeodMorphism1& f) {
    return GeodObject(f.path().point(0), f.field().at(0), f.time());
}

inline GeodObject tgt1(const GeodMorphism1& f) {
    const std::size_t n = f.path().segments();
    return GeodObject(f.path().point(n), f.field().at(n), f.time());
}

/// g after f: f's path and field first, then g's.
inline GeodMorphism1 compose1(const GeodMorphism1& g, const GeodMorphism1& f) {
    if (!(f.manifold() == g.manifold()))
        throw ComposabilityError("compose1: morphisms live on different manifolds", ComposabilityCondition::path_endpoint);
    const ManifoldSpec& m = f.manifold();
    const Vec& p_end = f.path().back();
    const Vec& p_start = g.path().front();
    if (m.dist(p_end, p_start) > kBaseTolerance)
        throw ComposabilityError("compose1: target point of f differs from source point of g",
                                 ComposabilityCondition::path_endpoint);
    const Vec& x_end = f.field().vectors().back();
    const Vec& x_start = g.field().vectors().front();
    if ((x_end - x_start).norm() > kBaseTolerance * (1.0 + x_end.norm()))
        throw ComposabilityError("compose1: target vector of f differs from source vector of g",
                                 ComposabilityCondition::field_endpoint);
    if (f.time() != g.time())
        throw ComposabilityError("compose1: morphisms carry different times", ComposabilityCondition::time);
    std::vector<Vec> xs(f.path().samples());
    std::vector<Vec> vs(f.field().vectors());
    xs.insert(xs.end(), g.path().samples().begin() + 1, g.path().samples().end());
    vs.insert(vs.end(), g.field().vectors().begin() + 1, g.field().vectors().end());
    // The joined grid is only an intermediate; reduction repacks it.
    const std::size_t n = xs.size() - 1;
    const double collar = std::min(f.path().collar_nodes(), g.path().collar_nodes()) / static_cast<double>(n);
    return GeodMorphism1(PathTangentField(DiscretePath(m, std::move(xs), collar), std::move(vs)), f.time());
}

/// Node-wise discrepancy of two 1-morphism representatives: the largest point
/// distance or vector difference. Infinite when the times or grids differ.
inline double morphism_discrepancy(const GeodMorphism1& a, const GeodMorphism1& b) {
    if (!(a.manifold() == b.manifold()) || a.time() != b.time() || a.path().segments() != b.path().segments())
        return std::numeric_limits<double>::infinity();
    const ManifoldSpec& m = a.manifold();
    double worst = 0.0;
    for (std::size_t i = 0; i < a.path().size(); ++i) {
        worst = std::max(worst, m.dist(a.path()[i], b.path()[i]));
        worst = std::max(worst, (a.field()[i] - b.field()[i]).norm());
    }
    return worst;
}

/// 2-morphism: the path-space geodesic seeded by a 1-morphism, sampled on
/// s-nodes spanning [a, b]. The seed's time is where the sheet equals the seed.
class GeodMorphism2 {
public:
    GeodMorphism2(GeodMorphism1 seed, std::vector<double> s_nodes, int steps_per_unit = kDefaultStepsPerUnit)
        : seed_(std::move(seed)), steps_per_unit_(steps_per_unit),
          sheet_(pathspace_geodesic(seed_.field(), std::move(s_nodes), {steps_per_unit, seed_.time()})) {}

    GeodMorphism2(GeodMorphism1 seed, Interval interval, std::size_t S = kDefaultSheetSegments,
                  int steps_per_unit = kDefaultStepsPerUnit)
        : GeodMorphism2(std::move(seed), uniform_nodes(interval, S), steps_per_unit) {}

    /// Identity on a 1-morphism: the degenerate segment [a, a].
    static GeodMorphism2 identity(const GeodMorphism1& f, int steps_per_unit = kDefaultStepsPerUnit) {
        return GeodMorphism2(f, std::vector<double>{f.time()}, steps_per_unit);
    }

    const GeodMorphism1& seed() const { return seed_; }
    const Worldsheet& sheet() const { return sheet_; }
    Interval interval() const { return sheet_.interval(); }
    int steps_per_unit() const { return steps_per_unit_; }
    bool is_identity() const { return sheet_.s_count() == 1; }

private:
    GeodMorphism1 seed_;
    int steps_per_unit_;
    Worldsheet sheet_;
};

/// (Gamma(a), Gamma'(a), a).
inline GeodMorphism1 src2(const GeodMorphism2& F) {
    return GeodMorphism1(F.sheet().longitudinal_velocity(0), F.interval().a);
}

/// (Gamma(b), Gamma'(b), b).
inline GeodMorphism1 tgt2(const GeodMorphism2& F) {
    return GeodMorphism1(F.sheet().longitudinal_velocity(F.sheet().s_count() - 1), F.interval().b);
}

namespace detail {

inline std::vector<double> merge_nodes(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> out;
    out.reserve(a.size() + b.size());
    std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

} // namespace detail

/// G after F in the s-direction: F on [a, b], G on [b, c]. The result is the
/// single segment on [a, c] integrated from F's seed, sampled on both grids.
inline GeodMorphism2 compose2_vertical(const GeodMorphism2& G, const GeodMorphism2& F) {
    if (F.interval().b != G.interval().a)
        throw ComposabilityError("compose2_vertical: intervals do not meet", ComposabilityCondition::interval);
    if (F.steps_per_unit() != G.steps_per_unit())
        throw ComposabilityError("compose2_vertical: different integration grids", ComposabilityCondition::grid);
    const double mismatch = morphism_discrepancy(tgt2(F), src2(G));
    if (!(mismatch <= kSeedTolerance))
        throw ComposabilityError("compose2_vertical: target of F differs from source of G (discrepancy " +
                                     std::to_string(mismatch) + ")",
                                 ComposabilityCondition::seed);
    const GeodMorphism1& seed = F.is_identity() ? G.seed() : F.seed();
    return GeodMorphism2(seed, detail::merge_nodes(F.sheet().s_nodes(), G.sheet().s_nodes()), F.steps_per_unit());
}

/// F beside G in the t-direction over the same interval: seeded by compose1(G.seed, F.seed).
inline GeodMorphism2 compose2_horizontal(const GeodMorphism2& F, const GeodMorphism2& G) {
    if (F.interval().a != G.interval().a || F.interval().b != G.interval().b)
        throw ComposabilityError("compose2_horizontal: intervals differ", ComposabilityCondition::interval);
    if (F.steps_per_unit() != G.steps_per_unit())
        throw ComposabilityError("compose2_horizontal: different integration grids", ComposabilityCondition::grid);
    const std::vector<double>& sf = F.sheet().s_nodes();
    const std::vector<double>& sg = G.sheet().s_nodes();
    return GeodMorphism2(compose1(G.seed(), F.seed()), sf == sg ? sf : detail::merge_nodes(sf, sg),
                         F.steps_per_unit());
}

struct SheetNode {
    std::size_t s_index;
    std::size_t t_index;
};

/// Largest node-wise discrepancy (point distance or velocity difference) of two
/// sheets on identical grids; infinite otherwise.
inline double sheet_discrepancy(const Worldsheet& A, const Worldsheet& B, SheetNode* worst = nullptr) {
    if (!(A.manifold() == B.manifold()) || A.s_nodes() != B.s_nodes() || A.t_count() != B.t_count())
        return std::numeric_limits<double>::infinity();
    const ManifoldSpec& m = A.manifold();
    double best = 0.0;
    for (std::size_t j = 0; j < A.s_count(); ++j) {
        for (std::size_t i = 0; i < A.t_count(); ++i) {
            const double d = std::max(m.dist(A.point(j, i), B.point(j, i)),
                                      (A.velocity(j, i) - B.velocity(j, i)).norm());
            if (d > best) {
                best = d;
                if (worst) *worst = {j, i};
            }
        }
    }
    return best;
}

struct ExchangeReport {
    bool passed = false;
    double max_discrepancy = std::numeric_limits<double>::infinity();
    std::optional<SheetNode> failing_node;
    std::string error;
};

/// Compares (G1 * F1) *_H (G2 * F2) with (G1 *_H G2) * (F1 *_H F2). Composability
/// failures are reported rather than thrown.
inline ExchangeReport check_exchange(const GeodMorphism2& F1, const GeodMorphism2& G1, const GeodMorphism2& F2,
                                     const GeodMorphism2& G2, double tol = 1e-9) {
    ExchangeReport report;
    try {
        const GeodMorphism2 lhs = compose2_horizontal(compose2_vertical(G1, F1), compose2_vertical(G2, F2));
        const GeodMorphism2 rhs = compose2_vertical(compose2_horizontal(G1, G2), compose2_horizontal(F1, F2));
        SheetNode worst{0, 0};
        report.max_discrepancy = sheet_discrepancy(lhs.sheet(), rhs.sheet(), &worst);
        report.passed = report.max_discrepancy <= tol;
        if (!report.passed) report.failing_node = worst;
    } catch (const ComposabilityError& e) {
        report.error = std::string(to_string(e.condition())) + ": " + e.what();
    } catch (const Error& e) {
        report.error = e.what();
    }
    return report;
}

} // namespace pathgeo

#endif // PATHGEO_CATEGORY_HPP
