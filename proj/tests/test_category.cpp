#include "pathgeo/pathgeo.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace pathgeo;

namespace {

Vec v2(double a, double b) {
    Vec v(2);
    v << a, b;
    return v;
}

Vec v3(double a, double b, double c) {
    Vec v(3);
    v << a, b, c;
    return v;
}

const ManifoldSpec plane = ManifoldSpec::euclidean(2);

GeodMorphism1 segment(const Vec& from, const Vec& to, const Vec& field, double time = 0.0) {
    return GeodMorphism1(PathTangentField::constant(line_path(plane, from, to, 64), field), time);
}

void expect_object(const GeodObject& o, const Vec& p, const Vec& x, double a) {
    EXPECT_LE((o.point.coords - p).norm(), 1e-12);
    EXPECT_LE((o.vector.components - x).norm(), 1e-12);
    EXPECT_EQ(o.time, a);
}

ComposabilityCondition condition_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const ComposabilityError& e) {
        return e.condition();
    }
    ADD_FAILURE() << "expected a composability error";
    return ComposabilityCondition::grid;
}

} // namespace

// ---- objects and 1-morphisms -------------------------------------------------------

TEST(GeodObject, RequiresVectorAtThePoint) {
    const ManifoldPoint p(plane, v2(0, 0)), q(plane, v2(1, 0));
    EXPECT_THROW(GeodObject(p, TangentVector(q, v2(0, 1)), 0.0), DomainError);
}

TEST(Morphism1, IdentitySourceEqualsTarget) {
    const ManifoldSpec s = ManifoldSpec::sphere(1.0);
    const ManifoldPoint p(s, v3(0, 0, 1));
    const GeodMorphism1 id = GeodMorphism1::identity(GeodObject(p, TangentVector(p, v3(0.5, 0, 0)), 2.5));
    expect_object(src1(id), v3(0, 0, 1), v3(0.5, 0, 0), 2.5);
    expect_object(tgt1(id), v3(0, 0, 1), v3(0.5, 0, 0), 2.5);
}

TEST(Morphism1, EndpointReadout) {
    const GeodMorphism1 f = segment(v2(0, 0), v2(1, 0), v2(0, 1));
    expect_object(src1(f), v2(0, 0), v2(0, 1), 0.0);
    expect_object(tgt1(f), v2(1, 0), v2(0, 1), 0.0);
}

TEST(Morphism1, RepresentativeIsReduced) {
    const GeodMorphism1 f = segment(v2(0, 0), v2(1, 0), v2(0, 1));
    EXPECT_TRUE(detect_backtracks(f.path()).empty());
    EXPECT_EQ(f.path().segments() & (f.path().segments() - 1), 0u);
    // Spurred input is reduced to a back-track free path in the same class.
    const DiscretePath p = line_path(plane, v2(0, 0), v2(1, 0), 64);
    const DiscretePath lam = line_path(plane, v2(1, 0), v2(1, 1), 64);
    const DiscretePath spurred = concatenate(p, concatenate(lam, reverse(lam)));
    const GeodMorphism1 g(PathTangentField::constant(spurred, v2(0, 1)), 0.0);
    EXPECT_TRUE(detect_backtracks(g.path()).empty());
    EXPECT_TRUE(bt_equivalent(f.path(), g.path(), 1e-9));
    for (const Vec& x : g.path().samples()) EXPECT_LE(std::abs(x[1]), 1e-12);
    for (const Vec& v : g.field().vectors()) EXPECT_EQ(v, v2(0, 1));
}

TEST(Compose1, CollinearSegmentsJoin) {
    const GeodMorphism1 f = segment(v2(0, 0), v2(1, 0), v2(0, 1));
    const GeodMorphism1 g = segment(v2(1, 0), v2(2, 0), v2(0, 1));
    const GeodMorphism1 gf = compose1(g, f);
    expect_object(src1(gf), v2(0, 0), v2(0, 1), 0.0);
    expect_object(tgt1(gf), v2(2, 0), v2(0, 1), 0.0);
    double x = 0.0;
    for (std::size_t i = 0; i < gf.path().size(); ++i) {
        EXPECT_EQ(gf.path()[i][1], 0.0);
        EXPECT_GE(gf.path()[i][0], x);
        x = gf.path()[i][0];
        EXPECT_EQ(gf.field()[i], v2(0, 1));
    }
    EXPECT_NEAR(arc_length(gf.path()), 2.0, 1e-12);
}

TEST(Compose1, SourceOfCompositeIsSourceOfFirst) {
    for (const auto& m : sample::standard_manifolds()) {
        for (std::uint64_t k = 0; k < 10; ++k) {
            auto rng = sample::stream(51, 1, k);
            const auto cfg = checks::detail::category_config(m, rng);
            const GeodMorphism1 gf = compose1(cfg.f2, cfg.f1);
            EXPECT_LE(m.dist(src1(gf).point.coords, src1(cfg.f1).point.coords), 1e-12);
            EXPECT_LE((src1(gf).vector.components - src1(cfg.f1).vector.components).norm(), 1e-12);
            EXPECT_LE(m.dist(tgt1(gf).point.coords, tgt1(cfg.f2).point.coords), 1e-12);
        }
    }
}

TEST(Compose1, IdentitiesAreNeutral) {
    const GeodMorphism1 f = segment(v2(0, 0), v2(1, 1), v2(0.3, -0.2), 1.0);
    EXPECT_LE(morphism_discrepancy(compose1(f, GeodMorphism1::identity(src1(f))), f), 1e-9);
    EXPECT_LE(morphism_discrepancy(compose1(GeodMorphism1::identity(tgt1(f)), f), f), 1e-9);
}

TEST(Compose1, AssociativeOnRandomTriples) {
    for (const auto& m : sample::standard_manifolds()) {
        for (std::uint64_t k = 0; k < 10; ++k) {
            auto rng = sample::stream(51, 2, k);
            const auto cfg = checks::detail::category_config(m, rng);
            EXPECT_LE(morphism_discrepancy(compose1(cfg.f3, compose1(cfg.f2, cfg.f1)),
                                           compose1(compose1(cfg.f3, cfg.f2), cfg.f1)),
                      1e-6)
                << m.name();
        }
    }
}

TEST(Compose1, ReportsWhichConditionFailed) {
    const GeodMorphism1 f = segment(v2(0, 0), v2(1, 0), v2(0, 1));
    EXPECT_EQ(condition_of([&] { compose1(segment(v2(2, 0), v2(3, 0), v2(0, 1)), f); }),
              ComposabilityCondition::path_endpoint);
    EXPECT_EQ(condition_of([&] { compose1(segment(v2(1, 0), v2(2, 0), v2(1, 1)), f); }),
              ComposabilityCondition::field_endpoint);
    EXPECT_EQ(condition_of([&] { compose1(segment(v2(1, 0), v2(2, 0), v2(0, 1), 1.0), f); }),
              ComposabilityCondition::time);
}

// ---- 2-morphisms -----------------------------------------------------------------------

TEST(Morphism2, ZeroFieldSourceAndTarget) {
    const GeodMorphism1 f = segment(v2(0, 0), v2(1, 0), v2(0, 0));
    const GeodMorphism2 F(f, Interval{0.5, 2.0}, 8);
    const GeodMorphism1 S = src2(F), T = tgt2(F);
    EXPECT_EQ(S.time(), 0.5);
    EXPECT_EQ(T.time(), 2.0);
    EXPECT_LE(max_node_distance(S.path(), T.path()), 0.0);
    for (const Vec& v : T.field().vectors()) EXPECT_EQ(v.norm(), 0.0);
}

TEST(Morphism2, UnitSquareSourceAndTarget) {
    const GeodMorphism1 f = segment(v2(0, 0), v2(1, 0), v2(0, 1));
    const GeodMorphism2 F(f, Interval{0, 1}, 8);
    const GeodMorphism1 S = src2(F), T = tgt2(F);
    EXPECT_EQ(S.time(), 0.0);
    EXPECT_EQ(T.time(), 1.0);
    EXPECT_LE(morphism_discrepancy(S, f), 1e-12);
    expect_object(src1(T), v2(0, 1), v2(0, 1), 1.0);
    expect_object(tgt1(T), v2(1, 1), v2(0, 1), 1.0);
    for (std::size_t i = 0; i < T.path().size(); ++i) {
        EXPECT_NEAR(T.path()[i][1], 1.0, 1e-12);
        EXPECT_NEAR((T.field()[i] - v2(0, 1)).norm(), 0.0, 1e-12);
    }
}

TEST(Morphism2, TargetPathIsExpOfRescaledSeed) {
    for (const auto& m : sample::standard_manifolds()) {
        auto rng = sample::stream(51, 3, 0);
        const GeodMorphism1 f = checks::detail::random_morphism(m, rng, 0.0);
        const double b = 0.7;
        const GeodMorphism2 F(f, Interval{0, b}, 8);
        std::vector<Vec> scaled;
        for (const Vec& v : f.field().vectors()) scaled.push_back(b * v);
        const DiscretePath e = pathspace_exp(PathTangentField(f.path(), scaled));
        EXPECT_LE(max_node_distance(tgt2(F).path(), e), 1e-6) << m.name();
    }
}

TEST(Morphism2, IdentityIsDegenerate) {
    const GeodMorphism1 f = segment(v2(0, 0), v2(1, 0), v2(0, 1), 0.25);
    const GeodMorphism2 id = GeodMorphism2::identity(f);
    EXPECT_TRUE(id.is_identity());
    EXPECT_EQ(id.interval().a, 0.25);
    EXPECT_EQ(id.interval().b, 0.25);
    EXPECT_LE(morphism_discrepancy(src2(id), f), 0.0);
    EXPECT_LE(morphism_discrepancy(tgt2(id), f), 0.0);
}

// ---- vertical composition -------------------------------------------------------------------

TEST(Compose2Vertical, ExtensionMatchesBothParts) {
    const auto m = ManifoldSpec::sphere(1.0);
    auto rng = sample::stream(51, 4, 0);
    const GeodMorphism1 f = checks::detail::random_morphism(m, rng, 0.0);
    const GeodMorphism2 F(f, Interval{0, 1}, 8);
    const GeodMorphism2 G(tgt2(F), Interval{1, 2}, 8);
    const GeodMorphism2 GF = compose2_vertical(G, F);
    EXPECT_EQ(GF.interval().a, 0.0);
    EXPECT_EQ(GF.interval().b, 2.0);
    for (const GeodMorphism2* part : {&F, &G}) {
        for (std::size_t j = 0; j < part->sheet().s_count(); ++j) {
            const auto jj = GF.sheet().find_node(part->sheet().s_nodes()[j]);
            ASSERT_TRUE(jj.has_value());
            for (std::size_t i = 0; i < GF.sheet().t_count(); ++i) {
                EXPECT_LE(m.dist(GF.sheet().point(*jj, i), part->sheet().point(j, i)), 1e-9);
                EXPECT_LE((GF.sheet().velocity(*jj, i) - part->sheet().velocity(j, i)).norm(), 1e-9);
            }
        }
    }
}

TEST(Compose2Vertical, IdentityIsNeutral) {
    const GeodMorphism1 f = segment(v2(0, 0), v2(1, 0), v2(0.2, 1));
    const GeodMorphism2 F(f, Interval{0, 1}, 8);
    EXPECT_EQ(sheet_discrepancy(compose2_vertical(F, GeodMorphism2::identity(src2(F))).sheet(), F.sheet()), 0.0);
    EXPECT_EQ(sheet_discrepancy(compose2_vertical(GeodMorphism2::identity(tgt2(F)), F).sheet(), F.sheet()), 0.0);
}

TEST(Compose2Vertical, AssociativeAgainstSingleIntegration) {
    for (const auto& m : sample::standard_manifolds()) {
        auto rng = sample::stream(51, 5, 0);
        const auto cfg = checks::detail::category_config(m, rng);
        const GeodMorphism2 F(cfg.f1, Interval{cfg.a, cfg.b}, 4);
        const GeodMorphism2 G(tgt2(F), Interval{cfg.b, cfg.c}, 4);
        const GeodMorphism2 H(tgt2(G), Interval{cfg.c, cfg.d}, 4);
        const GeodMorphism2 left = compose2_vertical(compose2_vertical(H, G), F);
        const GeodMorphism2 right = compose2_vertical(H, compose2_vertical(G, F));
        const GeodMorphism2 direct(cfg.f1, uniform_nodes({cfg.a, cfg.d}, 1));
        EXPECT_LE(sheet_discrepancy(left.sheet(), right.sheet()), 1e-9) << m.name();
        // The oracle integrates once over [a, d]; compare the shared end slice.
        const std::size_t last = left.sheet().s_count() - 1;
        for (std::size_t i = 0; i < direct.sheet().t_count(); ++i)
            EXPECT_LE(m.dist(left.sheet().point(last, i), direct.sheet().point(1, i)), 1e-9) << m.name();
    }
}

TEST(Compose2Vertical, RejectsMismatchedSeedsAndIntervals) {
    const GeodMorphism1 f = segment(v2(0, 0), v2(1, 0), v2(0, 1));
    const GeodMorphism2 F(f, Interval{0, 1}, 4);
    const GeodMorphism2 wrong(segment(v2(0, 1), v2(1, 1), v2(0, 2), 1.0), Interval{1, 2}, 4);
    EXPECT_EQ(condition_of([&] { compose2_vertical(wrong, F); }), ComposabilityCondition::seed);
    const GeodMorphism2 gap(tgt2(F), Interval{1.5, 2}, 4);
    EXPECT_EQ(condition_of([&] { compose2_vertical(gap, F); }), ComposabilityCondition::interval);
}

// ---- horizontal composition -----------------------------------------------------------------

TEST(Compose2Horizontal, IdentitySeededSheetIsNeutral) {
    for (const auto& m : sample::standard_manifolds()) {
        auto rng = sample::stream(51, 6, 0);
        const GeodMorphism1 f = checks::detail::random_morphism(m, rng, 0.0);
        const GeodMorphism2 F(f, Interval{0, 1}, 4);
        const GeodMorphism2 I(GeodMorphism1::identity(tgt1(f)), F.sheet().s_nodes());
        EXPECT_LE(sheet_discrepancy(compose2_horizontal(F, I).sheet(), F.sheet()), 1e-9) << m.name();
    }
}

TEST(Compose2Horizontal, FlatCollinearSheets) {
    const GeodMorphism2 F(segment(v2(0, 0), v2(1, 0), v2(0, 1)), Interval{0, 1}, 4);
    const GeodMorphism2 G(segment(v2(1, 0), v2(2, 0), v2(0, 1)), Interval{0, 1}, 4);
    const GeodMorphism2 FG = compose2_horizontal(F, G);
    const Worldsheet& w = FG.sheet();
    for (std::size_t j = 0; j < w.s_count(); ++j) {
        double x = -1.0;
        for (std::size_t i = 0; i < w.t_count(); ++i) {
            EXPECT_NEAR(w.point(j, i)[1], w.s_nodes()[j], 1e-9);
            EXPECT_NEAR((w.velocity(j, i) - v2(0, 1)).norm(), 0.0, 1e-9);
            EXPECT_GE(w.point(j, i)[0], x);
            x = w.point(j, i)[0];
        }
        EXPECT_NEAR(w.point(j, 0)[0], 0.0, 1e-12);
        EXPECT_NEAR(w.point(j, w.t_count() - 1)[0], 2.0, 1e-12);
    }
}

TEST(Compose2Horizontal, FibersAreThoseOfTheParts) {
    // Oracle: every fiber of the composite is a fiber of F or of G, matched
    // through the seed node it starts from.
    for (const auto& m : sample::standard_manifolds()) {
        auto rng = sample::stream(51, 7, 0);
        const auto cfg = checks::detail::category_config(m, rng);
        const GeodMorphism2 F(cfg.f1, Interval{cfg.a, cfg.b}, 4);
        const GeodMorphism2 G(cfg.f2, Interval{cfg.a, cfg.b}, 4);
        const GeodMorphism2 FG = compose2_horizontal(F, G);
        const GeodMorphism1& seed = FG.seed();
        for (std::size_t i = 0; i < seed.path().size(); ++i) {
            bool matched = false;
            for (const GeodMorphism2* part : {&F, &G}) {
                const GeodMorphism1& ps = part->seed();
                for (std::size_t k = 0; k < ps.path().size() && !matched; ++k) {
                    if (m.dist(ps.path()[k], seed.path()[i]) > 1e-12 || (ps.field()[k] - seed.field()[i]).norm() > 1e-12)
                        continue;
                    matched = true;
                    for (std::size_t j = 0; j < FG.sheet().s_count(); ++j)
                        EXPECT_LE(m.dist(FG.sheet().point(j, i), part->sheet().point(j, k)), 1e-9) << m.name();
                }
            }
            EXPECT_TRUE(matched) << m.name() << " node " << i;
        }
    }
}

TEST(Compose2Horizontal, SourceTargetCoherence) {
    for (const auto& m : sample::standard_manifolds()) {
        for (std::uint64_t k = 0; k < 5; ++k) {
            auto rng = sample::stream(51, 8, k);
            const auto cfg = checks::detail::category_config(m, rng);
            const GeodMorphism2 F(cfg.f1, Interval{cfg.a, cfg.b}, 4);
            const GeodMorphism2 G(cfg.f2, Interval{cfg.a, cfg.b}, 4);
            const GeodMorphism2 FG = compose2_horizontal(F, G);
            EXPECT_LE(morphism_discrepancy(src2(FG), compose1(src2(G), src2(F))), 1e-9) << m.name();
            EXPECT_LE(morphism_discrepancy(tgt2(FG), compose1(tgt2(G), tgt2(F))), 1e-9) << m.name();
        }
    }
}

TEST(Compose2Horizontal, RejectsDifferentIntervals) {
    const GeodMorphism2 F(segment(v2(0, 0), v2(1, 0), v2(0, 1)), Interval{0, 1}, 4);
    const GeodMorphism2 G(segment(v2(1, 0), v2(2, 0), v2(0, 1)), Interval{0, 2}, 4);
    EXPECT_EQ(condition_of([&] { compose2_horizontal(F, G); }), ComposabilityCondition::interval);
}

// ---- exchange law -------------------------------------------------------------------------------

TEST(Exchange, AllIdentities) {
    const GeodMorphism1 f = segment(v2(0, 0), v2(1, 0), v2(0, 1));
    const GeodMorphism1 g = segment(v2(1, 0), v2(1, 1), v2(0, 1));
    const GeodMorphism2 F1 = GeodMorphism2::identity(f), F2 = GeodMorphism2::identity(g);
    const ExchangeReport r = check_exchange(F1, F1, F2, F2);
    EXPECT_TRUE(r.error.empty()) << r.error;
    EXPECT_TRUE(r.passed);
    EXPECT_EQ(r.max_discrepancy, 0.0);
}

TEST(Exchange, FlatCollinear) {
    const GeodMorphism2 F1(segment(v2(0, 0), v2(1, 0), v2(0.1, 1)), Interval{0, 1}, 4);
    const GeodMorphism2 G1(tgt2(F1), Interval{1, 2}, 4);
    const GeodMorphism2 F2(segment(v2(1, 0), v2(2, 0), v2(0.1, 1)), Interval{0, 1}, 4);
    const GeodMorphism2 G2(tgt2(F2), Interval{1, 2}, 4);
    const ExchangeReport r = check_exchange(F1, G1, F2, G2);
    EXPECT_TRUE(r.error.empty()) << r.error;
    EXPECT_LE(r.max_discrepancy, 1e-12);
}

TEST(Exchange, SphereArcs) {
    const auto m = ManifoldSpec::sphere(1.0);
    const DiscretePath a1 = great_circle_arc(m, v3(1, 0, 0), v3(0, 1, 0), 0.6, 64);
    const DiscretePath a2 = great_circle_arc(m, a1.back(), v3(0, 0, 1), 0.5, 64);
    const PathTangentField x1 = normal_field(a1, 0.5);
    // The second field starts where the first ends and turns smoothly.
    std::vector<Vec> vs;
    for (std::size_t i = 0; i < a2.size(); ++i) {
        const double tau = sample::interior_parameter(a2, i);
        const Vec w = m.tangent_projection(a2[i], x1.vectors().back());
        const Vec n = normal_field(a2, 0.5)[i];
        vs.push_back(m.tangent_projection(a2[i], Vec((1 - tau) * w + tau * n)));
    }
    vs[0] = x1.vectors().back();
    for (std::size_t i = 1; i <= a2.collar_nodes(); ++i) vs[i] = vs[0];
    const PathTangentField x2(a2, vs);
    const GeodMorphism2 F1(GeodMorphism1(x1, 0.0), Interval{0, 0.5}, 4);
    const GeodMorphism2 G1(tgt2(F1), Interval{0.5, 1.2}, 4);
    const GeodMorphism2 F2(GeodMorphism1(x2, 0.0), Interval{0, 0.5}, 4);
    const GeodMorphism2 G2(tgt2(F2), Interval{0.5, 1.2}, 4);
    const ExchangeReport r = check_exchange(F1, G1, F2, G2);
    EXPECT_TRUE(r.error.empty()) << r.error;
    EXPECT_TRUE(r.passed);
    EXPECT_LE(r.max_discrepancy, 1e-9);
}

TEST(Exchange, ReportsRatherThanThrows) {
    const GeodMorphism2 F1(segment(v2(0, 0), v2(1, 0), v2(0, 1)), Interval{0, 1}, 4);
    const GeodMorphism2 F2(segment(v2(5, 0), v2(6, 0), v2(0, 1)), Interval{0, 1}, 4);
    const GeodMorphism2 G1(tgt2(F1), Interval{1, 2}, 4);
    const GeodMorphism2 G2(tgt2(F2), Interval{1, 2}, 4);
    ExchangeReport r;
    EXPECT_NO_THROW(r = check_exchange(F1, G1, F2, G2));
    EXPECT_FALSE(r.passed);
    EXPECT_NE(r.error.find("path_endpoint"), std::string::npos);
}

TEST(Exchange, RandomConfigurations) {
    for (const auto& m : sample::standard_manifolds()) {
        for (std::uint64_t k = 0; k < 5; ++k) {
            auto rng = sample::stream(51, 9, k);
            const auto cfg = checks::detail::category_config(m, rng);
            const GeodMorphism2 F1(cfg.f1, Interval{cfg.a, cfg.b}, 4);
            const GeodMorphism2 G1(tgt2(F1), Interval{cfg.b, cfg.c}, 4);
            const GeodMorphism2 F2(cfg.f2, Interval{cfg.a, cfg.b}, 4);
            const GeodMorphism2 G2(tgt2(F2), Interval{cfg.b, cfg.c}, 4);
            const ExchangeReport r = check_exchange(F1, G1, F2, G2);
            EXPECT_TRUE(r.passed) << m.name() << " " << r.error << " " << r.max_discrepancy;
        }
    }
}
