#include "pathgeo/pathgeo.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace pathgeo;

namespace {

constexpr double pi = std::numbers::pi;

Vec v2(double a, double b) {
    Vec v(2);
    v << a, b;
    return v;
}

const Vec A = v2(0, 0), B = v2(1, 0), C = v2(1, 1), D = v2(2, 1);

DiscretePath flat(std::vector<Vec> xs) { return DiscretePath(ManifoldSpec::euclidean(2), std::move(xs)); }

/// `path` followed by `spur` and its node-wise retrace.
DiscretePath append_spur(const DiscretePath& path, const DiscretePath& spur) {
    return concatenate(path, concatenate(spur, reverse(spur)));
}

} // namespace

// ---- detection -------------------------------------------------------------------

TEST(DetectBacktracks, InjectivePathHasNone) {
    EXPECT_TRUE(detect_backtracks(line_path(ManifoldSpec::euclidean(2), A, B, 64, 0.0)).empty());
    // The collars are pauses, not retraces.
    EXPECT_TRUE(detect_backtracks(line_path(ManifoldSpec::euclidean(2), A, B, 64)).empty());
}

TEST(DetectBacktracks, FullReflection) {
    const auto ws = detect_backtracks(flat({A, B, C, B, A}));
    ASSERT_EQ(ws.size(), 1u);
    EXPECT_EQ(ws[0], (BackTrackWindow{0, 2}));
}

TEST(DetectBacktracks, PartialReflection) {
    const auto ws = detect_backtracks(flat({A, B, C, B, D}));
    ASSERT_EQ(ws.size(), 1u);
    EXPECT_EQ(ws[0], (BackTrackWindow{1, 1}));
}

TEST(DetectBacktracks, AgreesWithBruteForceScan) {
    // Oracle: test every (T, sigma) directly against the reflection identity and
    // keep those not contained in another window.
    const std::vector<std::vector<Vec>> cases{
        {A, B, C, B, A, B, D}, {A, B, A, B, A}, {A, B, C, D, C, B, C, D}, {A, A, B, C, B, A, A}};
    for (const auto& xs : cases) {
        const DiscretePath p = flat(xs);
        const std::size_t n = p.segments();
        std::vector<BackTrackWindow> all;
        for (std::size_t T = 0; T <= n; ++T)
            for (std::size_t s = 1; T + 2 * s <= n; ++s) {
                bool ok = true, moves = false;
                for (std::size_t u = 0; u < s; ++u) {
                    ok = ok && xs[T + u] == xs[T + 2 * s - u];
                    moves = moves || xs[T + u] != xs[T + s];
                }
                if (ok && moves) all.push_back({T, s});
            }
        std::vector<BackTrackWindow> maximal;
        for (const auto& w : all) {
            bool inside = false;
            for (const auto& o : all)
                if (!(o == w) && o.T <= w.T && w.end() <= o.end()) inside = true;
            if (!inside) maximal.push_back(w);
        }
        std::vector<BackTrackWindow> disjoint;
        for (const auto& w : maximal)
            if (disjoint.empty() || w.T >= disjoint.back().end()) disjoint.push_back(w);
        EXPECT_EQ(detect_backtracks(p), disjoint);
    }
}

TEST(DetectBacktracks, ToleranceAdmitsInexactRetraces) {
    const DiscretePath p = flat({A, B, C, v2(1, 1e-7), v2(1e-7, 0)});
    EXPECT_TRUE(detect_backtracks(p, 1e-9).empty() || detect_backtracks(p, 1e-9)[0].sigma < 2);
    const auto ws = detect_backtracks(p, 1e-6);
    ASSERT_EQ(ws.size(), 1u);
    EXPECT_EQ(ws[0], (BackTrackWindow{0, 2}));
    EXPECT_THROW(detect_backtracks(p, -1.0), DomainError);
}

// ---- erasure ------------------------------------------------------------------------

TEST(EraseBacktrack, FullReflectionLeavesConstantPath) {
    const DiscretePath e = erase_backtrack(flat({A, B, C, B, A}), {0, 2});
    ASSERT_EQ(e.segments(), 4u);
    for (const Vec& x : e.samples()) EXPECT_EQ(x, A);
}

TEST(EraseBacktrack, PartialReflectionResamplesTheRemainder) {
    // Index deletion gives [A, B, D]; resampled on N = 4 by geodesic interpolation.
    const DiscretePath e = erase_backtrack(flat({A, B, C, B, D}), {1, 1});
    const std::vector<Vec> expect{A, 0.5 * (A + B), B, 0.5 * (B + D), D};
    ASSERT_EQ(e.size(), expect.size());
    for (std::size_t i = 0; i < expect.size(); ++i) EXPECT_NEAR((e[i] - expect[i]).norm(), 0.0, 1e-15) << i;
}

TEST(EraseBacktrack, RejectsWindowsThatDoNotRetrace) {
    const DiscretePath p = flat({A, B, C, D, v2(3, 3)});
    EXPECT_THROW(erase_backtrack(p, {1, 1}), DomainError);
    EXPECT_THROW(erase_backtrack(p, {0, 3}), DomainError);
    EXPECT_THROW(erase_backtrack(p, {0, 0}), DomainError);
}

TEST(EraseBacktrack, ResultIsEquivalentToInput) {
    const DiscretePath p = flat({A, B, C, B, D});
    EXPECT_TRUE(bt_equivalent(p, erase_backtrack(p, {1, 1}), 1e-9));
}

// ---- canonical form ---------------------------------------------------------------------

TEST(CanonicalForm, ConstantPathStaysConstant) {
    const DiscretePath c = DiscretePath::constant(ManifoldSpec::sphere(1.0), Vec(Eigen::Vector3d(0, 1, 0)), 64);
    const DiscretePath k = canonical_form(c);
    ASSERT_EQ(k.segments(), 64u);
    for (const Vec& x : k.samples()) EXPECT_EQ(x, c[0]);
}

TEST(CanonicalForm, ConstantSpeedPathIsFixed) {
    for (const auto& m : sample::standard_manifolds()) {
        auto rng = sample::stream(41, 1, 0);
        const Vec a = sample::point(m, rng);
        const Vec b = m.exp(a, sample::tangent(m, a, rng, std::min(1.0, 0.8 * m.injectivity_radius())));
        const DiscretePath p = geodesic_path(m, a, b, 128);
        EXPECT_LE(max_node_distance(canonical_form(p), p), 1e-9) << m.name();
    }
}

TEST(CanonicalForm, SpurIsErased) {
    for (const auto& m : sample::standard_manifolds()) {
        for (std::uint64_t k = 0; k < 3; ++k) {
            auto rng = sample::stream(41, 2, k);
            const DiscretePath g1 = sample::smooth_path(m, rng, 64, 0.8);
            const DiscretePath g0 = sample::smooth_path(m, rng, 32, 0.5, kDefaultCollar, g1.front());
            // g0 then its retrace, then g1.
            const DiscretePath spurred = concatenate(concatenate(g0, reverse(g0)), g1);
            const std::size_t n = spurred.segments();
            EXPECT_LE(max_node_distance(canonical_form(spurred), canonical_form(g1, kDefaultBacktrackTolerance, n)),
                      1e-6)
                << m.name();
        }
    }
}

TEST(CanonicalForm, Idempotent) {
    for (const auto& m : sample::standard_manifolds()) {
        for (std::uint64_t k = 0; k < 6; ++k) {
            auto rng = sample::stream(41, 3, k);
            const DiscretePath p = k % 2 ? sample::spur_fixture(m, rng, 128, 24, 24).field.base()
                                         : sample::smooth_path(m, rng, 128, 1.2);
            const DiscretePath c = canonical_form(p);
            EXPECT_LE(max_node_distance(canonical_form(c), c), 1e-9) << m.name();
        }
    }
}

TEST(CanonicalForm, EqualChordsOnTheInterior) {
    auto rng = sample::stream(41, 4, 0);
    const auto m = ManifoldSpec::hyperbolic_half_plane();
    const DiscretePath c = canonical_form(sample::smooth_path(m, rng, 128, 1.0));
    const std::size_t k = c.collar_nodes();
    ASSERT_EQ(k, 8u);
    const double first = m.dist(c[k], c[k + 1]);
    for (std::size_t i = k; i < c.segments() - k; ++i) EXPECT_NEAR(m.dist(c[i], c[i + 1]), first, 1e-12);
}

TEST(CanonicalForm, InvariantUnderReparametrization) {
    // Piecewise-geodesic polygon with corners on grid nodes; phi fixes the corners,
    // so resampling moves nodes along the edges only.
    for (const auto& m : sample::standard_manifolds()) {
        for (std::uint64_t k = 0; k < 4; ++k) {
            auto rng = sample::stream(41, 5, k);
            const std::size_t n = 128;
            const std::vector<std::size_t> corner{8, 50, 90, 120};
            std::vector<Vec> vert{sample::point(m, rng)};
            for (int q = 0; q < 3; ++q)
                vert.push_back(m.canonical_point(
                    m.exp(vert.back(), sample::tangent(m, vert.back(), rng, std::min(0.8, 0.4 * m.injectivity_radius())))));
            std::vector<Vec> xs(n + 1);
            for (std::size_t i = 0; i <= n; ++i) {
                const std::size_t j = std::clamp<std::size_t>(i, corner[0], corner[3]);
                std::size_t q = 0;
                while (q < 2 && j > corner[q + 1]) ++q;
                const double lam = double(j - corner[q]) / double(corner[q + 1] - corner[q]);
                const Vec u = m.log(vert[q], vert[q + 1]);
                xs[i] = lam == 1.0 ? vert[q + 1] : m.canonical_point(m.exp(vert[q], Vec(lam * u)));
            }
            const DiscretePath poly(m, xs, kDefaultCollar);
            auto phi = [&](double t) {
                const double tc[] = {corner[0] / double(n), corner[1] / double(n), corner[2] / double(n),
                                     corner[3] / double(n)};
                if (t <= tc[0] || t >= tc[3]) return t;
                std::size_t q = 0;
                while (t > tc[q + 1]) ++q;
                const double u = (t - tc[q]) / (tc[q + 1] - tc[q]);
                return tc[q] + (tc[q + 1] - tc[q]) * (u * u * (3.0 - 2.0 * u) * 0.5 + 0.5 * u);
            };
            EXPECT_LE(max_node_distance(canonical_form(resample(poly, n, phi)), canonical_form(poly)), 1e-6)
                << m.name() << " case " << k;
        }
    }
}

// ---- equivalence -----------------------------------------------------------------------------

TEST(BtEquivalent, Reflexive) {
    auto rng = sample::stream(41, 6, 0);
    const DiscretePath p = sample::smooth_path(ManifoldSpec::sphere(1.0), rng, 64, 1.0);
    EXPECT_TRUE(bt_equivalent(p, p, 1e-12));
}

TEST(BtEquivalent, InsertedSpurIsEquivalent) {
    for (const auto& m : sample::standard_manifolds()) {
        auto rng = sample::stream(41, 7, 0);
        const DiscretePath p = sample::smooth_path(m, rng, 64, 0.8);
        const DiscretePath lam = sample::smooth_path(m, rng, 64, 0.5, kDefaultCollar, p.back());
        const DiscretePath q = append_spur(p, lam);
        EXPECT_TRUE(bt_equivalent(p, q, 1e-6)) << m.name();
        EXPECT_TRUE(bt_equivalent(q, p, 1e-6)) << m.name();
    }
}

TEST(BtEquivalent, ParallelLinesAreNotEquivalent) {
    const auto m = ManifoldSpec::euclidean(2);
    EXPECT_FALSE(bt_equivalent(line_path(m, A, B, 64), line_path(m, v2(0, 1), v2(1, 1), 64), 1e-6));
}

TEST(BtEquivalent, RetracedLineIsEquivalentToPoint) {
    const auto m = ManifoldSpec::euclidean(2);
    const DiscretePath p = line_path(m, A, B, 64);
    EXPECT_TRUE(bt_equivalent(concatenate(p, reverse(p)), DiscretePath::constant(m, A, 64), 1e-12));
}

TEST(BtEquivalent, CompositionCompatibility) {
    for (const auto& m : sample::standard_manifolds()) {
        for (std::uint64_t k = 0; k < 3; ++k) {
            auto rng = sample::stream(41, 8, k);
            const DiscretePath g1 = sample::smooth_path(m, rng, 64, 0.8);
            const DiscretePath h1 = sample::smooth_path(m, rng, 64, 0.8, kDefaultCollar, g1.back());
            const DiscretePath lam = sample::smooth_path(m, rng, 64, 0.5, kDefaultCollar, g1.back());
            const DiscretePath g2 = append_spur(g1, lam);
            const DiscretePath h2 = concatenate(concatenate(lam, reverse(lam)), h1);
            ASSERT_TRUE(bt_equivalent(g1, g2, 1e-6));
            ASSERT_TRUE(bt_equivalent(h1, h2, 1e-6));
            EXPECT_TRUE(bt_equivalent(concatenate(g1, h1), concatenate(g2, h2), 1e-6)) << m.name();
        }
    }
}

// ---- exp and back-tracks ---------------------------------------------------------------------

TEST(ExpPreservesWindows, SpurFixtureSlicesKeepTheWindow) {
    for (const auto& m : sample::standard_manifolds()) {
        auto rng = sample::stream(41, 9, 0);
        const sample::SpurFixture fx = sample::spur_fixture(m, rng);
        const Worldsheet sheet = pathspace_geodesic(fx.field, Interval{0, 1}, 4);
        for (std::size_t j = 0; j < sheet.s_count(); ++j) {
            const DiscretePath slice = sheet.longitudinal(j);
            for (std::size_t u = 0; u <= fx.window.sigma; ++u) {
                const Vec& a = slice[fx.window.T + u];
                const Vec& b = slice[fx.window.end() - u];
                if (m.is_flat()) EXPECT_EQ(a, b) << m.name();
                else EXPECT_LE(m.dist(a, b), 1e-9) << m.name();
            }
        }
    }
}

TEST(SplitGeodesic, SheetOfConcatenationIsConcatenationOfSheets) {
    for (const auto& m : sample::standard_manifolds()) {
        auto rng = sample::stream(41, 10, 0);
        const DiscretePath p1 = sample::smooth_path(m, rng, 64, 0.8);
        const PathTangentField x1 = sample::smooth_field(p1, rng, 0.5);
        const DiscretePath p2 = sample::smooth_path(m, rng, 64, 0.8, kDefaultCollar, p1.back());
        const PathTangentField x2 = sample::smooth_field(p2, rng, 0.5, x1.vectors().back());
        const Worldsheet whole = pathspace_geodesic(concatenate(x1, x2), Interval{0, 1}, 4);
        const Worldsheet a = pathspace_geodesic(x1, Interval{0, 1}, 4);
        const Worldsheet b = pathspace_geodesic(x2, Interval{0, 1}, 4);
        for (std::size_t j = 0; j < whole.s_count(); ++j)
            EXPECT_LE(max_node_distance(whole.longitudinal(j), concatenate(a.longitudinal(j), b.longitudinal(j))), 1e-9);
    }
}

// ---- fields ------------------------------------------------------------------------------------

TEST(FieldCanonicalForm, ConstantFieldOnSpurPath) {
    const auto m = ManifoldSpec::euclidean(2);
    const DiscretePath p = line_path(m, A, B, 64);
    const DiscretePath lam = line_path(m, B, C, 64);
    const DiscretePath spurred = append_spur(p, lam);
    const PathTangentField f = field_canonical_form(PathTangentField::constant(spurred, v2(0.5, 0.5)));
    EXPECT_LE(max_node_distance(f.base(), canonical_form(p, kDefaultBacktrackTolerance, spurred.segments())), 1e-9);
    for (const Vec& v : f.vectors()) EXPECT_EQ(v, v2(0.5, 0.5));
}

TEST(FieldCanonicalForm, ZeroFieldIsAlwaysCompatible) {
    for (const auto& m : sample::standard_manifolds()) {
        auto rng = sample::stream(41, 11, 0);
        const sample::SpurFixture fx = sample::spur_fixture(m, rng, 128, 24, 24);
        EXPECT_NO_THROW((void)field_canonical_form(PathTangentField::zero(fx.field.base()))) << m.name();
    }
}

TEST(FieldCanonicalForm, ReflectionViolationIsRejected) {
    for (const auto& m : sample::standard_manifolds()) {
        auto rng = sample::stream(41, 12, 0);
        const sample::SpurFixture fx = sample::spur_fixture(m, rng, 128, 24, 24);
        EXPECT_NO_THROW((void)field_canonical_form(fx.field));
        std::vector<Vec> vs = fx.field.vectors();
        const std::size_t i = fx.window.end() - 2;
        vs[i] += m.tangent_basis(fx.field.base()[i])[0] * 1e-3;
        EXPECT_THROW((void)field_canonical_form(PathTangentField(fx.field.base(), vs)), TangentCompatibilityError)
            << m.name();
    }
}

TEST(ReducedForm, PacksOntoDyadicGrid) {
    const auto m = ManifoldSpec::euclidean(2);
    const DiscretePath p = append_spur(line_path(m, A, B, 64), line_path(m, B, C, 64));
    const DiscretePath r = reduced_form(p);
    EXPECT_GE(r.segments(), 16u);
    EXPECT_EQ(r.segments() & (r.segments() - 1), 0u);
    EXPECT_TRUE(detect_backtracks(r).empty());
    EXPECT_EQ(r.front(), A);
    EXPECT_EQ(r.back(), B);
}

TEST(CanonicalForm, SphereGreatCircleSpurOnly) {
    // A meridian out and back collapses to its base point.
    const auto m = ManifoldSpec::sphere(1.0);
    Vec e(3), n(3);
    e << 1, 0, 0;
    n << 0, 0, 1;
    const DiscretePath arc = great_circle_arc(m, e, n, pi / 3, 64);
    const DiscretePath c = canonical_form(concatenate(arc, reverse(arc)));
    for (const Vec& x : c.samples()) EXPECT_LE(m.dist(x, e), 1e-12);
}
