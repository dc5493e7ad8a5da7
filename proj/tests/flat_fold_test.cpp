#include "forge/flat_fold.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

using namespace forge;

namespace {

constexpr double deg = pi / 180.0;

std::vector<double> degrees(std::initializer_list<double> d) {
    std::vector<double> out;
    for (double x : d) out.push_back(x * deg);
    return out;
}

/// Directions of creases leaving a vertex, from consecutive sector sizes.
std::vector<double> directions_of(const std::vector<double>& sectors) {
    std::vector<double> out{0.0};
    for (std::size_t i = 0; i + 1 < sectors.size(); ++i) out.push_back(out.back() + sectors[i]);
    return out;
}

/// Four creases meeting at (5, 5) in the directions 0, 90, 180, 270 degrees.
CreasePattern plus_vertex(const std::array<Assignment, 4>& a) {
    auto cp = CreasePattern::blank();
    const Vec2 c{5, 5};
    const std::array<Vec2, 4> ends{Vec2{10, 5}, Vec2{5, 10}, Vec2{0, 5}, Vec2{5, 0}};
    for (std::size_t i = 0; i < 4; ++i) cp.insert_crease({c, ends[i]}, a[i]);
    return cp;
}

std::size_t vertex_at(const CreasePattern& cp, Vec2 p) {
    for (std::size_t v = 0; v < cp.vertices().size(); ++v)
        if (distance(cp.vertices()[v], p) < 1e-9) return v;
    ADD_FAILURE() << "no vertex at " << p.x << "," << p.y;
    return 0;
}

CreasePattern with_creases(std::initializer_list<std::tuple<Vec2, Vec2, Assignment>> creases) {
    auto cp = CreasePattern::blank();
    for (const auto& [a, b, asg] : creases) cp.insert_crease({a, b}, asg);
    return cp;
}

} // namespace

TEST(Maekawa, CountRule) {
    EXPECT_TRUE(maekawa_holds(3, 1));
    EXPECT_TRUE(maekawa_holds(1, 3));
    EXPECT_FALSE(maekawa_holds(2, 2));
    EXPECT_FALSE(maekawa_holds(2, 1));
    EXPECT_FALSE(maekawa_holds(3, 0));
    for (std::size_t m = 0; m < 8; ++m)
        for (std::size_t v = 0; v < 8; ++v)
            if ((m + v) % 2 == 1) {
                EXPECT_FALSE(maekawa_holds(m, v));
            }
}

TEST(Kawasaki, SectorSums) {
    EXPECT_TRUE(kawasaki_holds(degrees({90, 90, 90, 90})));
    EXPECT_FALSE(kawasaki_holds(degrees({45, 135, 90, 90})));
    EXPECT_FALSE(kawasaki_holds(degrees({30, 150, 60, 120})));
    EXPECT_TRUE(kawasaki_holds(degrees({30, 150, 150, 30})));
    EXPECT_FALSE(kawasaki_holds(degrees({120, 120, 120})));
    for (const auto& s : {degrees({90, 90, 90, 90}), degrees({45, 135, 90, 90}), degrees({30, 150, 60, 120}),
                          degrees({30, 150, 150, 30})}) {
        const auto want = oracle::check_vertex(directions_of(s), {'M', 'M', 'M', 'V'});
        EXPECT_EQ(kawasaki_holds(s), want.kawasaki);
    }
}

TEST(Kawasaki, ToleranceIsTight) {
    auto s = degrees({90, 90, 90, 90});
    s[0] += 5e-10;
    s[1] -= 5e-10;
    EXPECT_TRUE(kawasaki_holds(s, 1e-9));
    s[0] += 2e-9;
    s[1] -= 2e-9;
    EXPECT_FALSE(kawasaki_holds(s, 1e-9));
}

TEST(LocalConditions, AllAssignmentsOfASymmetricVertex) {
    int maekawa_passes = 0;
    for (unsigned mask = 0; mask < 16; ++mask) {
        std::array<Assignment, 4> a{};
        std::vector<char> letters;
        for (unsigned i = 0; i < 4; ++i) {
            a[i] = (mask >> i) & 1U ? Assignment::Mountain : Assignment::Valley;
            letters.push_back(to_char(a[i]));
        }
        const auto cp = plus_vertex(a);
        const auto star = cp.vertex_star(vertex_at(cp, {5, 5}));
        ASSERT_TRUE(star.interior);
        const auto want = oracle::check_vertex(degrees({0, 90, 180, 270}), letters);
        EXPECT_EQ(check_maekawa(star), want.maekawa) << mask;
        EXPECT_EQ(check_kawasaki(star), want.kawasaki) << mask;
        EXPECT_TRUE(check_kawasaki(star));
        maekawa_passes += check_maekawa(star) ? 1 : 0;
    }
    EXPECT_EQ(maekawa_passes, 8);
}

TEST(LocalConditions, FlatEdgesDoNotSplitSectors) {
    FoldFile f = fixtures::fold("book_flat");
    const auto cp = CreasePattern::from_fold(f);
    const auto star = cp.vertex_star(vertex_at(cp, {5, 5}));
    EXPECT_EQ(star.edges.size(), 4U);
    EXPECT_EQ(crease_sectors(star).size(), 2U);
    // a straight valley line through the vertex: two creases, both V
    EXPECT_TRUE(check_maekawa(star));
    EXPECT_TRUE(check_kawasaki(star));
    EXPECT_EQ(is_foldable(cp).status, FoldStatus::Valid);
}

TEST(LocalConditions, BoundaryAndOddDegreeAreErrors) {
    const auto cp = CreasePattern::blank();
    EXPECT_THROW((void)check_maekawa(cp.vertex_star(0)), FlatError);
    const auto t = with_creases({{{5, 5}, {10, 5}, Assignment::Valley},
                                 {{5, 5}, {0, 5}, Assignment::Valley},
                                 {{5, 5}, {5, 0}, Assignment::Valley}});
    const auto star = t.vertex_star(vertex_at(t, {5, 5}));
    EXPECT_FALSE(check_maekawa(star));
    EXPECT_THROW((void)check_kawasaki(star), FlatError);
}

TEST(FoldedGeometry, BlankSheetIsIdentity) {
    const auto cp = CreasePattern::blank();
    const auto g = compute_folded_geometry(cp);
    ASSERT_EQ(g.transforms.size(), 1U);
    EXPECT_LT(g.transforms[0].max_difference(Isometry{}), 1e-15);
    EXPECT_FALSE(g.flipped[0]);
}

TEST(FoldedGeometry, ValleyFoldAtHalfWidth) {
    const auto cp = with_creases({{{5, 0}, {5, 10}, Assignment::Valley}});
    const auto g = compute_folded_geometry(cp);
    ASSERT_EQ(cp.faces().size(), 2U);
    Box all;
    for (std::size_t f = 0; f < 2; ++f) {
        for (const Vec2& p : folded_polygon(cp, g, f)) all.expand(p);
        const bool right = centroid(cp.face_polygon(f)).x > 5;
        EXPECT_EQ(g.flipped[f], right);
    }
    // right corner (10, 0) lands on (0, 0)
    const std::size_t right_face = centroid(cp.face_polygon(0)).x > 5 ? 0 : 1;
    const Vec2 corner = g.transforms[right_face]({10, 0});
    EXPECT_NEAR(corner.x, 0.0, 1e-12);
    EXPECT_NEAR(corner.y, 0.0, 1e-12);
    EXPECT_NEAR(all.width(), 5.0, 1e-12);
    EXPECT_NEAR(all.height(), 10.0, 1e-12);
}

TEST(FoldedGeometry, EveryFixturePreservesLengths) {
    for (const auto& name : fixtures::fold_names()) {
        SCOPED_TRACE(name);
        const auto cp = CreasePattern::from_fold(fixtures::fold(name));
        const auto g = compute_folded_geometry(cp);
        EXPECT_LT(oracle::max_edge_length_error(cp, g), 1e-9);
        EXPECT_LT(max_hinge_mismatch(cp, g), 1e-9);
    }
}

TEST(Foldability, BlankSheet) {
    const auto v = is_foldable(CreasePattern::blank());
    ASSERT_EQ(v.status, FoldStatus::Valid);
    EXPECT_EQ(v.witness->layers.stacking.size(), 1U);
}

TEST(Foldability, SingleFoldHasTwoLayers) {
    const auto cp = with_creases({{{5, 0}, {5, 10}, Assignment::Valley}});
    const auto v = is_foldable(cp);
    ASSERT_EQ(v.status, FoldStatus::Valid);
    EXPECT_EQ(v.witness->layers.stacking.size(), 2U);
    EXPECT_EQ(v.witness->layers.above.size(), 1U);
    // valley: the flipped right half ends up on top
    const std::size_t right = centroid(cp.face_polygon(0)).x > 5 ? 0 : 1;
    EXPECT_EQ(v.witness->layers.stacking.back(), right);
}

TEST(Foldability, MountainFoldGoesBehind) {
    const auto cp = with_creases({{{5, 0}, {5, 10}, Assignment::Mountain}});
    const auto v = is_foldable(cp);
    ASSERT_EQ(v.status, FoldStatus::Valid);
    const std::size_t right = centroid(cp.face_polygon(0)).x > 5 ? 0 : 1;
    EXPECT_EQ(v.witness->layers.stacking.front(), right);
}

TEST(Foldability, RollOfTwoValleysMatchesBruteForce) {
    const auto cp = with_creases({{{3.33, 0}, {3.33, 10}, Assignment::Valley}, {{6.66, 0}, {6.66, 10}, Assignment::Valley}});
    const auto v = is_foldable(cp);
    ASSERT_EQ(v.status, FoldStatus::Valid);
    ASSERT_EQ(v.witness->layers.stacking.size(), 3U);
    const auto all = oracle::valid_stackings(cp, v.witness->geometry);
    ASSERT_EQ(all.size(), 1U);
    EXPECT_EQ(all.front(), v.witness->layers.stacking);
    EXPECT_TRUE(oracle::check_folded_state(cp, *v.witness).ok());
}

TEST(Foldability, MaekawaFailureStopsBeforeSearch) {
    const auto cp = plus_vertex({Assignment::Mountain, Assignment::Mountain, Assignment::Valley, Assignment::Valley});
    const auto v = is_foldable(cp);
    EXPECT_EQ(v.status, FoldStatus::LocallyInvalid);
    EXPECT_EQ(v.nodes, 0U);
    EXPECT_FALSE(v.witness);
    ASSERT_EQ(v.violations.size(), 1U);
    EXPECT_EQ(v.violations[0].rule, "maekawa");
    EXPECT_EQ(v.violations[0].first, vertex_at(cp, {5, 5}));
}

TEST(Foldability, KawasakiFailureNamesTheVertex) {
    // sectors of 45, 135, 90 and 90 degrees around (5, 5)
    const auto cp = with_creases({{{5, 5}, {10, 5}, Assignment::Mountain},
                                  {{5, 5}, {10, 10}, Assignment::Mountain},
                                  {{5, 5}, {0, 5}, Assignment::Mountain},
                                  {{5, 5}, {5, 0}, Assignment::Valley}});
    const auto v = is_foldable(cp);
    EXPECT_EQ(v.status, FoldStatus::LocallyInvalid);
    ASSERT_EQ(v.violations.size(), 1U);
    EXPECT_EQ(v.violations[0].rule, "kawasaki");
    EXPECT_EQ(v.violations[0].subject, Violation::Subject::Vertex);
    EXPECT_EQ(v.violations[0].first, vertex_at(cp, {5, 5}));
}

TEST(Foldability, DanglingCreaseIsLocallyInvalid) {
    const auto cp = with_creases({{{0, 5}, {5, 5}, Assignment::Valley}});
    EXPECT_EQ(is_foldable(cp).status, FoldStatus::LocallyInvalid);
}

// A corner flap longer than the strip it folds onto has to pass through the
// strip's other fold.
TEST(Foldability, OverlongFlapIsGloballyInvalid) {
    const auto cp = with_creases({{{0, 10}, {10, 0}, Assignment::Valley}, {{0, 7.5}, {7.5, 0}, Assignment::Valley}});
    const auto v = is_foldable(cp);
    EXPECT_EQ(v.status, FoldStatus::GloballyInvalid);
    EXPECT_TRUE(oracle::valid_stackings(cp, compute_folded_geometry(cp)).empty());
}

TEST(Foldability, FlapThroughNeighbouringHingeIsGloballyInvalid) {
    const auto cp = with_creases({{{2.5, 0}, {10, 5}, Assignment::Mountain}, {{10, 10}, {0, 2.5}, Assignment::Mountain}});
    EXPECT_EQ(is_foldable(cp).status, FoldStatus::GloballyInvalid);
    EXPECT_TRUE(oracle::valid_stackings(cp, compute_folded_geometry(cp)).empty());
}

TEST(Foldability, EveryFixtureWitnessPassesOracle) {
    for (const auto& name : fixtures::fold_names()) {
        SCOPED_TRACE(name);
        const auto cp = CreasePattern::from_fold(fixtures::fold(name));
        const auto v = is_foldable(cp);
        ASSERT_EQ(v.status, FoldStatus::Valid);
        const auto report = oracle::check_folded_state(cp, *v.witness);
        EXPECT_TRUE(report.ok()) << report.summary();
        EXPECT_EQ(report.opposite_taco_collisions, 0U);
        if (cp.faces().size() <= 7) {
            const auto all = oracle::valid_stackings(cp, v.witness->geometry);
            EXPECT_NE(std::find(all.begin(), all.end(), v.witness->layers.stacking), all.end());
        }
    }
}

TEST(Foldability, WaterbombAvoidsCrossedFlaps) {
    const auto cp = CreasePattern::from_fold(fixtures::fold("waterbomb"));
    const auto v = is_foldable(cp);
    ASSERT_TRUE(v.valid());
    const auto all = oracle::valid_stackings(cp, v.witness->geometry);
    std::size_t clean = 0;
    for (const auto& s : all)
        if (oracle::check_stacking(cp, v.witness->geometry, s).opposite_taco_collisions == 0) ++clean;
    EXPECT_GT(all.size(), clean);
    EXPECT_GT(clean, 0U);
    // faces that only touch are ordered by the pairwise relation, not the stacking
    EXPECT_EQ(oracle::check_folded_state(cp, *v.witness).opposite_taco_collisions, 0U);
}

// Random small patterns: the solver finds a layer order exactly when brute
// force over all permutations finds one without crossed flaps.
TEST(Foldability, AgreesWithBruteForceOnRandomPatterns) {
    std::mt19937_64 rng(1);
    std::uniform_int_distribution<int> coord(0, 4);
    std::size_t checked = 0, rejected = 0;
    for (int it = 0; it < 20000; ++it) {
        auto cp = CreasePattern::blank();
        bool ok = true;
        const int n = 1 + it % 4;
        for (int k = 0; k < n && ok; ++k) {
            const Vec2 a{coord(rng) * 2.5, coord(rng) * 2.5}, b{coord(rng) * 2.5, coord(rng) * 2.5};
            const auto asg = rng() % 2 ? Assignment::Mountain : Assignment::Valley;
            try {
                cp.insert_crease({a, b}, asg);
            } catch (const CpError&) {
                ok = false;
            }
        }
        if (!ok || cp.faces().size() > 7) continue;
        const auto v = is_foldable(cp);
        if (v.status == FoldStatus::LocallyInvalid) continue;
        ASSERT_NE(v.status, FoldStatus::Unknown);
        ++checked;
        const auto g = compute_folded_geometry(cp);
        std::size_t clean = 0;
        for (const auto& s : oracle::valid_stackings(cp, g))
            if (oracle::check_stacking(cp, g, s).opposite_taco_collisions == 0) ++clean;
        EXPECT_EQ(v.valid(), clean > 0) << serialize_fold(cp.to_fold());
        if (v.valid()) {
            const auto report = oracle::check_folded_state(cp, *v.witness);
            EXPECT_TRUE(report.ok()) << report.summary();
        } else {
            ++rejected;
        }
    }
    EXPECT_GT(checked, 100U);
    EXPECT_GT(rejected, 10U);
}

TEST(Foldability, SameInputSameWitness) {
    const auto cp = CreasePattern::from_fold(fixtures::fold("sawtooth"));
    const auto a = is_foldable(cp), b = is_foldable(cp);
    ASSERT_TRUE(a.valid());
    EXPECT_EQ(a.witness->layers.stacking, b.witness->layers.stacking);
    EXPECT_EQ(a.witness->layers.above, b.witness->layers.above);
    EXPECT_EQ(a.nodes, b.nodes);
}

namespace {

CreasePattern valley_roll(int folds) {
    auto cp = CreasePattern::blank();
    const double step = 10.0 / (folds + 1);
    for (int i = 1; i <= folds; ++i) cp.insert_crease({{i * step, 0}, {i * step, 10}}, Assignment::Valley);
    return cp;
}

} // namespace

TEST(Budget, NodeLimitGivesUnknown) {
    const auto cp = valley_roll(32);
    const auto full = is_foldable(cp);
    ASSERT_TRUE(full.valid());
    ASSERT_GT(full.nodes, 0U);
    const auto cut = is_foldable(cp, {full.nodes - 1, std::chrono::milliseconds(5000)});
    EXPECT_EQ(cut.status, FoldStatus::Unknown);
    ASSERT_FALSE(cut.violations.empty());
    EXPECT_EQ(cut.violations[0].rule, "budget-exhausted");
    EXPECT_FALSE(cut.witness);
}

TEST(Budget, TimeLimitGivesUnknown) {
    const auto v = is_foldable(valley_roll(48), {200000, std::chrono::milliseconds(0)});
    EXPECT_EQ(v.status, FoldStatus::Unknown);
}

TEST(Budget, DensePatternsFinishInsideDefaultBudget) {
    for (int folds : {16, 48}) {
        const auto cp = valley_roll(folds);
        const auto t0 = std::chrono::steady_clock::now();
        const auto v = is_foldable(cp);
        const auto elapsed = std::chrono::steady_clock::now() - t0;
        EXPECT_TRUE(v.status == FoldStatus::Valid || v.status == FoldStatus::Unknown);
        EXPECT_LT(elapsed, std::chrono::seconds(5));
    }
}
