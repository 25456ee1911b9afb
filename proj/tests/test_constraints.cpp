#include <doctest.h>

#include <cmath>

#include "test_gen.hpp"
#include "xcity/constraints.hpp"
#include "xcity/phase2.hpp"

using namespace xcity;

namespace {

constexpr double kPi = 3.14159265358979323846;

RoadAsset straight(const std::string& id, double len) {
    return RoadAsset{id, {{0.0, 0.0}, {len, 0.0}}, {{0, 1}}, 1.0, {}};
}

RoadAsset bend(const std::string& id) {
    return RoadAsset{id, {{0.0, 0.0}, {2.0, 0.0}, {2.0, 2.0}}, {{0, 1}, {1, 2}}, 1.0, {}};
}

Space big_square(double half = 50.0) {
    return Space{{{-half, -half}, {half, -half}, {half, half}, {-half, half}}};
}

std::vector<Point2> reflect_y(std::span<const Point2> pts) {
    std::vector<Point2> out;
    for (const Point2& p : pts) out.push_back({p.x, -p.y});
    return out;
}

// Counts by constructing the actual residual/pair/candidate objects, instead
// of the closed-form arithmetic inside count_constraints.
ConstraintCounts enumerate_counts(std::span<const RoadAsset> assets, Phase phase) {
    ConstraintCounts counts;
    for (const RoadAsset& a : assets) {
        const SacsResidual r = sacs_residual(a, a.nodes);
        counts.dist += static_cast<std::int64_t>(r.deltas.size());
        counts.orient += static_cast<std::int64_t>(r.orientation_margins.size());
    }
    const auto pairs = cacs_pairs(assets);
    counts.cacs_ineq = 2 * static_cast<std::int64_t>(pairs.size());
    counts.cacs_bin = counts.cacs_ineq;
    if (phase == Phase::Phase2) {
        std::vector<Pose> identity(assets.size());
        const Placement placement = make_placement(assets, identity);
        const auto candidates = transition_candidates(assets, placement);
        std::int64_t pair_count = 0;
        for (std::size_t i = 0; i < assets.size(); ++i) {
            for (std::size_t j = i + 1; j < assets.size(); ++j) ++pair_count;
        }
        for (const TransitionCandidate& c : candidates) {
            counts.conn_ineq += 2 * static_cast<std::int64_t>(candidate_blockers(assets, c).size());
        }
        counts.conn_bin = pair_count + static_cast<std::int64_t>(candidates.size()) + counts.conn_ineq;
    }
    return counts;
}

}  // namespace

TEST_SUITE("constraints") {

TEST_CASE("sacs_residual sizes follow the per-asset formulas") {
    for (std::size_t n = 2; n <= 7; ++n) {
        RoadAsset a{"p", {}, {}, 1.0, {}};
        for (std::size_t i = 0; i < n; ++i) {
            a.nodes.push_back({static_cast<double>(i), (i % 2) ? 0.8 : 0.0});
        }
        for (std::size_t i = 0; i + 1 < n; ++i) a.segments.emplace_back(i, i + 1);
        const SacsResidual r = sacs_residual(a, a.nodes);
        CHECK(r.deltas.size() == 2 * n - 3);
        CHECK(r.orientation_margins.size() == n - 2);
    }
}

TEST_CASE("identity and posed coordinates satisfy the shape constraints") {
    const RoadAsset a = bend("b");
    const SacsResidual identity = sacs_residual(a, a.nodes);
    CHECK(identity.max_abs_delta() <= 1e-12);
    CHECK(identity.max_margin() <= 1e-12);

    const auto world = apply_pose(a, Pose{17.0, -4.0, 2.1});
    const SacsResidual posed = sacs_residual(a, world);
    CHECK(posed.max_abs_delta() <= 1e-9);
    CHECK(posed.max_margin() <= 1e-9);
}

TEST_CASE("uniform scaling shows up in the anchor delta") {
    const RoadAsset a = straight("s", 2.0);  // anchor distance^2 = 4
    std::vector<Point2> doubled;
    for (const Point2& p : a.nodes) doubled.push_back({2.0 * p.x, 2.0 * p.y});
    const SacsResidual r = sacs_residual(a, doubled);
    REQUIRE(!r.deltas.empty());
    CHECK(r.deltas.front() == doctest::Approx(12.0));  // 4d^2 - d^2 = 3d^2
}

TEST_CASE("reflection violates at least one orientation constraint") {
    std::mt19937_64 rng(31);
    for (int i = 0; i < 100; ++i) {
        const RoadAsset a = testing_gen::random_asset(rng, "r");
        REQUIRE(validate_asset(a).empty());
        const double theta = testing_gen::uniform(rng, -kPi, kPi);
        const auto world = apply_pose(a, Pose{testing_gen::uniform(rng, -10, 10),
                                              testing_gen::uniform(rng, -10, 10), theta});
        const SacsResidual mirrored = sacs_residual(a, reflect_y(world));
        CHECK(mirrored.max_margin() > 1e-6);
    }
}

TEST_CASE("collinear originals never constrain orientation") {
    const RoadAsset line{"line", {{0, 0}, {1, 0}, {2, 0}, {3, 0}},
                         {{0, 1}, {1, 2}, {2, 3}}, 1.0, {}};
    const auto world = apply_pose(line, Pose{5.0, 1.0, 0.7});
    const SacsResidual reflected = sacs_residual(line, reflect_y(world));
    CHECK(reflected.max_margin() <= 1e-12);  // mirror of a line is a rigid motion
}

TEST_CASE("cacs_pairs enumerates cross-asset segment pairs in order") {
    const std::vector<RoadAsset> assets{straight("a", 1.0), bend("b")};
    const auto pairs = cacs_pairs(assets);
    REQUIRE(pairs.size() == 2);  // 1 segment x 2 segments
    CHECK(pairs[0].asset_a == 0);
    CHECK(pairs[0].asset_b == 1);
    CHECK(pairs[0].segment_b == 0);
    CHECK(pairs[1].segment_b == 1);
}

TEST_CASE("cacs_check flags crossings but exempts intra-asset contact") {
    // one self-crossing asset alone: no cross-asset violation possible
    const RoadAsset cross{"x",
                          {{-1.0, 0.0}, {1.0, 0.0}, {0.0, -1.0}, {0.0, 1.0}},
                          {{0, 1}, {2, 3}},
                          1.0,
                          {}};
    const std::vector<RoadAsset> alone{cross};
    const std::vector<std::vector<Point2>> world_alone{cross.nodes};
    CHECK(cacs_check(alone, world_alone, kDefaultEps).empty());

    const std::vector<RoadAsset> two{straight("a", 2.0), straight("b", 2.0)};
    const std::vector<std::vector<Point2>> crossing{
        {{-1.0, 0.0}, {1.0, 0.0}},
        {{0.0, -1.0}, {0.0, 1.0}},
    };
    const auto violations = cacs_check(two, crossing, kDefaultEps);
    REQUIRE(violations.size() == 1);
    CHECK(violations[0].asset_a == 0);
    CHECK(violations[0].asset_b == 1);

    const std::vector<std::vector<Point2>> apart{
        {{-3.0, 0.0}, {-1.0, 0.0}},
        {{1.0, 1.0}, {3.0, 1.0}},
    };
    CHECK(cacs_check(two, apart, kDefaultEps).empty());
}

TEST_CASE("containment_check lists outside nodes") {
    const std::vector<RoadAsset> assets{straight("a", 2.0)};
    const Space tiny{{{-1.0, -1.0}, {1.0, -1.0}, {1.0, 1.0}, {-1.0, 1.0}}};
    const std::vector<std::vector<Point2>> world{{{0.0, 0.0}, {5.0, 0.0}}};
    const auto outside = containment_check(assets, world, tiny);
    REQUIRE(outside.size() == 1);
    CHECK(outside[0].asset == 0);
    CHECK(outside[0].node == 1);
}

TEST_CASE("count_constraints matches the worked examples") {
    const std::vector<RoadAsset> pair{bend("three"),  // n=3, 2 segments
                                      RoadAsset{"four",
                                                {{0, 0}, {1, 0}, {2, 0}, {3, 1}},
                                                {{0, 1}, {1, 2}, {2, 3}},
                                                1.0,
                                                {}}};  // n=4, 3 segments
    const ConstraintCounts phase1 = count_constraints(pair, Phase::Phase1);
    CHECK(phase1.dist == 8);        // (2*3-3) + (2*4-3)
    CHECK(phase1.orient == 3);      // 1 + 2
    CHECK(phase1.cacs_ineq == 12);  // 2 * (C(5,2) - C(2,2) - C(3,2))
    CHECK(phase1.cacs_bin == 12);
    CHECK(phase1.conn_ineq == 0);
    CHECK(phase1.conn_bin == 0);

    const std::vector<RoadAsset> p2{straight("s", 1.0), bend("b")};  // 2+2 boundary nodes
    const ConstraintCounts phase2 = count_constraints(p2, Phase::Phase2);
    CHECK(phase2.conn_ineq == 8);  // X=4 candidates, each guarded against N_l-2=1 segment
    CHECK(phase2.conn_bin == 13);  // C(2,2)=1 + X + conn_ineq
}

TEST_CASE("count_constraints equals direct enumeration on random sets") {
    std::mt19937_64 rng(32);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<RoadAsset> assets;
        const std::size_t n_assets = 1 + rng() % 4;
        for (std::size_t i = 0; i < n_assets; ++i) {
            assets.push_back(testing_gen::random_asset(rng, "a" + std::to_string(i)));
        }
        if (trial % 3 == 0) assets.push_back(testing_gen::square_cycle("loop"));
        CHECK(count_constraints(assets, Phase::Phase1) ==
              enumerate_counts(assets, Phase::Phase1));
        CHECK(count_constraints(assets, Phase::Phase2) ==
              enumerate_counts(assets, Phase::Phase2));
    }
}

TEST_CASE("feasibility_report aggregates and classifies") {
    const std::vector<RoadAsset> assets{straight("a", 2.0), straight("b", 2.0)};
    const Space space = big_square();

    SUBCASE("clean placement is feasible") {
        // offset in y: equal heights would make the pair collinear, hence colliding
        const std::vector<Pose> poses{{-5.0, 0.0, 0.0}, {5.0, 1.0, 0.0}};
        const FeasibilityReport report =
            feasibility_report(assets, make_placement(assets, poses), space);
        CHECK(report.feasible);
        CHECK(report.cacs_violations.empty());
        CHECK(report.containment_violations.empty());
        CHECK(report.sacs.max_abs_delta() <= 1e-9);
    }

    SUBCASE("crossing placement reports the segment pair") {
        const std::vector<Pose> poses{{0.0, 0.0, 0.0}, {1.0, -1.0, kPi / 2}};
        const FeasibilityReport report =
            feasibility_report(assets, make_placement(assets, poses), space);
        CHECK_FALSE(report.feasible);
        CHECK(report.cacs_violations.size() == 1);
    }

    SUBCASE("escaping node reports containment") {
        const std::vector<Pose> poses{{0.0, 0.0, 0.0}, {49.5, 1.0, 0.0}};
        const FeasibilityReport report =
            feasibility_report(assets, make_placement(assets, poses), space);
        CHECK_FALSE(report.feasible);
        CHECK(report.cacs_violations.empty());
        REQUIRE(report.containment_violations.size() == 1);
        CHECK(report.containment_violations[0].asset == 1);
    }

    SUBCASE("collinear non-overlapping pair warns and collides") {
        const std::vector<Pose> poses{{0.0, 0.0, 0.0}, {5.0, 0.0, 0.0}};
        const FeasibilityReport report =
            feasibility_report(assets, make_placement(assets, poses), space);
        CHECK_FALSE(report.feasible);
        CHECK(report.cacs_violations.size() == 1);
        REQUIRE(!report.warnings.empty());
        bool mentions = false;
        for (const std::string& w : report.warnings) {
            if (w.find("collinear") != std::string::npos) mentions = true;
        }
        CHECK(mentions);
    }
}

TEST_CASE("world_in_order requires full coverage") {
    const std::vector<RoadAsset> assets{straight("a", 1.0), straight("b", 1.0)};
    const std::vector<Pose> one_pose{{0, 0, 0}};
    const std::vector<RoadAsset> first_only{assets[0]};
    const Placement partial = make_placement(first_only, one_pose);
    CHECK_THROWS_AS(world_in_order(assets, partial), std::invalid_argument);
}

}  // TEST_SUITE
