// Acceptance gate: one line per criterion, nonzero exit on any failure.
// Budgets and tolerances are pinned here; changing them is a contract change.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "../test_gen.hpp"
#include "../test_oracles.hpp"
#include "xcity/json_io.hpp"
#include "xcity/osm.hpp"
#include "xcity/phase2.hpp"

using namespace xcity;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* pattern, ...) {
    char buffer[512];
    va_list args;
    va_start(args, pattern);
    std::vsnprintf(buffer, sizeof buffer, pattern, args);
    va_end(args);
    return buffer;
}

RoadAsset seg(const std::string& id, double len, double value = 1.0) {
    return RoadAsset{id, {{-len / 2, 0.0}, {len / 2, 0.0}}, {{0, 1}}, value, {}};
}

RoadAsset bend(const std::string& id, double leg = 1.5) {
    return RoadAsset{id, {{0.0, 0.0}, {leg, 0.0}, {leg, leg}}, {{0, 1}, {1, 2}}, 1.0, {}};
}

RoadAsset zigzag(const std::string& id) {
    return RoadAsset{id,
                     {{0.0, 0.0}, {1.0, 0.6}, {2.0, 0.0}, {3.0, 0.6}, {4.0, 0.0}},
                     {{0, 1}, {1, 2}, {2, 3}, {3, 4}},
                     1.0,
                     {}};
}

Space square(double half) {
    return Space{{{-half, -half}, {half, -half}, {half, half}, {-half, half}}};
}

std::string fixture(const std::string& name) {
    return (fs::path(FIXTURE_DIR) / name).string();
}

int run_binary(const std::string& cmd) {
    const int status = std::system(cmd.c_str());
    if (status == -1) return -1;
    return WEXITSTATUS(status);
}

// ---------------------------------------------------------------------------

Outcome criterion_predicates() {
    const auto start = Clock::now();
    std::mt19937_64 rng(101);
    int checks = 0, failures = 0;

    for (int i = 0; i < 10000; ++i) {
        const Point2 x = testing_oracles::random_point(rng, -10, 10);
        const Point2 y = testing_oracles::random_point(rng, -10, 10);
        const Point2 z = testing_oracles::random_point(rng, -10, 10);
        const double scale = std::max(1.0, std::abs(orientation(x, y, z)));

        // antisymmetry and cyclic shift
        if (std::abs(orientation(x, y, z) + orientation(y, x, z)) > 1e-9 * scale) ++failures;
        if (std::abs(orientation(x, y, z) - orientation(y, z, x)) > 1e-9 * scale) ++failures;
        checks += 2;

        // rigid-motion invariance within 1e-6 relative
        const double theta = testing_gen::uniform(rng, -kPi, kPi);
        const double c = std::cos(theta), s = std::sin(theta);
        const Point2 t = testing_oracles::random_point(rng, -50, 50);
        const auto moved = [&](Point2 p) {
            return Point2{c * p.x - s * p.y + t.x, s * p.x + c * p.y + t.y};
        };
        if (std::abs(orientation(moved(x), moved(y), moved(z)) - orientation(x, y, z)) >
            1e-6 * scale) {
            ++failures;
        }
        ++checks;

        // parametric-oracle agreement outside the eps guard band
        const Segment2 p{testing_oracles::random_point(rng, -5, 5),
                         testing_oracles::random_point(rng, -5, 5)};
        const Segment2 q{testing_oracles::random_point(rng, -5, 5),
                         testing_oracles::random_point(rng, -5, 5)};
        if (distance(p.a, p.b) < 1e-6 || distance(q.a, q.b) < 1e-6) continue;
        const bool disjoint = segments_disjoint(p, q);
        const testing_oracles::Hit hit = testing_oracles::segment_hit(p, q);
        if (disjoint && hit != testing_oracles::Hit::None) ++failures;
        if (hit == testing_oracles::Hit::Proper && disjoint) ++failures;
        ++checks;
    }

    const double elapsed = seconds_since(start);
    const bool pass = failures == 0 && elapsed < 5.0;
    return {pass, fmt("%d checks, %d failures, %.2f s (budget 5 s)", checks, failures, elapsed)};
}

Outcome criterion_sacs() {
    const auto start = Clock::now();
    std::mt19937_64 rng(202);
    int bad_valid = 0, bad_reflected = 0;

    for (int i = 0; i < 1000; ++i) {
        const RoadAsset asset = testing_gen::random_asset(rng, "r");
        const Pose pose{testing_gen::uniform(rng, -40, 40), testing_gen::uniform(rng, -40, 40),
                        testing_gen::uniform(rng, -kPi, kPi)};
        const SacsResidual valid = sacs_residual(asset, apply_pose(asset, pose));
        if (valid.max_abs_delta() > 1e-6 || valid.max_margin() > 1e-6) ++bad_valid;

        // mirror, then the same rigid motion: distances survive, orientations flip
        RoadAsset mirrored = asset;
        for (Point2& p : mirrored.nodes) p.y = -p.y;
        const SacsResidual reflected = sacs_residual(asset, apply_pose(mirrored, pose));
        if (!(reflected.max_margin() > 1e-6)) ++bad_reflected;
    }

    const double elapsed = seconds_since(start);
    const bool pass = bad_valid == 0 && bad_reflected == 0 && elapsed < 5.0;
    return {pass, fmt("1000 poses (%d bad), 1000 reflections (%d undetected), %.2f s (budget 5 s)",
                      bad_valid, bad_reflected, elapsed)};
}

Outcome criterion_constraint_counts() {
    std::mt19937_64 rng(303);
    int mismatches = 0;

    for (int set = 0; set < 50; ++set) {
        std::vector<RoadAsset> assets;
        const std::size_t n = 1 + rng() % 4;
        for (std::size_t i = 0; i < n; ++i) {
            assets.push_back(testing_gen::random_asset(rng, "a" + std::to_string(i)));
        }

        // enumerate the actual emitted objects
        ConstraintCounts seen;
        for (const RoadAsset& a : assets) {
            const SacsResidual r = sacs_residual(a, a.nodes);
            seen.dist += static_cast<std::int64_t>(r.deltas.size());
            seen.orient += static_cast<std::int64_t>(r.orientation_margins.size());
        }
        seen.cacs_ineq = 2 * static_cast<std::int64_t>(cacs_pairs(assets).size());
        seen.cacs_bin = seen.cacs_ineq;

        std::vector<Pose> identity(assets.size());
        const Placement placement = make_placement(assets, identity);
        const auto candidates = transition_candidates(assets, placement);
        std::int64_t blocker_rows = 0;
        for (const TransitionCandidate& c : candidates) {
            blocker_rows += static_cast<std::int64_t>(candidate_blockers(assets, c).size());
        }
        seen.conn_ineq = 2 * blocker_rows;
        seen.conn_bin = static_cast<std::int64_t>(assets.size() * (assets.size() - 1) / 2) +
                        static_cast<std::int64_t>(candidates.size()) + 2 * blocker_rows;

        const ConstraintCounts p1 = count_constraints(assets, Phase::Phase1);
        const ConstraintCounts p2 = count_constraints(assets, Phase::Phase2);
        ConstraintCounts expect1 = seen;
        expect1.conn_ineq = 0;
        expect1.conn_bin = 0;
        if (p1 != expect1) ++mismatches;
        if (p2 != seen) ++mismatches;
    }

    return {mismatches == 0, fmt("50 random sets, %d mismatches (exact equality required)",
                                 mismatches)};
}

Outcome criterion_trial_ladder() {
    const std::vector<RoadAsset> fixtures{load_asset(fixture("trial_i.json")),
                                          load_asset(fixture("trial_v.json")),
                                          load_asset(fixture("trial_t.json"))};
    const Space space = square(20.0);
    SearchConfig config;
    config.seed = 4242;
    config.restarts = 6;
    config.iterations = 20000;

    int feasible = 0;
    double worst = 0.0;
    for (unsigned mask = 1; mask < 8; ++mask) {
        std::vector<RoadAsset> subset;
        for (int bit = 0; bit < 3; ++bit) {
            if (mask & (1u << bit)) subset.push_back(fixtures[bit]);
        }
        const auto start = Clock::now();
        const Phase1Result r = search_placement(subset, space, config);
        const double elapsed = seconds_since(start);
        worst = std::max(worst, elapsed);
        if (r.status == Phase1Status::Feasible && elapsed < 60.0) ++feasible;
    }
    return {feasible == 7, fmt("7/7 required, %d feasible, worst trial %.2f s (budget 60 s each)",
                               feasible, worst)};
}

struct TinyCase {
    std::vector<RoadAsset> assets;
    double half = 0.0;
    bool feasible = true;
};

std::vector<TinyCase> tiny_phase1_suite() {
    return {
        {{seg("a", 1.0)}, 2.0, true},
        {{bend("a")}, 2.5, true},
        {{seg("a", 1.0), seg("b", 1.0)}, 3.0, true},
        {{bend("a"), bend("b")}, 4.0, true},
        {{seg("a", 1.0), bend("b")}, 3.0, true},
        {{zigzag("a")}, 3.0, true},
        {{seg("a", 0.8), seg("b", 0.8)}, 1.5, true},
        {{seg("a", 10.0)}, 1.0, false},
        {{bend("a", 12.0)}, 1.5, false},
        {{seg("a", 1.0), seg("b", 8.0)}, 1.5, false},
    };
}

Outcome criterion_phase1_oracle() {
    SearchConfig config;
    config.seed = 99;
    config.restarts = 4;
    config.iterations = 8000;

    int agree = 0;
    const auto suite = tiny_phase1_suite();
    for (const TinyCase& tc : suite) {
        const Space space = square(tc.half);
        const GridSpec grid{tc.half / 4.0, kPi / 4.0};
        const Phase1Status got = search_placement(tc.assets, space, config).status;
        const OracleStatus truth = oracle_search_placement(tc.assets, space, grid).status;
        const bool match = (got == Phase1Status::Feasible) == (truth == OracleStatus::Feasible);
        const bool expected = (truth == OracleStatus::Feasible) == tc.feasible;
        if (match && expected) ++agree;
    }
    return {agree == static_cast<int>(suite.size()),
            fmt("%d/%zu verdicts agree with the grid oracle", agree, suite.size())};
}

Outcome criterion_phase2() {
    const auto start = Clock::now();

    // full pairing on three open segments
    const std::vector<RoadAsset> three{seg("a", 2.0), seg("b", 2.0), seg("c", 2.0)};
    const Space open = square(20.0);
    SearchConfig config;
    config.seed = 6;
    config.restarts = 6;
    config.iterations = 15000;
    const Phase1Result init = search_placement(three, open, config);
    if (init.status != Phase1Status::Feasible) {
        return {false, "phase-1 bootstrap failed on three open segments"};
    }
    const ConnectivityResult full = optimize_connectivity(three, init.placement, open, config);
    const double full_elapsed = seconds_since(start);
    if (full.C != 3 || full_elapsed >= 120.0) {
        return {false, fmt("C = %d after %.2f s (need 3 within 120 s)", full.C, full_elapsed)};
    }
    for (const auto& [pair, cand] : full.chosen_transitions) {
        (void)pair;
        if (!candidate_valid(cand, three, full.placement)) {
            return {false, "a chosen transition failed re-validation"};
        }
    }

    // tiny-suite agreement with the connectivity oracle
    struct Tiny2 {
        std::vector<RoadAsset> assets;
        double half;
    };
    const std::vector<Tiny2> suite{
        {{seg("a", 1.0), seg("b", 1.0)}, 4.0},
        {{seg("a", 1.0), bend("b")}, 4.0},
        {{seg("a", 1.0)}, 2.0},
        {{testing_gen::square_cycle("a")}, 3.0},
        {{seg("a", 1.0), testing_gen::square_cycle("b")}, 5.0},
        {{bend("a"), bend("b")}, 5.0},
        {{seg("a", 1.0), seg("b", 1.0)}, 3.0},
        {{bend("a"), testing_gen::square_cycle("b")}, 5.0},
        {{seg("a", 0.8), seg("b", 0.8)}, 2.0},
        {{testing_gen::square_cycle("a"), testing_gen::square_cycle("b")}, 6.0},
    };
    SearchConfig tiny_config;
    tiny_config.seed = 17;
    tiny_config.restarts = 4;
    tiny_config.iterations = 6000;

    int agree = 0;
    for (const Tiny2& tc : suite) {
        const Space space = square(tc.half);
        const Phase1Result p1 = search_placement(tc.assets, space, tiny_config);
        if (p1.status != Phase1Status::Feasible) continue;
        const ConnectivityResult r =
            optimize_connectivity(tc.assets, p1.placement, space, tiny_config);
        const GridSpec grid{tc.half / 4.0, kPi / 4.0};
        if (r.C == oracle_connectivity_max(tc.assets, space, grid)) ++agree;
    }

    const bool pass = agree == static_cast<int>(suite.size());
    return {pass, fmt("C = 3 in %.2f s; tiny-suite oracle agreement %d/%zu", full_elapsed, agree,
                      suite.size())};
}

Outcome criterion_scalability() {
    const std::vector<RoadAsset> assets{load_asset(fixture("mcity_curve.json")),
                                        load_asset(fixture("mcity_tee.json")),
                                        load_asset(fixture("mcity_x.json"))};
    SearchConfig config;
    config.seed = 2026;
    config.restarts = 8;
    config.iterations = 25000;

    const auto start = Clock::now();
    const Phase1Result r = search_placement(assets, square(150.0), config);
    const double elapsed = seconds_since(start);
    if (r.status != Phase1Status::Feasible || elapsed >= 600.0) {
        return {false, fmt("three-asset mapping: %s in %.1f s (budget 600 s)",
                           r.status == Phase1Status::Feasible ? "feasible" : "exhausted", elapsed)};
    }

    // beyond budget: the binary must stop with exit 2 and a diagnostic, not hang
    const fs::path dir = fs::current_path() / "acceptance_scratch" / "scalability";
    fs::remove_all(dir);
    fs::create_directories(dir);
    nlohmann::json config_json;
    config_json["space"] = {{-5.0, -5.0}, {5.0, -5.0}, {5.0, 5.0}, {-5.0, 5.0}};
    config_json["assets"] = {fixture("mcity_curve.json"), fixture("mcity_tee.json"),
                             fixture("mcity_x.json")};
    config_json["solver"] = {{"seed", 1}, {"restarts", 2}, {"iterations", 2000}};
    const std::string config_path = (dir / "config.json").string();
    write_text_file(config_path, dump_json(config_json));
    const std::string out_path = (dir / "result.json").string();

    const auto cliff_start = Clock::now();
    const int code = run_binary(std::string(XCITY_BIN_PATH) + " phase1 --config " + config_path +
                                " --out " + out_path + " > /dev/null 2>&1");
    const double cliff_elapsed = seconds_since(cliff_start);
    if (code != 2) return {false, fmt("over-budget run exited %d, want 2", code)};
    const nlohmann::json result = load_json_file(out_path);
    if (result.at("status") != "no_feasible_subset" || result.at("trials").empty() ||
        result.at("diagnostic").get<std::string>().empty()) {
        return {false, "over-budget result lacks exhaustion diagnostics"};
    }

    return {true, fmt("3 assets feasible in %.1f s (budget 600 s); over-budget exits 2 in %.1f s",
                      elapsed, cliff_elapsed)};
}

Outcome criterion_determinism() {
    const fs::path dir = fs::current_path() / "acceptance_scratch" / "determinism";
    fs::remove_all(dir);
    fs::create_directories(dir);

    nlohmann::json config_json;
    config_json["space"] = {{-20.0, -20.0}, {20.0, -20.0}, {20.0, 20.0}, {-20.0, 20.0}};
    config_json["assets"] = {fixture("trial_i.json"), fixture("trial_v.json"),
                             fixture("trial_t.json")};
    config_json["solver"] = {{"seed", 7}, {"restarts", 4}, {"iterations", 6000}};
    const std::string config_path = (dir / "config.json").string();
    write_text_file(config_path, dump_json(config_json));

    const std::string bin(XCITY_BIN_PATH);
    auto phase1_cmd = [&](const std::string& out, const std::string& env) {
        return env + bin + " phase1 --config " + config_path + " --out " + out +
               " > /dev/null 2>&1";
    };
    const std::string a = (dir / "a.json").string();
    const std::string b = (dir / "b.json").string();
    const std::string c = (dir / "c.json").string();
    if (run_binary(phase1_cmd(a, "")) != 0) return {false, "phase1 run 1 failed"};
    if (run_binary(phase1_cmd(b, "")) != 0) return {false, "phase1 run 2 failed"};
    if (run_binary(phase1_cmd(c, "XCITY_THREADS=2 ")) != 0) {
        return {false, "phase1 threaded run failed"};
    }
    if (read_text_file(a) != read_text_file(b)) return {false, "phase1 reruns differ"};
    if (read_text_file(a) != read_text_file(c)) {
        return {false, "phase1 differs under XCITY_THREADS=2"};
    }

    auto phase2_cmd = [&](const std::string& out, const std::string& env) {
        return env + bin + " phase2 --config " + config_path + " --phase1 " + a + " --out " + out +
               " > /dev/null 2>&1";
    };
    const std::string pa = (dir / "pa.json").string();
    const std::string pb = (dir / "pb.json").string();
    const std::string pc = (dir / "pc.json").string();
    if (run_binary(phase2_cmd(pa, "")) != 0) return {false, "phase2 run 1 failed"};
    if (run_binary(phase2_cmd(pb, "")) != 0) return {false, "phase2 run 2 failed"};
    if (run_binary(phase2_cmd(pc, "XCITY_THREADS=2 ")) != 0) {
        return {false, "phase2 threaded run failed"};
    }
    if (read_text_file(pa) != read_text_file(pb)) return {false, "phase2 reruns differ"};
    if (read_text_file(pa) != read_text_file(pc)) {
        return {false, "phase2 differs under XCITY_THREADS=2"};
    }

    return {true, "phase1 and phase2 byte-identical across reruns and XCITY_THREADS=2"};
}

Outcome criterion_ingestion() {
    const RawOsmGraph graph = parse_osm(read_text_file(fixture("mini.osm")));

    // projection error against the haversine ground truth
    const auto local = project_local(graph);
    double worst_rel = 0.0;
    int pairs = 0;
    for (auto i = graph.nodes.begin(); i != graph.nodes.end(); ++i) {
        for (auto j = std::next(i); j != graph.nodes.end(); ++j) {
            const double truth = testing_oracles::haversine_m(i->second.lat, i->second.lon,
                                                              j->second.lat, j->second.lon);
            if (truth < 1.0) continue;
            const double got = distance(local.at(i->first), local.at(j->first));
            worst_rel = std::max(worst_rel, std::abs(got - truth) / truth);
            ++pairs;
        }
    }
    if (worst_rel >= 1e-3) {
        return {false, fmt("projection error %.4f%% over %d pairs (limit 0.1%%)",
                           100.0 * worst_rel, pairs)};
    }

    // .osm -> asset -> file -> asset, validating at each hop
    const std::vector<std::vector<std::int64_t>> groups{{101, 102, 104}, {103}};
    const fs::path dir = fs::current_path() / "acceptance_scratch" / "ingest";
    fs::remove_all(dir);
    fs::create_directories(dir);
    for (std::size_t g = 0; g < groups.size(); ++g) {
        const RoadAsset asset =
            extract_asset(graph, groups[g], kDefaultSimplifyTol, "rt_" + std::to_string(g), 1.0);
        if (!validate_asset(asset).empty()) {
            return {false, fmt("extracted asset %zu fails validation", g)};
        }
        const std::string path = (dir / (asset.id + ".json")).string();
        save_asset(asset, path);
        const RoadAsset reloaded = load_asset(path);
        if (reloaded.id != asset.id || reloaded.nodes.size() != asset.nodes.size() ||
            reloaded.segments != asset.segments) {
            return {false, fmt("asset %zu changed across the file round trip", g)};
        }
    }

    return {true, fmt("round trip clean; worst projection error %.4f%% over %d pairs",
                      100.0 * worst_rel, pairs)};
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        Outcome (*run)();
    };
    const std::vector<Criterion> criteria{
        {"predicate suite (10k randomized checks, < 5 s)", criterion_predicates},
        {"SACS equivalence (1k poses + 1k reflections, < 5 s)", criterion_sacs},
        {"constraint-count conformance (50 sets vs enumeration)", criterion_constraint_counts},
        {"phase-1 trial ladder (7 subsets, < 60 s each)", criterion_trial_ladder},
        {"phase-1 oracle agreement (tiny suite)", criterion_phase1_oracle},
        {"phase-2 connectivity (C = 3; tiny-suite oracle agreement)", criterion_phase2},
        {"scalability floor (3-asset mapping; graceful exhaustion)", criterion_scalability},
        {"determinism (byte-identical reruns)", criterion_determinism},
        {"ingestion round trip and projection accuracy", criterion_ingestion},
    };

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome outcome;
        try {
            outcome = criteria[i].run();
        } catch (const std::exception& e) {
            outcome = {false, std::string("exception: ") + e.what()};
        }
        if (!outcome.pass) ++failures;
        std::printf("[%s] %zu. %s — %s\n", outcome.pass ? "PASS" : "FAIL", i + 1,
                    criteria[i].name, outcome.detail.c_str());
        std::fflush(stdout);
    }

    if (failures == 0) {
        std::printf("acceptance: 9/9 criteria pass\n");
    } else {
        std::printf("acceptance: %d criterion(s) failing\n", failures);
    }
    return failures == 0 ? 0 : 1;
}
