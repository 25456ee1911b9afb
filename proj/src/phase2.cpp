#include "xcity/phase2.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <stdexcept>
#include <thread>

namespace xcity {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct BoundaryIndex {
    std::vector<std::vector<std::size_t>> per_asset;  // ascending node indices

    explicit BoundaryIndex(std::span<const RoadAsset> assets) {
        per_asset.reserve(assets.size());
        for (const RoadAsset& asset : assets) {
            const std::set<std::size_t> b = boundary_nodes(asset);
            per_asset.emplace_back(b.begin(), b.end());
        }
    }
};

// Index-based connectivity scan over world coordinates. Used by everything
// downstream; the public direct_connectivity adds validation and id mapping.
struct CoreResult {
    int C = 0;
    // (pair (i,j), from node, to node) per connected pair, i < j ascending.
    std::vector<std::tuple<std::size_t, std::size_t, std::size_t, std::size_t>> chosen;
    double total_length = 0.0;
};

bool transition_clear(std::span<const RoadAsset> assets,
                      std::span<const std::vector<Point2>> world, const Segment2& tr,
                      std::size_t fa, std::size_t fn, std::size_t ta, std::size_t tn,
                      double eps) {
    for (std::size_t ai = 0; ai < assets.size(); ++ai) {
        for (const auto& [u, v] : assets[ai].segments) {
            const bool exempt = (ai == fa && (u == fn || v == fn)) ||
                                (ai == ta && (u == tn || v == tn));
            if (exempt) continue;
            if (!segments_disjoint(tr, Segment2{world[ai][u], world[ai][v]}, eps)) return false;
        }
    }
    return true;
}

CoreResult connectivity_core(std::span<const RoadAsset> assets,
                             std::span<const std::vector<Point2>> world,
                             const BoundaryIndex& boundary, double eps) {
    CoreResult out;
    for (std::size_t i = 0; i < assets.size(); ++i) {
        for (std::size_t j = i + 1; j < assets.size(); ++j) {
            bool connected = false;
            for (std::size_t p : boundary.per_asset[i]) {
                for (std::size_t q : boundary.per_asset[j]) {
                    const Segment2 tr{world[i][p], world[j][q]};
                    const double len = distance(tr.a, tr.b);
                    if (len < kMinSegmentLength) continue;
                    if (transition_clear(assets, world, tr, i, p, j, q, eps)) {
                        out.chosen.emplace_back(i, j, p, q);
                        out.total_length += len;
                        connected = true;
                        break;
                    }
                }
                if (connected) break;
            }
            if (connected) ++out.C;
        }
    }
    return out;
}

int reachable_pairs(const BoundaryIndex& boundary) {
    int n = 0;
    for (std::size_t i = 0; i < boundary.per_asset.size(); ++i) {
        for (std::size_t j = i + 1; j < boundary.per_asset.size(); ++j) {
            if (!boundary.per_asset[i].empty() && !boundary.per_asset[j].empty()) ++n;
        }
    }
    return n;
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}
    double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
    double normal(double sigma) {
        double u1 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        return sigma * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * uniform01());
    }
    std::size_t index(std::size_t n) {
        const auto k = static_cast<std::size_t>(uniform01() * static_cast<double>(n));
        return k < n ? k : n - 1;
    }

private:
    std::mt19937_64 eng_;
};

void rebuild_world(const RoadAsset& asset, const Pose& pose, std::vector<Point2>& out) {
    out.resize(asset.nodes.size());
    const double c = std::cos(pose.theta), s = std::sin(pose.theta);
    for (std::size_t i = 0; i < asset.nodes.size(); ++i) {
        const Point2& p = asset.nodes[i];
        out[i] = Point2{c * p.x - s * p.y + pose.tx, s * p.x + c * p.y + pose.ty};
    }
}

// Lexicographic (feasibility, -C, transition length) collapsed to one scalar:
// any infeasible state costs >= 1, any feasible one costs -C + f with f < 1.
double arrangement_cost(std::span<const RoadAsset> assets,
                        std::span<const std::vector<Point2>> world, const Space& space,
                        const BoundaryIndex& boundary, const SearchConfig& config, double eps,
                        int* c_out) {
    const double pen =
        penalty(assets, world, space, config.w_collision, config.w_containment, eps);
    if (pen > 0.0) {
        if (c_out) *c_out = -1;
        return 1.0 + pen;
    }
    const CoreResult core = connectivity_core(assets, world, boundary, eps);
    if (c_out) *c_out = core.C;
    return -static_cast<double>(core.C) + core.total_length / (1.0 + core.total_length);
}

struct ArrangeOutcome {
    double cost = std::numeric_limits<double>::infinity();
    int C = -1;
    std::vector<Pose> poses;
    bool complete = false;  // reached the reachable-pair ceiling
};

ArrangeOutcome arrange_once(std::span<const RoadAsset> assets, const Space& space,
                            const BoundaryIndex& boundary, const std::vector<Pose>& initial,
                            const SearchConfig& config, double eps, int ceiling,
                            std::uint64_t stream_seed) {
    Rng rng(stream_seed);
    const BoundingBox box = polygon_bbox(space.vertices);
    const double diag = distance(box.min, box.max);

    std::vector<Pose> poses = initial;
    std::vector<std::vector<Point2>> world(assets.size());
    for (std::size_t i = 0; i < assets.size(); ++i) rebuild_world(assets[i], poses[i], world[i]);

    ArrangeOutcome out;
    int cur_c = 0;
    double cur = arrangement_cost(assets, world, space, boundary, config, eps, &cur_c);
    out.cost = cur;
    out.C = cur_c;
    out.poses = poses;
    out.complete = cur_c >= ceiling;

    double temperature = config.initial_temperature;
    const double t0 = std::max(config.initial_temperature, 1e-12);
    std::vector<Point2> saved;

    for (int iter = 0; iter < config.iterations && !out.complete; ++iter) {
        const double heat = temperature / t0;
        const double roll = rng.uniform01();
        const double prev = cur;

        auto evaluate_or_revert = [&](auto&& revert) {
            int c = 0;
            const double next = arrangement_cost(assets, world, space, boundary, config, eps, &c);
            if (next <= prev ||
                rng.uniform01() < std::exp((prev - next) / std::max(temperature, 1e-12))) {
                cur = next;
                cur_c = c;
            } else {
                revert();
                cur = prev;
            }
        };

        if (assets.size() >= 2 && roll < 0.10) {
            std::size_t i = rng.index(assets.size());
            std::size_t j = rng.index(assets.size() - 1);
            if (j >= i) ++j;
            auto swap_poses = [&] {
                std::swap(poses[i].tx, poses[j].tx);
                std::swap(poses[i].ty, poses[j].ty);
                rebuild_world(assets[i], poses[i], world[i]);
                rebuild_world(assets[j], poses[j], world[j]);
            };
            swap_poses();
            evaluate_or_revert(swap_poses);
        } else {
            const std::size_t i = rng.index(assets.size());
            const Pose before = poses[i];
            saved = world[i];
            if (assets.size() >= 2 ? roll < 0.55 : roll < 0.50) {
                const double sigma = std::max(0.02, 0.15 * diag * heat);
                poses[i].tx += rng.normal(sigma);
                poses[i].ty += rng.normal(sigma);
            } else {
                const double sigma = std::max(0.02, 0.5 * kPi * heat);
                poses[i].theta = wrap_angle(poses[i].theta + rng.normal(sigma));
            }
            rebuild_world(assets[i], poses[i], world[i]);
            evaluate_or_revert([&] {
                poses[i] = before;
                world[i] = saved;
            });
        }

        if (cur < out.cost) {
            out.cost = cur;
            out.C = cur_c;
            out.poses = poses;
            out.complete = cur_c >= ceiling;
        }
        temperature *= config.cooling;
    }
    return out;
}

}  // namespace

std::vector<TransitionCandidate> transition_candidates(std::span<const RoadAsset> assets,
                                                       const Placement& placement) {
    for (const RoadAsset& asset : assets) {
        if (!placement.entries.count(asset.id)) {
            throw std::invalid_argument("placement does not cover asset '" + asset.id + "'");
        }
    }
    const BoundaryIndex boundary(assets);
    std::vector<TransitionCandidate> out;
    for (std::size_t i = 0; i < assets.size(); ++i) {
        for (std::size_t j = i + 1; j < assets.size(); ++j) {
            for (std::size_t p : boundary.per_asset[i]) {
                for (std::size_t q : boundary.per_asset[j]) {
                    out.push_back(TransitionCandidate{assets[i].id, p, assets[j].id, q});
                }
            }
        }
    }
    return out;
}

std::vector<std::pair<std::size_t, std::size_t>> candidate_blockers(
    std::span<const RoadAsset> assets, const TransitionCandidate& c) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t ai = 0; ai < assets.size(); ++ai) {
        const RoadAsset& asset = assets[ai];
        for (std::size_t si = 0; si < asset.segments.size(); ++si) {
            const auto& [u, v] = asset.segments[si];
            const bool exempt =
                (asset.id == c.from_asset && (u == c.from_node || v == c.from_node)) ||
                (asset.id == c.to_asset && (u == c.to_node || v == c.to_node));
            if (!exempt) out.emplace_back(ai, si);
        }
    }
    return out;
}

bool candidate_valid(const TransitionCandidate& c, std::span<const RoadAsset> assets,
                     const Placement& placement, double eps, std::vector<std::string>* warnings) {
    const std::vector<Point2>& from_world = placement.world_nodes.at(c.from_asset);
    const std::vector<Point2>& to_world = placement.world_nodes.at(c.to_asset);
    const Segment2 tr{from_world.at(c.from_node), to_world.at(c.to_node)};
    if (distance(tr.a, tr.b) < kMinSegmentLength) {
        if (warnings) {
            warnings->push_back("degenerate transition between " + c.from_asset + "#" +
                                std::to_string(c.from_node) + " and " + c.to_asset + "#" +
                                std::to_string(c.to_node) + ": endpoints coincide");
        }
        return false;
    }
    for (const auto& [ai, si] : candidate_blockers(assets, c)) {
        const auto& [u, v] = assets[ai].segments[si];
        const std::vector<Point2>& w = placement.world_nodes.at(assets[ai].id);
        if (!segments_disjoint(tr, Segment2{w[u], w[v]}, eps)) return false;
    }
    return true;
}

ConnectivityResult direct_connectivity(std::span<const RoadAsset> assets,
                                       const Placement& placement, const Space& space, double eps,
                                       double delta_tol) {
    const FeasibilityReport report = feasibility_report(assets, placement, space, eps, delta_tol);
    if (!report.feasible) {
        throw std::invalid_argument(
            "placement is infeasible (collisions or containment violations); rerun the phase-1 "
            "search before evaluating connectivity");
    }

    const std::vector<std::vector<Point2>> world = world_in_order(assets, placement);
    const BoundaryIndex boundary(assets);
    const CoreResult core = connectivity_core(assets, world, boundary, eps);

    ConnectivityResult out;
    out.C = core.C;
    out.placement = placement;
    for (const auto& [i, j, p, q] : core.chosen) {
        const AssetPair pair{assets[i].id, assets[j].id};
        out.connected_pairs.push_back(pair);
        out.chosen_transitions[pair] = TransitionCandidate{assets[i].id, p, assets[j].id, q};
    }

    // Degenerate candidates are skipped, not chosen; surface them once each.
    for (std::size_t i = 0; i < assets.size(); ++i) {
        for (std::size_t j = i + 1; j < assets.size(); ++j) {
            for (std::size_t p : boundary.per_asset[i]) {
                for (std::size_t q : boundary.per_asset[j]) {
                    if (distance(world[i][p], world[j][q]) < kMinSegmentLength) {
                        out.warnings.push_back("degenerate transition between " + assets[i].id +
                                               "#" + std::to_string(p) + " and " + assets[j].id +
                                               "#" + std::to_string(q) + ": endpoints coincide");
                    }
                }
            }
        }
    }

    // Chosen transitions may cross each other; the arrangement model does not
    // forbid it, so report informationally. Shared endpoints are expected.
    const auto& chosen = core.chosen;
    for (std::size_t a = 0; a < chosen.size(); ++a) {
        for (std::size_t b = a + 1; b < chosen.size(); ++b) {
            const auto& [i1, j1, p1, q1] = chosen[a];
            const auto& [i2, j2, p2, q2] = chosen[b];
            const bool share = (i1 == i2 && p1 == p2) || (i1 == j2 && p1 == q2) ||
                               (j1 == i2 && q1 == p2) || (j1 == j2 && q1 == q2);
            if (share) continue;
            const Segment2 s1{world[i1][p1], world[j1][q1]};
            const Segment2 s2{world[i2][p2], world[j2][q2]};
            if (!segments_disjoint(s1, s2, eps)) {
                out.warnings.push_back("transitions " + assets[i1].id + "-" + assets[j1].id +
                                       " and " + assets[i2].id + "-" + assets[j2].id +
                                       " cross each other (allowed, informational)");
            }
        }
    }
    return out;
}

ConnectivityResult optimize_connectivity(std::span<const RoadAsset> assets,
                                         const Placement& initial, const Space& space,
                                         const SearchConfig& config, double eps,
                                         double delta_tol) {
    if (const auto issues = validate_space(space); !issues.empty()) {
        throw std::invalid_argument("invalid space: " + issues.front());
    }
    if (assets.empty()) throw std::invalid_argument("optimize_connectivity: no assets");
    const FeasibilityReport initial_report =
        feasibility_report(assets, initial, space, eps, delta_tol);
    if (!initial_report.feasible) {
        throw std::invalid_argument(
            "initial placement is infeasible; obtain a feasible one from the phase-1 search");
    }

    const BoundaryIndex boundary(assets);
    const int ceiling = reachable_pairs(boundary);
    const std::vector<Pose> initial_poses = poses_in_order(assets, initial);

    const int restarts = std::max(1, config.restarts);
    std::vector<ArrangeOutcome> outcomes(static_cast<std::size_t>(restarts));
    const std::uint64_t base = mix_seed(config.seed, 0xa22aULL);

    const int threads = std::min(solver_thread_cap(), restarts);
    int ran_until = restarts;  // merge window: restarts [0, ran_until)
    if (threads <= 1) {
        for (int r = 0; r < restarts; ++r) {
            outcomes[static_cast<std::size_t>(r)] =
                arrange_once(assets, space, boundary, initial_poses, config, eps, ceiling,
                             mix_seed(base, static_cast<std::uint64_t>(r)));
            if (outcomes[static_cast<std::size_t>(r)].complete) {
                ran_until = r + 1;
                break;
            }
        }
    } else {
        std::atomic<int> next{0};
        std::atomic<int> first_complete{restarts};
        auto worker = [&] {
            for (;;) {
                const int r = next.fetch_add(1);
                if (r >= restarts || r > first_complete.load()) return;
                outcomes[static_cast<std::size_t>(r)] =
                    arrange_once(assets, space, boundary, initial_poses, config, eps, ceiling,
                                 mix_seed(base, static_cast<std::uint64_t>(r)));
                if (outcomes[static_cast<std::size_t>(r)].complete) {
                    int expected = first_complete.load();
                    while (r < expected && !first_complete.compare_exchange_weak(expected, r)) {
                    }
                }
            }
        };
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
        // Merge the same prefix a sequential run would have produced.
        const int fc = first_complete.load();
        ran_until = fc < restarts ? fc + 1 : restarts;
    }

    int pick = 0;
    for (int r = 1; r < ran_until; ++r) {
        if (outcomes[static_cast<std::size_t>(r)].cost < outcomes[static_cast<std::size_t>(pick)].cost) {
            pick = r;
        }
    }

    // All restarts start from the initial arrangement, so the winner's cost is
    // at most the initial cost: C never regresses.
    const Placement best = make_placement(assets, outcomes[static_cast<std::size_t>(pick)].poses);
    return direct_connectivity(assets, best, space, eps, delta_tol);
}

int oracle_connectivity_max(std::span<const RoadAsset> assets, const Space& space,
                            const GridSpec& grid, double eps, double delta_tol) {
    if (assets.size() > kOracleMaxAssets) {
        throw std::invalid_argument("oracle_connectivity_max: instance has " +
                                    std::to_string(assets.size()) + " assets, cap is " +
                                    std::to_string(kOracleMaxAssets));
    }
    for (const RoadAsset& asset : assets) {
        if (asset.nodes.size() > kOracleMaxNodes) {
            throw std::invalid_argument("oracle_connectivity_max: asset '" + asset.id + "' has " +
                                        std::to_string(asset.nodes.size()) + " nodes, cap is " +
                                        std::to_string(kOracleMaxNodes));
        }
    }
    if (const auto issues = validate_space(space); !issues.empty()) {
        throw std::invalid_argument("invalid space: " + issues.front());
    }
    if (assets.empty()) throw std::invalid_argument("oracle_connectivity_max: no assets");

    const BoundaryIndex boundary(assets);
    const int ceiling = reachable_pairs(boundary);
    const std::vector<Pose> all_poses = oracle_pose_grid(space, grid);

    struct GridPose {
        std::vector<Point2> world;
    };
    std::vector<std::vector<GridPose>> admissible(assets.size());
    for (std::size_t i = 0; i < assets.size(); ++i) {
        for (const Pose& pose : all_poses) {
            std::vector<Point2> world = apply_pose(assets[i], pose);
            const bool inside = std::all_of(world.begin(), world.end(), [&](const Point2& p) {
                return point_in_space(p, space);
            });
            if (inside) admissible[i].push_back(GridPose{std::move(world)});
        }
        if (admissible[i].empty()) return -1;
    }
    (void)delta_tol;  // pose-derived coordinates satisfy the shape constraints identically

    if (assets.size() == 1) return 0;

    int best = -1;
    std::vector<std::vector<Point2>> world(2);
    for (const GridPose& a : admissible[0]) {
        for (const GridPose& b : admissible[1]) {
            bool clash = false;
            for (const auto& [pa, pb] : assets[0].segments) {
                const Segment2 sp{a.world[pa], a.world[pb]};
                for (const auto& [qa, qb] : assets[1].segments) {
                    if (!segments_disjoint(sp, Segment2{b.world[qa], b.world[qb]}, eps)) {
                        clash = true;
                        break;
                    }
                }
                if (clash) break;
            }
            if (clash) continue;
            world[0] = a.world;
            world[1] = b.world;
            const CoreResult core = connectivity_core(assets, world, boundary, eps);
            best = std::max(best, core.C);
            if (best >= ceiling) return best;
        }
    }
    return best;
}

}  // namespace xcity
