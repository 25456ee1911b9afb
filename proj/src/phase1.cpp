#include "xcity/phase1.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <random>
#include <stdexcept>
#include <thread>

namespace xcity {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kContainmentFloor = 1e-12;

using Clock = std::chrono::steady_clock;

struct Deadline {
    bool armed = false;
    Clock::time_point at{};

    static Deadline from_seconds(double seconds) {
        Deadline d;
        if (seconds > 0.0) {
            d.armed = true;
            d.at = Clock::now() + std::chrono::duration_cast<Clock::duration>(
                                      std::chrono::duration<double>(seconds));
        }
        return d;
    }
    bool expired() const { return armed && Clock::now() >= at; }
};

// mt19937_64 has a fully specified sequence; the float conversions are our
// own so no libstdc++ distribution internals leak into the results.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Box-Muller, one fresh pair per call: no hidden cache to desynchronise.
    double normal(double sigma) {
        double u1 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        const double u2 = uniform01();
        return sigma * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
    }

    std::size_t index(std::size_t n) {
        const auto k = static_cast<std::size_t>(uniform01() * static_cast<double>(n));
        return k < n ? k : n - 1;
    }

private:
    std::mt19937_64 eng_;
};

double penetration_depth(const Segment2& p, const Segment2& q, double eps) {
    double d = point_line_distance(p.a, q.a, q.b);
    d = std::min(d, point_line_distance(p.b, q.a, q.b));
    d = std::min(d, point_line_distance(q.a, p.a, p.b));
    d = std::min(d, point_line_distance(q.b, p.a, p.b));
    return std::max(d, eps);
}

struct RestartOutcome {
    bool feasible = false;
    double best_penalty = std::numeric_limits<double>::infinity();
    std::vector<Pose> poses;
    std::vector<std::pair<int, double>> trace;
    bool completed = false;  // false when skipped or truncated by the deadline
};

Pose random_pose(Rng& rng, const BoundingBox& box) {
    return Pose{rng.uniform(box.min.x, box.max.x), rng.uniform(box.min.y, box.max.y),
                rng.uniform(-kPi, kPi)};
}

void rebuild_world(const RoadAsset& asset, const Pose& pose, std::vector<Point2>& out) {
    out.resize(asset.nodes.size());
    const double c = std::cos(pose.theta), s = std::sin(pose.theta);
    for (std::size_t i = 0; i < asset.nodes.size(); ++i) {
        const Point2& p = asset.nodes[i];
        out[i] = Point2{c * p.x - s * p.y + pose.tx, s * p.x + c * p.y + pose.ty};
    }
}

RestartOutcome anneal_once(std::span<const RoadAsset> assets, const Space& space,
                           const SearchConfig& config, double eps, std::uint64_t restart_seed,
                           const Deadline& deadline) {
    RestartOutcome out;
    Rng rng(restart_seed);
    const BoundingBox box = polygon_bbox(space.vertices);
    const double diag = distance(box.min, box.max);

    std::vector<Pose> poses(assets.size());
    std::vector<std::vector<Point2>> world(assets.size());
    for (std::size_t i = 0; i < assets.size(); ++i) {
        poses[i] = random_pose(rng, box);
        rebuild_world(assets[i], poses[i], world[i]);
    }

    double pen = penalty(assets, world, space, config.w_collision, config.w_containment, eps);
    out.best_penalty = pen;
    out.poses = poses;
    out.trace.emplace_back(0, pen);

    double temperature = config.initial_temperature;
    const double t0 = std::max(config.initial_temperature, 1e-12);
    std::vector<Point2> saved;

    int iter = 0;
    for (; iter < config.iterations && pen > 0.0; ++iter) {
        if ((iter & 0xff) == 0 && deadline.expired()) return out;  // truncated

        const double heat = temperature / t0;
        const double roll = rng.uniform01();
        double saved_pen = pen;

        if (assets.size() >= 2 && roll < 0.10) {
            // Swap the translations of two distinct assets; keep both headings.
            std::size_t i = rng.index(assets.size());
            std::size_t j = rng.index(assets.size() - 1);
            if (j >= i) ++j;
            std::swap(poses[i].tx, poses[j].tx);
            std::swap(poses[i].ty, poses[j].ty);
            rebuild_world(assets[i], poses[i], world[i]);
            rebuild_world(assets[j], poses[j], world[j]);
            pen = penalty(assets, world, space, config.w_collision, config.w_containment, eps);
            if (pen <= saved_pen ||
                rng.uniform01() < std::exp((saved_pen - pen) / std::max(temperature, 1e-12))) {
                // accepted
            } else {
                std::swap(poses[i].tx, poses[j].tx);
                std::swap(poses[i].ty, poses[j].ty);
                rebuild_world(assets[i], poses[i], world[i]);
                rebuild_world(assets[j], poses[j], world[j]);
                pen = saved_pen;
            }
        } else {
            const std::size_t i = rng.index(assets.size());
            const Pose before = poses[i];
            saved = world[i];
            if (assets.size() >= 2 ? roll < 0.55 : roll < 0.50) {
                const double sigma = std::max(0.05, 0.35 * diag * heat);
                poses[i].tx += rng.normal(sigma);
                poses[i].ty += rng.normal(sigma);
            } else {
                const double sigma = std::max(0.02, kPi * heat);
                poses[i].theta = wrap_angle(poses[i].theta + rng.normal(sigma));
            }
            rebuild_world(assets[i], poses[i], world[i]);
            pen = penalty(assets, world, space, config.w_collision, config.w_containment, eps);
            if (pen <= saved_pen ||
                rng.uniform01() < std::exp((saved_pen - pen) / std::max(temperature, 1e-12))) {
                // accepted
            } else {
                poses[i] = before;
                world[i] = saved;
                pen = saved_pen;
            }
        }

        if (pen < out.best_penalty) {
            out.best_penalty = pen;
            out.poses = poses;
            out.trace.emplace_back(iter + 1, pen);
        }
        temperature *= config.cooling;
    }

    out.feasible = out.best_penalty == 0.0;
    out.completed = true;
    return out;
}

std::string oversized_asset_diagnostic(std::span<const RoadAsset> assets, const Space& space) {
    const double space_diameter = polygon_diameter(space.vertices);
    for (const RoadAsset& asset : assets) {
        const double d = asset_diameter(asset);
        if (d > space_diameter) {
            return "asset '" + asset.id + "' has diameter " + std::to_string(d) +
                   " exceeding the space diameter " + std::to_string(space_diameter) +
                   "; no rigid pose can contain it";
        }
    }
    return {};
}

}  // namespace

double penalty(std::span<const RoadAsset> assets, std::span<const std::vector<Point2>> world,
               const Space& space, double w_collision, double w_containment, double eps) {
    double total = 0.0;
    for (std::size_t i = 0; i < assets.size(); ++i) {
        for (std::size_t j = i + 1; j < assets.size(); ++j) {
            for (const auto& [pa, pb] : assets[i].segments) {
                const Segment2 sp{world[i][pa], world[i][pb]};
                for (const auto& [qa, qb] : assets[j].segments) {
                    const Segment2 sq{world[j][qa], world[j][qb]};
                    if (!segments_disjoint(sp, sq, eps)) {
                        total += w_collision * penetration_depth(sp, sq, eps);
                    }
                }
            }
        }
    }
    for (std::size_t i = 0; i < assets.size(); ++i) {
        for (const Point2& p : world[i]) {
            if (!point_in_space(p, space)) {
                total += w_containment * std::max(distance_outside_space(p, space), kContainmentFloor);
            }
        }
    }
    return total;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    // splitmix64 step over seed ^ golden-ratio-scaled stream index.
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

int solver_thread_cap() {
    if (const char* env = std::getenv("XCITY_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    return 1;
}

Phase1Result search_placement(std::span<const RoadAsset> assets, const Space& space,
                              const SearchConfig& config, double eps, double delta_tol) {
    if (const auto issues = validate_space(space); !issues.empty()) {
        throw std::invalid_argument("invalid space: " + issues.front());
    }
    for (const RoadAsset& asset : assets) {
        const auto violations = validate_asset(asset);
        if (!violations.empty()) {
            throw std::invalid_argument("asset '" + asset.id + "' is invalid: " +
                                        violations.front().detail);
        }
    }
    if (assets.empty()) throw std::invalid_argument("search_placement: no assets");

    Phase1Result result;
    if (std::string diag = oversized_asset_diagnostic(assets, space); !diag.empty()) {
        result.status = Phase1Status::BudgetExhausted;
        result.diagnostic = std::move(diag);
        result.best_penalty = std::numeric_limits<double>::infinity();
        return result;
    }

    const Deadline deadline = Deadline::from_seconds(config.time_budget_seconds);
    const int restarts = std::max(1, config.restarts);
    std::vector<RestartOutcome> outcomes(static_cast<std::size_t>(restarts));

    const int threads = std::min(solver_thread_cap(), restarts);
    if (threads <= 1) {
        for (int r = 0; r < restarts; ++r) {
            if (deadline.expired()) break;
            outcomes[static_cast<std::size_t>(r)] =
                anneal_once(assets, space, config, eps, mix_seed(config.seed, static_cast<std::uint64_t>(r)), deadline);
            if (outcomes[static_cast<std::size_t>(r)].feasible) break;
        }
    } else {
        // Every restart derives its own stream from (seed, index), so the
        // merged answer is independent of scheduling and thread count.
        std::atomic<int> next{0};
        std::atomic<int> first_feasible{restarts};
        auto worker = [&] {
            for (;;) {
                const int r = next.fetch_add(1);
                if (r >= restarts) return;
                if (r > first_feasible.load() || deadline.expired()) return;
                outcomes[static_cast<std::size_t>(r)] =
                    anneal_once(assets, space, config, eps, mix_seed(config.seed, static_cast<std::uint64_t>(r)), deadline);
                if (outcomes[static_cast<std::size_t>(r)].feasible) {
                    int expected = first_feasible.load();
                    while (r < expected && !first_feasible.compare_exchange_weak(expected, r)) {
                    }
                }
            }
        };
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }

    // Lowest-index feasible restart wins; otherwise the lowest penalty seen.
    int pick = -1;
    for (int r = 0; r < restarts; ++r) {
        if (outcomes[static_cast<std::size_t>(r)].feasible) {
            pick = r;
            break;
        }
    }
    if (pick < 0) {
        double best = std::numeric_limits<double>::infinity();
        for (int r = 0; r < restarts; ++r) {
            const RestartOutcome& o = outcomes[static_cast<std::size_t>(r)];
            if (!o.poses.empty() && o.best_penalty < best) {
                best = o.best_penalty;
                pick = r;
            }
        }
    }
    if (pick < 0) {  // deadline fired before any restart produced a state
        result.status = Phase1Status::BudgetExhausted;
        result.diagnostic = "time budget exhausted before the first restart completed";
        result.best_penalty = std::numeric_limits<double>::infinity();
        return result;
    }

    RestartOutcome& chosen = outcomes[static_cast<std::size_t>(pick)];
    result.poses = std::move(chosen.poses);
    result.trace = std::move(chosen.trace);
    result.best_penalty = chosen.best_penalty;
    result.placement = make_placement(assets, result.poses);
    result.report = feasibility_report(assets, result.placement, space, eps, delta_tol);
    result.status = result.report.feasible ? Phase1Status::Feasible : Phase1Status::BudgetExhausted;
    if (result.status == Phase1Status::BudgetExhausted && result.diagnostic.empty()) {
        result.diagnostic = "no feasible placement within the iteration budget (best penalty " +
                            std::to_string(result.best_penalty) + ")";
    }
    return result;
}

SubsetSelection select_subset(std::span<const RoadAsset> assets, const Space& space,
                              const SearchConfig& config, std::size_t subset_cap, double eps,
                              double delta_tol) {
    if (assets.empty()) throw std::invalid_argument("select_subset: no assets");

    SubsetSelection selection;
    const Deadline deadline = Deadline::from_seconds(config.time_budget_seconds);

    auto run_trial = [&](const std::vector<std::size_t>& members,
                         std::uint64_t stream) -> Phase1Result {
        std::vector<RoadAsset> subset;
        subset.reserve(members.size());
        for (std::size_t m : members) subset.push_back(assets[m]);
        SearchConfig trial_config = config;
        trial_config.seed = mix_seed(config.seed, stream);
        if (deadline.armed) {
            const double left = std::chrono::duration<double>(deadline.at - Clock::now()).count();
            trial_config.time_budget_seconds = std::max(left, 1e-3);
        }
        return search_placement(subset, space, trial_config, eps, delta_tol);
    };

    auto record_trial = [&](const std::vector<std::size_t>& members, double value,
                            Phase1Status status) {
        SubsetTrial trial;
        for (std::size_t m : members) trial.ids.push_back(assets[m].id);
        trial.value = value;
        trial.status = status;
        selection.trials.push_back(std::move(trial));
    };

    if (assets.size() <= subset_cap) {
        struct Candidate {
            std::vector<std::size_t> members;
            std::vector<std::string> ids;
            double value = 0.0;
        };
        std::vector<Candidate> candidates;
        const std::size_t n = assets.size();
        for (std::uint64_t mask = 1; mask < (1ULL << n); ++mask) {
            Candidate c;
            for (std::size_t i = 0; i < n; ++i) {
                if (mask & (1ULL << i)) {
                    c.members.push_back(i);
                    c.ids.push_back(assets[i].id);
                    c.value += assets[i].value;
                }
            }
            candidates.push_back(std::move(c));
        }
        std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
            if (a.value != b.value) return a.value > b.value;
            if (a.members.size() != b.members.size()) return a.members.size() < b.members.size();
            return a.ids < b.ids;
        });

        for (std::size_t rank = 0; rank < candidates.size(); ++rank) {
            if (deadline.expired()) break;
            const Candidate& c = candidates[rank];
            Phase1Result r = run_trial(c.members, rank);
            record_trial(c.members, c.value, r.status);
            if (r.status == Phase1Status::Feasible) {
                selection.status = SubsetSelection::Status::Selected;
                selection.subset_ids = c.ids;
                selection.total_value = c.value;
                selection.result = std::move(r);
                return selection;
            }
            // keep the most recent failure reason so the caller gets a diagnostic
            selection.result.diagnostic = std::move(r.diagnostic);
        }
        if (selection.result.diagnostic.empty()) {
            selection.result.diagnostic = "time budget exhausted before any subset trial completed";
        }
        return selection;  // NoFeasibleSubset
    }

    // Greedy beyond the enumeration cap: insert by decreasing value, keep an
    // asset only if the grown subset still admits a placement.
    std::vector<std::size_t> order(assets.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (assets[a].value != assets[b].value) return assets[a].value > assets[b].value;
        return assets[a].id < assets[b].id;
    });

    std::vector<std::size_t> current;
    Phase1Result best_result;
    double current_value = 0.0;
    std::uint64_t stream = 0;
    for (std::size_t idx : order) {
        if (deadline.expired()) break;
        std::vector<std::size_t> attempt = current;
        attempt.push_back(idx);
        std::sort(attempt.begin(), attempt.end());
        Phase1Result r = run_trial(attempt, stream++);
        record_trial(attempt, current_value + assets[idx].value, r.status);
        if (r.status == Phase1Status::Feasible) {
            current = std::move(attempt);
            current_value += assets[idx].value;
            best_result = std::move(r);
        } else if (current.empty()) {
            // surface some failure reason in case nothing ever fits
            selection.result.diagnostic = std::move(r.diagnostic);
        }
    }
    if (!current.empty()) {
        selection.status = SubsetSelection::Status::Selected;
        for (std::size_t m : current) selection.subset_ids.push_back(assets[m].id);
        selection.total_value = current_value;
        selection.result = std::move(best_result);
    } else if (selection.result.diagnostic.empty()) {
        selection.result.diagnostic = "time budget exhausted before any subset trial completed";
    }
    return selection;
}

std::vector<Pose> oracle_pose_grid(const Space& space, const GridSpec& grid) {
    if (!(grid.dxy > 0.0) || !(grid.dtheta > 0.0)) {
        throw std::invalid_argument("oracle grid steps must be positive");
    }
    const BoundingBox box = polygon_bbox(space.vertices);
    std::vector<double> xs, ys, thetas;
    for (double x = box.min.x; x <= box.max.x + 1e-12; x += grid.dxy) xs.push_back(x);
    for (double y = box.min.y; y <= box.max.y + 1e-12; y += grid.dxy) ys.push_back(y);
    const auto steps = static_cast<std::size_t>(std::max(1.0, std::round(2.0 * kPi / grid.dtheta)));
    for (std::size_t k = 0; k < steps; ++k) {
        thetas.push_back(wrap_angle(static_cast<double>(k) * grid.dtheta));
    }
    std::vector<Pose> out;
    out.reserve(xs.size() * ys.size() * thetas.size());
    for (double x : xs) {
        for (double y : ys) {
            for (double t : thetas) out.push_back(Pose{x, y, t});
        }
    }
    return out;
}

OraclePlacement oracle_search_placement(std::span<const RoadAsset> assets, const Space& space,
                                        const GridSpec& grid, double eps, double delta_tol) {
    if (assets.size() > kOracleMaxAssets) {
        throw std::invalid_argument("oracle_search_placement: instance has " +
                                    std::to_string(assets.size()) + " assets, cap is " +
                                    std::to_string(kOracleMaxAssets));
    }
    for (const RoadAsset& asset : assets) {
        if (asset.nodes.size() > kOracleMaxNodes) {
            throw std::invalid_argument("oracle_search_placement: asset '" + asset.id + "' has " +
                                        std::to_string(asset.nodes.size()) + " nodes, cap is " +
                                        std::to_string(kOracleMaxNodes));
        }
    }
    if (const auto issues = validate_space(space); !issues.empty()) {
        throw std::invalid_argument("invalid space: " + issues.front());
    }
    if (assets.empty()) throw std::invalid_argument("oracle_search_placement: no assets");

    const std::vector<Pose> all_poses = oracle_pose_grid(space, grid);

    // Containment prefilter: keep (pose, world coords) pairs per asset.
    struct GridPose {
        Pose pose;
        std::vector<Point2> world;
    };
    std::vector<std::vector<GridPose>> admissible(assets.size());
    for (std::size_t i = 0; i < assets.size(); ++i) {
        for (const Pose& pose : all_poses) {
            std::vector<Point2> world = apply_pose(assets[i], pose);
            const bool inside = std::all_of(world.begin(), world.end(), [&](const Point2& p) {
                return point_in_space(p, space);
            });
            if (inside) admissible[i].push_back(GridPose{pose, std::move(world)});
        }
        if (admissible[i].empty()) return OraclePlacement{};  // Infeasible
    }

    auto finish = [&](std::vector<Pose> poses) {
        OraclePlacement out;
        const Placement placement = make_placement(assets, poses);
        const FeasibilityReport report = feasibility_report(assets, placement, space, eps, delta_tol);
        if (!report.feasible) return OraclePlacement{};  // exact check is authoritative
        out.status = OracleStatus::Feasible;
        out.poses = std::move(poses);
        return out;
    };

    if (assets.size() == 1) {
        return finish({admissible[0].front().pose});
    }

    for (const GridPose& a : admissible[0]) {
        for (const GridPose& b : admissible[1]) {
            const std::vector<Point2>* world[2] = {&a.world, &b.world};
            bool clash = false;
            for (const auto& [pa, pb] : assets[0].segments) {
                const Segment2 sp{(*world[0])[pa], (*world[0])[pb]};
                for (const auto& [qa, qb] : assets[1].segments) {
                    const Segment2 sq{(*world[1])[qa], (*world[1])[qb]};
                    if (!segments_disjoint(sp, sq, eps)) {
                        clash = true;
                        break;
                    }
                }
                if (clash) break;
            }
            if (!clash) {
                OraclePlacement out = finish({a.pose, b.pose});
                if (out.status == OracleStatus::Feasible) return out;
            }
        }
    }
    return OraclePlacement{};
}

}  // namespace xcity
