#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "xcity/constraints.hpp"

namespace xcity {

struct SearchConfig {
    std::uint64_t seed = 1;
    int restarts = 8;
    int iterations = 25000;
    double initial_temperature = 5.0;
    double cooling = 0.9995;
    double w_collision = 1.0;
    double w_containment = 1.0;
    // 0 disables the wall-clock cap. A positive cap can truncate the search,
    // in which case bit-for-bit reproducibility is no longer guaranteed.
    double time_budget_seconds = 0.0;
};

enum class Phase1Status { Feasible, BudgetExhausted };

struct Phase1Result {
    Phase1Status status = Phase1Status::BudgetExhausted;
    std::vector<Pose> poses;  // best placement found, aligned with the asset list
    Placement placement;
    FeasibilityReport report;
    double best_penalty = 0.0;
    std::vector<std::pair<int, double>> trace;  // (iteration, penalty) improvements
    std::string diagnostic;
};

// Merit function replacing the constrained model: collision penetration plus
// containment excursion, weighted. Zero exactly when the placement is feasible.
double penalty(std::span<const RoadAsset> assets, std::span<const std::vector<Point2>> world,
               const Space& space, double w_collision, double w_containment,
               double eps = kDefaultEps);

// Multi-start simulated annealing over per-asset poses. Feasible results are
// re-validated through feasibility_report before being returned.
Phase1Result search_placement(std::span<const RoadAsset> assets, const Space& space,
                              const SearchConfig& config, double eps = kDefaultEps,
                              double delta_tol = kDefaultDeltaTol);

struct SubsetTrial {
    std::vector<std::string> ids;
    double value = 0.0;
    Phase1Status status = Phase1Status::BudgetExhausted;
};

struct SubsetSelection {
    enum class Status { Selected, NoFeasibleSubset };
    Status status = Status::NoFeasibleSubset;
    std::vector<std::string> subset_ids;
    double total_value = 0.0;
    Phase1Result result;
    std::vector<SubsetTrial> trials;
};

inline constexpr std::size_t kDefaultSubsetCap = 12;

// Outer loop of the selection objective: subsets tried in decreasing total
// value (ties: fewer assets, then id order); the first proven-feasible subset
// wins. Beyond the enumeration cap, greedy value-ordered insertion.
SubsetSelection select_subset(std::span<const RoadAsset> assets, const Space& space,
                              const SearchConfig& config, std::size_t subset_cap = kDefaultSubsetCap,
                              double eps = kDefaultEps, double delta_tol = kDefaultDeltaTol);

struct GridSpec {
    double dxy = 0.5;
    double dtheta = 0.78539816339744830961;  // pi/4
};

enum class OracleStatus { Feasible, Infeasible };

struct OraclePlacement {
    OracleStatus status = OracleStatus::Infeasible;
    std::vector<Pose> poses;
};

inline constexpr std::size_t kOracleMaxAssets = 2;
inline constexpr std::size_t kOracleMaxNodes = 5;

// Brute-force pose-grid scan; Feasible results are exact, Infeasible verdicts
// are qualified by the grid resolution. Refuses instances above the size caps.
OraclePlacement oracle_search_placement(std::span<const RoadAsset> assets, const Space& space,
                                        const GridSpec& grid, double eps = kDefaultEps,
                                        double delta_tol = kDefaultDeltaTol);

// Pose grid the oracles scan for one asset inside the space bounding box.
std::vector<Pose> oracle_pose_grid(const Space& space, const GridSpec& grid);

// Deterministic per-stream seed derivation.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

// Parallel restart cap: XCITY_THREADS env var, else 1.
int solver_thread_cap();

}  // namespace xcity
