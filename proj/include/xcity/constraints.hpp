#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "xcity/asset.hpp"

namespace xcity {

// Tolerance on squared-distance slack for declaring a mapping rigid, m^2.
inline constexpr double kDefaultDeltaTol = 1e-6;

// Slack and orientation margins of the rigidity constraints for one or more
// assets. Dist slacks come in anchor-pair order (delta_12, then delta_1k,
// delta_2k for k >= 3); margins are one per node triple (1, 2, k).
struct SacsResidual {
    std::vector<double> deltas;
    std::vector<double> orientation_margins;  // <= 0 required

    double max_abs_delta() const;
    double max_margin() const;
    void append(const SacsResidual& other);
};

struct CacsViolation {
    std::size_t asset_a = 0;
    std::size_t segment_a = 0;
    std::size_t asset_b = 0;
    std::size_t segment_b = 0;
};

struct ContainmentViolation {
    std::size_t asset = 0;
    std::size_t node = 0;
};

struct FeasibilityReport {
    bool feasible = false;
    SacsResidual sacs;
    std::vector<CacsViolation> cacs_violations;
    std::vector<ContainmentViolation> containment_violations;
    std::vector<std::string> warnings;
};

enum class Phase { Phase1, Phase2 };

struct ConstraintCounts {
    std::int64_t dist = 0;
    std::int64_t orient = 0;
    std::int64_t cacs_ineq = 0;
    std::int64_t cacs_bin = 0;
    std::int64_t conn_ineq = 0;
    std::int64_t conn_bin = 0;

    bool operator==(const ConstraintCounts&) const = default;
};

// Rigidity residuals of one asset's mapped coordinates against its original
// geometry. Throws std::invalid_argument on a coordinate count mismatch.
// Triples whose original nodes are collinear carry a zero margin.
SacsResidual sacs_residual(const RoadAsset& asset, std::span<const Point2> coords);

// All unordered cross-asset segment pairs, (asset_a < asset_b) ordering.
std::vector<CacsViolation> cacs_pairs(std::span<const RoadAsset> assets);

std::vector<CacsViolation> cacs_check(std::span<const RoadAsset> assets,
                                      std::span<const std::vector<Point2>> world, double eps);

std::vector<ContainmentViolation> containment_check(std::span<const RoadAsset> assets,
                                                    std::span<const std::vector<Point2>> world,
                                                    const Space& space);

ConstraintCounts count_constraints(std::span<const RoadAsset> assets, Phase phase);

FeasibilityReport feasibility_report(std::span<const RoadAsset> assets,
                                     std::span<const std::vector<Point2>> world, const Space& space,
                                     double eps = kDefaultEps, double delta_tol = kDefaultDeltaTol);

FeasibilityReport feasibility_report(std::span<const RoadAsset> assets, const Placement& placement,
                                     const Space& space, double eps = kDefaultEps,
                                     double delta_tol = kDefaultDeltaTol);

// World coordinates in asset order; throws if the placement misses an asset.
std::vector<std::vector<Point2>> world_in_order(std::span<const RoadAsset> assets,
                                                const Placement& placement);

}  // namespace xcity
