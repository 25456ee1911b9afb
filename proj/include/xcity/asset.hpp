#pragma once

#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "xcity/geometry.hpp"

namespace xcity {

// Minimum distance between segment endpoints of a valid asset, in meters.
inline constexpr double kMinSegmentLength = 1e-3;

// Rigid road-asset graph. Node coordinates are the original world-map
// positions in local meters; segment indices are 0-based internally
// (1-based in files) with first < second.
struct RoadAsset {
    std::string id;
    std::vector<Point2> nodes;
    std::vector<std::pair<std::size_t, std::size_t>> segments;
    double value = 1.0;
    std::vector<std::string> scenario_tags;
};

// SE(2) transform: rotation by theta about the origin, then translation.
// Rotation only, never a reflection; theta is kept in (-pi, pi].
struct Pose {
    double tx = 0.0;
    double ty = 0.0;
    double theta = 0.0;
};

double wrap_angle(double theta);

struct AssetViolation {
    enum class Kind {
        TooFewNodes,
        NoSegments,
        NonFiniteNode,
        BadSegmentIndex,
        DuplicateSegment,
        DegenerateSegment,
        AnchorCoincident,
    };
    Kind kind;
    std::string detail;
};

struct Placement {
    std::map<std::string, Pose> entries;
    // Derived world coordinates, kept coherent with entries.
    std::map<std::string, std::vector<Point2>> world_nodes;
};

std::vector<Point2> apply_pose(const RoadAsset& asset, const Pose& pose);

// Node indices incident to exactly one internal segment.
std::set<std::size_t> boundary_nodes(const RoadAsset& asset);

std::vector<AssetViolation> validate_asset(const RoadAsset& asset);

// Douglas-Peucker down-sampling; endpoints preserved, every dropped point
// stays within perpendicular distance tol of the result.
std::vector<Point2> simplify_nodes(std::span<const Point2> polyline, double tol);

// Index form of simplify_nodes: ascending indices of the kept points.
std::vector<std::size_t> simplify_node_indices(std::span<const Point2> polyline, double tol);

Placement make_placement(std::span<const RoadAsset> assets, std::span<const Pose> poses);

// Poses in asset order extracted from a placement; throws std::invalid_argument
// if an asset has no entry.
std::vector<Pose> poses_in_order(std::span<const RoadAsset> assets, const Placement& placement);

// Largest pairwise node distance.
double asset_diameter(const RoadAsset& asset);

const char* violation_kind_name(AssetViolation::Kind kind);

}  // namespace xcity
