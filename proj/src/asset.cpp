#include "xcity/asset.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace xcity {

double wrap_angle(double theta) {
    const double two_pi = 2.0 * std::numbers::pi;
    theta = std::fmod(theta, two_pi);
    if (theta <= -std::numbers::pi) theta += two_pi;
    else if (theta > std::numbers::pi) theta -= two_pi;
    return theta;
}

std::vector<Point2> apply_pose(const RoadAsset& asset, const Pose& pose) {
    const double c = std::cos(pose.theta);
    const double s = std::sin(pose.theta);
    std::vector<Point2> out;
    out.reserve(asset.nodes.size());
    for (const Point2& p : asset.nodes) {
        out.push_back({c * p.x - s * p.y + pose.tx, s * p.x + c * p.y + pose.ty});
    }
    return out;
}

std::set<std::size_t> boundary_nodes(const RoadAsset& asset) {
    std::vector<int> degree(asset.nodes.size(), 0);
    for (const auto& [i, j] : asset.segments) {
        if (i < degree.size()) ++degree[i];
        if (j < degree.size()) ++degree[j];
    }
    std::set<std::size_t> out;
    for (std::size_t k = 0; k < degree.size(); ++k) {
        if (degree[k] == 1) out.insert(k);
    }
    return out;
}

std::vector<AssetViolation> validate_asset(const RoadAsset& asset) {
    using Kind = AssetViolation::Kind;
    std::vector<AssetViolation> out;
    const std::size_t n = asset.nodes.size();

    if (n < 2) out.push_back({Kind::TooFewNodes, "asset '" + asset.id + "' has fewer than 2 nodes"});
    if (asset.segments.empty()) out.push_back({Kind::NoSegments, "asset '" + asset.id + "' has no segments"});

    for (std::size_t k = 0; k < n; ++k) {
        if (!is_finite(asset.nodes[k])) {
            out.push_back({Kind::NonFiniteNode, "node " + std::to_string(k + 1) + " is not finite"});
        }
    }

    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (std::size_t s = 0; s < asset.segments.size(); ++s) {
        const auto [i, j] = asset.segments[s];
        const std::string tag = "segment " + std::to_string(s + 1);
        if (i >= n || j >= n || i == j) {
            out.push_back({Kind::BadSegmentIndex, tag + " references invalid nodes"});
            continue;
        }
        const auto key = std::minmax(i, j);
        if (!seen.insert(key).second) {
            out.push_back({Kind::DuplicateSegment,
                           tag + " duplicates (" + std::to_string(key.first + 1) + "," +
                               std::to_string(key.second + 1) + ")"});
        }
        if (distance(asset.nodes[i], asset.nodes[j]) < kMinSegmentLength) {
            out.push_back({Kind::DegenerateSegment, tag + " endpoints closer than 1e-3 m"});
        }
    }

    if (n >= 2 && distance(asset.nodes[0], asset.nodes[1]) < kMinSegmentLength) {
        out.push_back({Kind::AnchorCoincident, "anchor nodes 1 and 2 coincide"});
    }
    return out;
}

namespace {

void simplify_range(std::span<const Point2> pts, std::size_t lo, std::size_t hi, double tol,
                    std::vector<bool>& keep) {
    if (hi <= lo + 1) return;
    const Segment2 chord{pts[lo], pts[hi]};
    double max_dev = -1.0;
    std::size_t split = lo;
    for (std::size_t k = lo + 1; k < hi; ++k) {
        const double dev = point_segment_distance(pts[k], chord);
        if (dev > max_dev) {
            max_dev = dev;
            split = k;
        }
    }
    if (max_dev > tol) {
        keep[split] = true;
        simplify_range(pts, lo, split, tol, keep);
        simplify_range(pts, split, hi, tol, keep);
    }
}

}  // namespace

std::vector<std::size_t> simplify_node_indices(std::span<const Point2> polyline, double tol) {
    if (polyline.size() < 2) throw std::invalid_argument("simplify_nodes: need at least 2 points");
    if (!(tol > 0.0)) throw std::invalid_argument("simplify_nodes: tol must be positive");
    std::vector<bool> keep(polyline.size(), false);
    keep.front() = keep.back() = true;
    simplify_range(polyline, 0, polyline.size() - 1, tol, keep);
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < polyline.size(); ++k) {
        if (keep[k]) out.push_back(k);
    }
    return out;
}

std::vector<Point2> simplify_nodes(std::span<const Point2> polyline, double tol) {
    std::vector<Point2> out;
    for (std::size_t k : simplify_node_indices(polyline, tol)) out.push_back(polyline[k]);
    return out;
}

Placement make_placement(std::span<const RoadAsset> assets, std::span<const Pose> poses) {
    if (assets.size() != poses.size()) {
        throw std::invalid_argument("make_placement: asset/pose count mismatch");
    }
    Placement p;
    for (std::size_t k = 0; k < assets.size(); ++k) {
        Pose pose = poses[k];
        pose.theta = wrap_angle(pose.theta);
        p.entries[assets[k].id] = pose;
        p.world_nodes[assets[k].id] = apply_pose(assets[k], pose);
    }
    return p;
}

std::vector<Pose> poses_in_order(std::span<const RoadAsset> assets, const Placement& placement) {
    std::vector<Pose> out;
    out.reserve(assets.size());
    for (const RoadAsset& a : assets) {
        auto it = placement.entries.find(a.id);
        if (it == placement.entries.end()) {
            throw std::invalid_argument("placement has no pose for asset '" + a.id + "'");
        }
        out.push_back(it->second);
    }
    return out;
}

double asset_diameter(const RoadAsset& asset) { return polygon_diameter(asset.nodes); }

const char* violation_kind_name(AssetViolation::Kind kind) {
    switch (kind) {
        case AssetViolation::Kind::TooFewNodes: return "TooFewNodes";
        case AssetViolation::Kind::NoSegments: return "NoSegments";
        case AssetViolation::Kind::NonFiniteNode: return "NonFiniteNode";
        case AssetViolation::Kind::BadSegmentIndex: return "BadSegmentIndex";
        case AssetViolation::Kind::DuplicateSegment: return "DuplicateSegment";
        case AssetViolation::Kind::DegenerateSegment: return "DegenerateSegment";
        case AssetViolation::Kind::AnchorCoincident: return "AnchorCoincident";
    }
    return "Unknown";
}

}  // namespace xcity
