#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "xcity/asset.hpp"

namespace xcity {

struct LatLon {
    double lat = 0.0;  // degrees
    double lon = 0.0;  // degrees
};

struct OsmWay {
    std::int64_t id = 0;
    std::vector<std::int64_t> refs;
    std::map<std::string, std::string> tags;
};

struct RawOsmGraph {
    std::map<std::int64_t, LatLon> nodes;
    std::vector<OsmWay> ways;
};

class OsmParseError : public std::runtime_error {
public:
    OsmParseError(std::size_t offset, const std::string& what)
        : std::runtime_error("osm parse error at byte " + std::to_string(offset) + ": " + what),
          byte_offset(offset) {}
    std::size_t byte_offset;
};

class OsmReferenceError : public std::runtime_error {
public:
    OsmReferenceError(std::int64_t way, std::int64_t ref)
        : std::runtime_error("way " + std::to_string(way) + " references missing node " +
                             std::to_string(ref)),
          way_id(way),
          node_ref(ref) {}
    std::int64_t way_id;
    std::int64_t node_ref;
};

// Parses the supported OSM XML subset: node, way, nd, tag. Relations and
// unknown elements are skipped. Throws OsmParseError / OsmReferenceError.
RawOsmGraph parse_osm(std::string_view xml);

std::string serialize_osm(const RawOsmGraph& graph);

// Equirectangular projection about the node centroid; centroid maps to (0,0).
std::map<std::int64_t, Point2> project_local(const RawOsmGraph& graph);

inline constexpr double kEarthRadiusM = 6'371'000.0;
inline constexpr double kDefaultSimplifyTol = 1.0;

class AssetExtractionError : public std::runtime_error {
public:
    AssetExtractionError(const std::string& what, std::vector<AssetViolation> v = {})
        : std::runtime_error(what), violations(std::move(v)) {}
    std::vector<AssetViolation> violations;
};

// Cuts one road asset out of the selected ways: project, down-sample each way
// (junction nodes protected), merge shared osm nodes, recenter to the centroid.
RoadAsset extract_asset(const RawOsmGraph& graph, std::span<const std::int64_t> way_ids,
                        double simplify_tol, const std::string& id, double value);

}  // namespace xcity
