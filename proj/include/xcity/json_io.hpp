#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "xcity/phase1.hpp"
#include "xcity/phase2.hpp"

namespace xcity {

// File-format problems (missing keys, wrong types, bad indices).
struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Node and segment indices are 1-based in every file, 0-based in memory.

nlohmann::json asset_to_json(const RoadAsset& asset);
RoadAsset asset_from_json(const nlohmann::json& j);
RoadAsset load_asset(const std::string& path);
void save_asset(const RoadAsset& asset, const std::string& path);

nlohmann::json space_to_json(const Space& space);
Space space_from_json(const nlohmann::json& j);

nlohmann::json placement_to_json(const Placement& placement);  // poses only
// Rebuilds world coordinates for every asset present in the poses object.
Placement placement_from_json(const nlohmann::json& j, std::span<const RoadAsset> assets);

nlohmann::json report_to_json(const FeasibilityReport& report);

struct ProjectConfig {
    Space space;
    double eps = kDefaultEps;
    double delta_tol = kDefaultDeltaTol;
    std::size_t subset_cap = kDefaultSubsetCap;
    SearchConfig solver;
    std::vector<std::string> asset_paths;
    std::vector<RoadAsset> assets;
};

// Asset paths in the file resolve relative to the config file's directory.
ProjectConfig load_config(const std::string& path);

nlohmann::json phase1_result_to_json(const SubsetSelection& selection, const Space& space,
                                     std::span<const RoadAsset> selected_assets);
nlohmann::json connectivity_to_json(const ConnectivityResult& result, const Space& space,
                                    std::span<const RoadAsset> assets);

// Parsed result file of either phase; self-contained for downstream commands.
struct LoadedResult {
    std::string kind;    // "phase1_result" | "phase2_result"
    std::string status;  // "feasible" | "budget_exhausted" | "no_feasible_subset" | "ok"
    Space space;
    std::vector<RoadAsset> assets;
    Placement placement;
    // Phase-2 transitions as world segments, for rendering.
    struct Transition {
        std::string from_asset;
        std::string to_asset;
        Point2 from_xy;
        Point2 to_xy;
    };
    std::vector<Transition> transitions;
};
LoadedResult result_from_json(const nlohmann::json& j);

std::string dump_json(const nlohmann::json& j);  // stable 2-space indent, trailing newline
nlohmann::json load_json_file(const std::string& path);
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace xcity
