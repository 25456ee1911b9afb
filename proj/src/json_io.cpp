#include "xcity/json_io.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

namespace xcity {

namespace {

const nlohmann::json& require(const nlohmann::json& j, const char* key) {
    const auto it = j.find(key);
    if (it == j.end()) throw SchemaError(std::string("missing required key '") + key + "'");
    return *it;
}

double require_number(const nlohmann::json& j, const char* key) {
    const nlohmann::json& v = require(j, key);
    if (!v.is_number()) throw SchemaError(std::string("key '") + key + "' must be a number");
    return v.get<double>();
}

Point2 point_from_json(const nlohmann::json& j) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
        throw SchemaError("point must be a [x, y] number pair");
    }
    return Point2{j[0].get<double>(), j[1].get<double>()};
}

nlohmann::json point_to_json(const Point2& p) { return nlohmann::json::array({p.x, p.y}); }

std::string status_name(Phase1Status s) {
    return s == Phase1Status::Feasible ? "feasible" : "budget_exhausted";
}

}  // namespace

nlohmann::json asset_to_json(const RoadAsset& asset) {
    nlohmann::json j;
    j["id"] = asset.id;
    nlohmann::json nodes = nlohmann::json::array();
    for (const Point2& p : asset.nodes) nodes.push_back(point_to_json(p));
    j["nodes"] = std::move(nodes);
    nlohmann::json segments = nlohmann::json::array();
    for (const auto& [a, b] : asset.segments) {
        segments.push_back(nlohmann::json::array({a + 1, b + 1}));
    }
    j["segments"] = std::move(segments);
    j["value"] = asset.value;
    j["scenario_tags"] = asset.scenario_tags;
    return j;
}

RoadAsset asset_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw SchemaError("asset must be a JSON object");
    RoadAsset asset;
    const nlohmann::json& id = require(j, "id");
    if (!id.is_string()) throw SchemaError("asset id must be a string");
    asset.id = id.get<std::string>();

    const nlohmann::json& nodes = require(j, "nodes");
    if (!nodes.is_array()) throw SchemaError("asset nodes must be an array");
    for (const auto& n : nodes) asset.nodes.push_back(point_from_json(n));

    const nlohmann::json& segments = require(j, "segments");
    if (!segments.is_array()) throw SchemaError("asset segments must be an array");
    for (const auto& s : segments) {
        if (!s.is_array() || s.size() != 2 || !s[0].is_number_integer() ||
            !s[1].is_number_integer()) {
            throw SchemaError("segment must be an [i, j] index pair");
        }
        const auto a = s[0].get<long long>();
        const auto b = s[1].get<long long>();
        if (a < 1 || b < 1 || static_cast<std::size_t>(a) > asset.nodes.size() ||
            static_cast<std::size_t>(b) > asset.nodes.size()) {
            throw SchemaError("segment index out of range for asset '" + asset.id +
                              "' (indices are 1-based)");
        }
        asset.segments.emplace_back(static_cast<std::size_t>(a - 1),
                                    static_cast<std::size_t>(b - 1));
    }
    if (const auto it = j.find("value"); it != j.end()) {
        if (!it->is_number()) throw SchemaError("asset value must be a number");
        asset.value = it->get<double>();
    }
    if (const auto it = j.find("scenario_tags"); it != j.end()) {
        if (!it->is_array()) throw SchemaError("scenario_tags must be an array of strings");
        for (const auto& t : *it) {
            if (!t.is_string()) throw SchemaError("scenario_tags must be an array of strings");
            asset.scenario_tags.push_back(t.get<std::string>());
        }
    }
    return asset;
}

RoadAsset load_asset(const std::string& path) {
    RoadAsset asset = asset_from_json(load_json_file(path));
    if (const auto violations = validate_asset(asset); !violations.empty()) {
        throw SchemaError("asset file '" + path + "' is invalid: " + violations.front().detail);
    }
    return asset;
}

void save_asset(const RoadAsset& asset, const std::string& path) {
    write_text_file(path, dump_json(asset_to_json(asset)));
}

nlohmann::json space_to_json(const Space& space) {
    nlohmann::json j = nlohmann::json::array();
    for (const Point2& v : space.vertices) j.push_back(point_to_json(v));
    return j;
}

Space space_from_json(const nlohmann::json& j) {
    if (!j.is_array()) throw SchemaError("space must be an array of [x, y] vertices");
    Space space;
    for (const auto& v : j) space.vertices.push_back(point_from_json(v));
    if (const auto issues = validate_space(space); !issues.empty()) {
        throw SchemaError("space polygon rejected: " + issues.front());
    }
    return space;
}

nlohmann::json placement_to_json(const Placement& placement) {
    nlohmann::json poses = nlohmann::json::object();
    for (const auto& [id, pose] : placement.entries) {
        poses[id] = {{"tx", pose.tx}, {"ty", pose.ty}, {"theta", pose.theta}};
    }
    return nlohmann::json{{"poses", std::move(poses)}};
}

Placement placement_from_json(const nlohmann::json& j, std::span<const RoadAsset> assets) {
    if (!j.is_object()) throw SchemaError("placement must be a JSON object");
    const nlohmann::json& poses = require(j, "poses");
    if (!poses.is_object()) throw SchemaError("placement poses must map asset id to pose");
    Placement placement;
    for (const auto& [id, pj] : poses.items()) {
        Pose pose{require_number(pj, "tx"), require_number(pj, "ty"), require_number(pj, "theta")};
        const RoadAsset* asset = nullptr;
        for (const RoadAsset& a : assets) {
            if (a.id == id) {
                asset = &a;
                break;
            }
        }
        if (!asset) throw SchemaError("placement references unknown asset '" + id + "'");
        placement.entries[id] = pose;
        placement.world_nodes[id] = apply_pose(*asset, pose);
    }
    return placement;
}

nlohmann::json report_to_json(const FeasibilityReport& report) {
    nlohmann::json j;
    j["feasible"] = report.feasible;
    j["max_abs_delta"] = report.sacs.max_abs_delta();
    j["max_orientation_margin"] = report.sacs.max_margin();
    nlohmann::json cacs = nlohmann::json::array();
    for (const CacsViolation& v : report.cacs_violations) {
        cacs.push_back({{"asset_a", v.asset_a + 1},
                        {"segment_a", v.segment_a + 1},
                        {"asset_b", v.asset_b + 1},
                        {"segment_b", v.segment_b + 1}});
    }
    j["cacs_violations"] = std::move(cacs);
    nlohmann::json containment = nlohmann::json::array();
    for (const ContainmentViolation& v : report.containment_violations) {
        containment.push_back({{"asset", v.asset + 1}, {"node", v.node + 1}});
    }
    j["containment_violations"] = std::move(containment);
    j["warnings"] = report.warnings;
    return j;
}

ProjectConfig load_config(const std::string& path) {
    const nlohmann::json j = load_json_file(path);
    if (!j.is_object()) throw SchemaError("config must be a JSON object");

    ProjectConfig config;
    config.space = space_from_json(require(j, "space"));
    if (j.contains("eps")) config.eps = require_number(j, "eps");
    if (j.contains("delta_tol")) config.delta_tol = require_number(j, "delta_tol");
    if (!(config.eps > 0.0) || !(config.delta_tol > 0.0)) {
        throw SchemaError("eps and delta_tol must be positive");
    }
    if (j.contains("subset_cap")) {
        const double cap = require_number(j, "subset_cap");
        if (cap < 1) throw SchemaError("subset_cap must be >= 1");
        config.subset_cap = static_cast<std::size_t>(cap);
    }

    if (const auto it = j.find("solver"); it != j.end()) {
        const nlohmann::json& s = *it;
        if (!s.is_object()) throw SchemaError("solver must be a JSON object");
        if (s.contains("seed")) config.solver.seed = s["seed"].get<std::uint64_t>();
        if (s.contains("restarts")) config.solver.restarts = s["restarts"].get<int>();
        if (s.contains("iterations")) config.solver.iterations = s["iterations"].get<int>();
        if (s.contains("initial_temperature")) {
            config.solver.initial_temperature = s["initial_temperature"].get<double>();
        }
        if (s.contains("cooling")) config.solver.cooling = s["cooling"].get<double>();
        if (s.contains("w_collision")) config.solver.w_collision = s["w_collision"].get<double>();
        if (s.contains("w_containment")) {
            config.solver.w_containment = s["w_containment"].get<double>();
        }
        if (s.contains("time_budget_seconds")) {
            config.solver.time_budget_seconds = s["time_budget_seconds"].get<double>();
        }
        if (config.solver.restarts < 1 || config.solver.iterations < 1) {
            throw SchemaError("solver restarts and iterations must be >= 1");
        }
    }

    const nlohmann::json& files = require(j, "assets");
    if (!files.is_array()) throw SchemaError("assets must be an array of file paths");
    const std::filesystem::path base = std::filesystem::path(path).parent_path();
    for (const auto& f : files) {
        if (!f.is_string()) throw SchemaError("asset paths must be strings");
        std::filesystem::path p(f.get<std::string>());
        if (p.is_relative()) p = base / p;
        config.asset_paths.push_back(p.string());
        config.assets.push_back(load_asset(p.string()));
    }
    for (std::size_t i = 0; i < config.assets.size(); ++i) {
        for (std::size_t k = i + 1; k < config.assets.size(); ++k) {
            if (config.assets[i].id == config.assets[k].id) {
                throw SchemaError("duplicate asset id '" + config.assets[i].id + "'");
            }
        }
    }
    return config;
}

nlohmann::json phase1_result_to_json(const SubsetSelection& selection, const Space& space,
                                     std::span<const RoadAsset> selected_assets) {
    nlohmann::json j;
    j["kind"] = "phase1_result";
    const bool selected = selection.status == SubsetSelection::Status::Selected;
    j["status"] = selected ? status_name(selection.result.status) : "no_feasible_subset";
    j["space"] = space_to_json(space);
    j["subset"] = selection.subset_ids;
    j["total_value"] = selection.total_value;

    nlohmann::json assets = nlohmann::json::array();
    for (const RoadAsset& a : selected_assets) assets.push_back(asset_to_json(a));
    j["assets"] = std::move(assets);

    j["placement"] = placement_to_json(selection.result.placement);
    j["report"] = report_to_json(selection.result.report);
    j["best_penalty"] = selection.result.best_penalty;
    j["diagnostic"] = selection.result.diagnostic;

    nlohmann::json trials = nlohmann::json::array();
    for (const SubsetTrial& t : selection.trials) {
        trials.push_back(
            {{"ids", t.ids}, {"value", t.value}, {"status", status_name(t.status)}});
    }
    j["trials"] = std::move(trials);

    nlohmann::json trace = nlohmann::json::array();
    for (const auto& [iter, pen] : selection.result.trace) {
        trace.push_back(nlohmann::json::array({iter, pen}));
    }
    j["trace"] = std::move(trace);
    return j;
}

nlohmann::json connectivity_to_json(const ConnectivityResult& result, const Space& space,
                                    std::span<const RoadAsset> assets) {
    nlohmann::json j;
    j["kind"] = "phase2_result";
    j["status"] = "ok";
    j["C"] = result.C;
    j["space"] = space_to_json(space);

    nlohmann::json assets_json = nlohmann::json::array();
    for (const RoadAsset& a : assets) assets_json.push_back(asset_to_json(a));
    j["assets"] = std::move(assets_json);

    j["placement"] = placement_to_json(result.placement);

    nlohmann::json pairs = nlohmann::json::array();
    for (const AssetPair& p : result.connected_pairs) {
        pairs.push_back(nlohmann::json::array({p.first, p.second}));
    }
    j["connected_pairs"] = std::move(pairs);

    nlohmann::json transitions = nlohmann::json::array();
    for (const auto& [pair, t] : result.chosen_transitions) {
        const Point2 from = result.placement.world_nodes.at(t.from_asset).at(t.from_node);
        const Point2 to = result.placement.world_nodes.at(t.to_asset).at(t.to_node);
        transitions.push_back({{"pair", nlohmann::json::array({pair.first, pair.second})},
                               {"from_asset", t.from_asset},
                               {"from_node", t.from_node + 1},
                               {"to_asset", t.to_asset},
                               {"to_node", t.to_node + 1},
                               {"from_xy", point_to_json(from)},
                               {"to_xy", point_to_json(to)},
                               {"length", distance(from, to)}});
    }
    j["transitions"] = std::move(transitions);
    j["warnings"] = result.warnings;
    return j;
}

LoadedResult result_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw SchemaError("result must be a JSON object");
    LoadedResult out;
    const nlohmann::json& kind = require(j, "kind");
    if (!kind.is_string()) throw SchemaError("result kind must be a string");
    out.kind = kind.get<std::string>();
    if (out.kind != "phase1_result" && out.kind != "phase2_result") {
        throw SchemaError("unknown result kind '" + out.kind + "'");
    }
    out.status = require(j, "status").get<std::string>();
    out.space = space_from_json(require(j, "space"));
    for (const auto& a : require(j, "assets")) out.assets.push_back(asset_from_json(a));
    out.placement = placement_from_json(require(j, "placement"), out.assets);
    if (const auto it = j.find("transitions"); it != j.end()) {
        for (const auto& t : *it) {
            out.transitions.push_back(LoadedResult::Transition{
                require(t, "from_asset").get<std::string>(),
                require(t, "to_asset").get<std::string>(), point_from_json(require(t, "from_xy")),
                point_from_json(require(t, "to_xy"))});
        }
    }
    return out;
}

std::string dump_json(const nlohmann::json& j) { return j.dump(2) + "\n"; }

nlohmann::json load_json_file(const std::string& path) {
    const std::string text = read_text_file(path);
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError("cannot parse '" + path + "': " + e.what());
    }
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SchemaError("cannot open '" + path + "' for reading");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw SchemaError("cannot open '" + path + "' for writing");
    out << text;
    if (!out) throw SchemaError("failed writing '" + path + "'");
}

}  // namespace xcity
