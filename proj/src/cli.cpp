#include "xcity/cli.hpp"

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "xcity/json_io.hpp"
#include "xcity/osm.hpp"
#include "xcity/svg_render.hpp"

namespace xcity {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitValidation = 3;

void emit(const std::string& payload, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << payload;
    } else {
        write_text_file(out_path, payload);
    }
}

std::vector<std::int64_t> parse_way_group(const std::string& group) {
    std::vector<std::int64_t> ids;
    std::stringstream ss(group);
    std::string token;
    while (std::getline(ss, token, ',')) {
        if (token.empty()) continue;
        std::size_t used = 0;
        const std::int64_t id = std::stoll(token, &used);
        if (used != token.size()) throw SchemaError("bad way id '" + token + "'");
        ids.push_back(id);
    }
    if (ids.empty()) throw SchemaError("empty way-id group '" + group + "'");
    return ids;
}

struct CommonOpts {
    std::string config_path;
    std::string out_path;
    std::optional<std::uint64_t> seed;
    std::optional<double> time_budget;
    bool verbose = false;
};

ProjectConfig load_config_with_overrides(const CommonOpts& opts) {
    ProjectConfig config = load_config(opts.config_path);
    if (opts.seed) config.solver.seed = *opts.seed;
    if (opts.time_budget) config.solver.time_budget_seconds = *opts.time_budget;
    return config;
}

int cmd_ingest(const std::string& osm_path, const std::vector<std::string>& groups,
               const std::string& out_dir, const std::string& prefix, double simplify_tol,
               double value, bool verbose) {
    const std::string xml = read_text_file(osm_path);
    const RawOsmGraph graph = parse_osm(xml);
    std::filesystem::create_directories(out_dir);
    for (std::size_t g = 0; g < groups.size(); ++g) {
        const std::vector<std::int64_t> way_ids = parse_way_group(groups[g]);
        const std::string id = prefix + "_" + std::to_string(g + 1);
        RoadAsset asset;
        try {
            asset = extract_asset(graph, way_ids, simplify_tol, id, value);
        } catch (const std::exception& e) {
            std::cerr << "ingest: " << osm_path << ": group '" << groups[g] << "': " << e.what()
                      << "\n";
            return kExitUsage;
        }
        const std::string path = (std::filesystem::path(out_dir) / (id + ".json")).string();
        save_asset(asset, path);
        if (verbose) {
            std::cerr << "ingest: wrote " << path << " (" << asset.nodes.size() << " nodes, "
                      << asset.segments.size() << " segments)\n";
        }
    }
    return kExitOk;
}

int cmd_phase1(const CommonOpts& opts) {
    const ProjectConfig config = load_config_with_overrides(opts);
    if (config.assets.empty()) {
        std::cerr << "phase1: config lists no assets\n";
        return kExitUsage;
    }
    const SubsetSelection selection = select_subset(config.assets, config.space, config.solver,
                                                    config.subset_cap, config.eps, config.delta_tol);

    std::vector<RoadAsset> selected;
    for (const std::string& id : selection.subset_ids) {
        for (const RoadAsset& a : config.assets) {
            if (a.id == id) selected.push_back(a);
        }
    }
    emit(dump_json(phase1_result_to_json(selection, config.space, selected)), opts.out_path);

    if (selection.status != SubsetSelection::Status::Selected) {
        std::cerr << "phase1: no feasible subset found after " << selection.trials.size()
                  << " trials\n";
        return kExitInfeasible;
    }
    std::cerr << "phase1: selected " << selection.subset_ids.size() << " asset(s), total value "
              << selection.total_value << "\n";
    if (opts.verbose) {
        for (const SubsetTrial& t : selection.trials) {
            std::cerr << "  trial:";
            for (const std::string& id : t.ids) std::cerr << " " << id;
            std::cerr << " -> " << (t.status == Phase1Status::Feasible ? "feasible" : "exhausted")
                      << "\n";
        }
    }
    return kExitOk;
}

int cmd_phase2(const CommonOpts& opts, const std::string& phase1_path) {
    const ProjectConfig config = load_config_with_overrides(opts);
    const LoadedResult phase1 = result_from_json(load_json_file(phase1_path));
    if (phase1.kind != "phase1_result") {
        std::cerr << "phase2: '" << phase1_path << "' is not a phase-1 result\n";
        return kExitUsage;
    }
    if (phase1.status != "feasible") {
        std::cerr << "phase2: phase-1 result status is '" << phase1.status
                  << "'; a feasible placement is required\n";
        return kExitInfeasible;
    }

    ConnectivityResult result;
    try {
        // The arrangement starts from the handed-over placement and space;
        // solver budget and tolerances come from the config.
        result = optimize_connectivity(phase1.assets, phase1.placement, phase1.space,
                                       config.solver, config.eps, config.delta_tol);
    } catch (const std::invalid_argument& e) {
        std::cerr << "phase2: " << e.what() << "\n";
        return kExitInfeasible;
    }
    emit(dump_json(connectivity_to_json(result, phase1.space, phase1.assets)), opts.out_path);
    std::cerr << "phase2: C = " << result.C << " over " << phase1.assets.size() << " asset(s)\n";
    for (const std::string& w : result.warnings) std::cerr << "phase2: warning: " << w << "\n";
    return kExitOk;
}

int cmd_validate(const CommonOpts& opts, const std::string& placement_path) {
    const ProjectConfig config = load_config_with_overrides(opts);
    const nlohmann::json input = load_json_file(placement_path);

    std::vector<RoadAsset> assets;
    Placement placement;
    Space space = config.space;
    if (input.is_object() && input.contains("kind")) {
        const LoadedResult result = result_from_json(input);
        assets = result.assets;
        placement = result.placement;
        space = result.space;
    } else {
        placement = placement_from_json(input, config.assets);
        for (const RoadAsset& a : config.assets) {
            if (placement.entries.count(a.id)) assets.push_back(a);
        }
    }

    const FeasibilityReport report =
        feasibility_report(assets, placement, space, config.eps, config.delta_tol);
    emit(dump_json(report_to_json(report)), opts.out_path);
    if (!report.feasible) {
        std::cerr << "validate: placement infeasible (" << report.cacs_violations.size()
                  << " collision(s), " << report.containment_violations.size()
                  << " containment violation(s), max |delta| " << report.sacs.max_abs_delta()
                  << ")\n";
        return kExitValidation;
    }
    std::cerr << "validate: feasible\n";
    return kExitOk;
}

int cmd_render(const std::string& result_path, const std::string& out_svg) {
    const LoadedResult result = result_from_json(load_json_file(result_path));
    write_text_file(out_svg, render_svg(result));
    std::cerr << "render: wrote " << out_svg << "\n";
    return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"xcity: place road assets in a convex space and connect them"};
    app.require_subcommand(1);

    std::string osm_path, out_dir, prefix = "asset";
    std::vector<std::string> groups;
    double simplify_tol = kDefaultSimplifyTol;
    double asset_value = 1.0;
    CommonOpts opts;
    std::string phase1_path, placement_path, result_path, out_svg;

    CLI::App* ingest = app.add_subcommand("ingest", "Extract road assets from an .osm file");
    ingest->add_option("--osm", osm_path, "input .osm file")->required();
    ingest->add_option("--group", groups, "comma-separated way ids forming one asset (repeatable)")
        ->required();
    ingest->add_option("--out-dir", out_dir, "directory for asset JSON files")->required();
    ingest->add_option("--prefix", prefix, "asset id prefix");
    ingest->add_option("--simplify-tol", simplify_tol, "polyline simplification tolerance (m)");
    ingest->add_option("--value", asset_value, "value assigned to each asset");
    ingest->add_flag("--verbose", opts.verbose, "log per-asset details");

    auto add_common = [&](CLI::App* cmd, bool with_out) {
        cmd->add_option("--config", opts.config_path, "project config JSON")->required();
        if (with_out) cmd->add_option("--out", opts.out_path, "write JSON here instead of stdout");
        cmd->add_option("--seed", opts.seed, "override config solver seed");
        cmd->add_option("--time-budget", opts.time_budget, "override time budget (seconds)");
        cmd->add_flag("--verbose", opts.verbose, "verbose progress on stderr");
    };

    CLI::App* phase1 = app.add_subcommand("phase1", "Select and place the best feasible subset");
    add_common(phase1, true);

    CLI::App* phase2 = app.add_subcommand("phase2", "Arrange a feasible subset for connectivity");
    add_common(phase2, true);
    phase2->add_option("--phase1", phase1_path, "phase-1 result JSON")->required();

    CLI::App* validate = app.add_subcommand("validate", "Check a placement against the space");
    add_common(validate, true);
    validate->add_option("--placement", placement_path, "placement or result JSON")->required();

    CLI::App* render = app.add_subcommand("render", "Draw a result JSON as SVG");
    render->add_option("--result", result_path, "result JSON from phase1 or phase2")->required();
    render->add_option("--out", out_svg, "output SVG path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (app.got_subcommand(ingest)) {
            return cmd_ingest(osm_path, groups, out_dir, prefix, simplify_tol, asset_value,
                              opts.verbose);
        }
        if (app.got_subcommand(phase1)) return cmd_phase1(opts);
        if (app.got_subcommand(phase2)) return cmd_phase2(opts, phase1_path);
        if (app.got_subcommand(validate)) return cmd_validate(opts, placement_path);
        if (app.got_subcommand(render)) return cmd_render(result_path, out_svg);
    } catch (const OsmParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const OsmReferenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const SchemaError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}

}  // namespace xcity
