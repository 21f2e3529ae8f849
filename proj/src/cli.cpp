#include "telsim/cli.hpp"

#include "telsim/errors.hpp"
#include "telsim/experiments.hpp"
#include "telsim/figures.hpp"
#include "telsim/rng.hpp"
#include "telsim/sampling.hpp"
#include "telsim/topology.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

namespace telsim::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

/// Collects output files and writes manifest.json next to them.
class OutputDir {
  public:
    explicit OutputDir(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

    std::ofstream open(const std::string& name) {
        std::ofstream f(dir_ / name, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write '" + (dir_ / name).string() + "'");
        files_.push_back(name);
        return f;
    }

    const fs::path& path() const { return dir_; }

    void write_manifest(json manifest) {
        files_.push_back("manifest.json");
        manifest["outputs"] = files_;
        std::ofstream f(dir_ / "manifest.json", std::ios::binary);
        f << manifest.dump(2) << '\n';
    }

  private:
    fs::path dir_;
    std::vector<std::string> files_;
};

std::string default_output_dir() {
    if (const char* env = std::getenv(kOutputDirEnv); env != nullptr && *env != '\0') return env;
    return "telsim-out";
}

struct TopologyInput {
    Topology topology;
    std::string fingerprint;
};

TopologyInput read_topology(const std::string& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw ParseError("cannot open topology file '" + file + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string bytes = buf.str();
    return {parse_topology(bytes), fmt::format("fnv1a64:{:016x}", fnv1a64(bytes))};
}

json rule_json(const ComplianceRule& rule) {
    return {{"threshold_us", rule.threshold_us}, {"required_fraction", rule.required_fraction}};
}

json base_manifest(std::string_view command, std::span<const std::string> args) {
    return {{"command", command},
            {"argv", std::vector<std::string>(args.begin(), args.end())},
            {"tool_version", kToolVersion}};
}

void add_output_option(CLI::App& cmd, std::string& out_dir) {
    out_dir = default_output_dir();
    cmd.add_option("--out", out_dir, fmt::format("Output directory (default ${} or telsim-out)", kOutputDirEnv));
}

void add_rule_options(CLI::App& cmd, ComplianceRule& rule) {
    cmd.add_option("--threshold", rule.threshold_us, "Delay threshold in microseconds")->capture_default_str();
    cmd.add_option("--fraction", rule.required_fraction, "Required fraction of packets under the threshold")
        ->capture_default_str();
}

int cmd_cochran(std::span<const std::string> args, double z, double p, std::vector<std::uint64_t> sizes,
                std::optional<double> margin, const std::string& out_dir, std::ostream& out) {
    OutputDir dir(out_dir);
    json manifest = base_manifest("cochran", args);
    manifest["config"] = {{"z", z}, {"p_assumed", p}};

    if (margin) {
        const auto plan = plan_for_error(z, p, *margin);
        out << fmt::format("z={} p={} e={} n0={}\n", plan.z, plan.p_assumed, plan.e, plan.n0);
        manifest["config"]["e"] = *margin;
        sizes = {plan.n0};
    }

    const auto rows = run_error_table(z, p, sizes);
    if (!margin) {
        out << "n0,e\n";
        for (const auto& r : rows) out << fmt::format("{},{:.4f}\n", r.n0, r.e);
    }
    auto csv = dir.open("cochran.csv");
    write_error_csv(csv, rows);
    manifest["config"]["sample_sizes"] = sizes;
    dir.write_manifest(std::move(manifest));
    return kOk;
}

int cmd_select(std::span<const std::string> args, const std::string& topology_file, const std::string& source,
               const std::vector<std::string>& destinations, const ExperimentConfig& config,
               const std::string& out_dir, std::ostream& out) {
    config.validate();
    const auto input = read_topology(topology_file);

    std::vector<PathDelayModel> models;
    std::vector<std::string> ids;
    json paths = json::array();
    for (const auto& dst : destinations) {
        const auto path = route(input.topology, source, dst);
        models.push_back(build_path_model(input.topology, path));
        ids.push_back(path.id());
        paths.push_back({{"id", path.id()},
                         {"links", path.link_ids},
                         {"length_km", input.topology.path_length_km(path)},
                         {"mean_us", models.back().mean_us()},
                         {"true_fraction", fraction_below(models.back(), config.rule.threshold_us)}});
    }

    SelectionResult result;
    if (models.size() == 1) {
        result = {config.sample_sizes, ids, config.trials, {}};
        for (std::size_t s = 0; s < config.sample_sizes.size(); ++s) result.counts.push_back({config.trials});
    } else {
        result = run_selection(models, config, ids);
    }

    OutputDir dir(out_dir);
    {
        auto csv = dir.open("selection.csv");
        write_selection_csv(csv, result);
    }
    {
        auto svg = dir.open("selection.svg");
        write_selection_svg(svg, result,
                            fmt::format("Path chosen as best ({} trials, threshold {} us)", config.trials,
                                        config.rule.threshold_us));
    }

    json aggregates = json::array();
    for (std::size_t s = 0; s < result.sample_sizes.size(); ++s) {
        aggregates.push_back({{"n0", result.sample_sizes[s]}, {"frequencies", result.frequencies(s)}});
        out << fmt::format("n0={}", result.sample_sizes[s]);
        for (std::size_t j = 0; j < ids.size(); ++j) out << fmt::format(" {}={:.4f}", ids[j], result.frequency(s, j));
        out << '\n';
    }

    json config_echo = {{"topology", topology_file},
                        {"source", source},
                        {"destinations", destinations},
                        {"master_seed", config.master_seed},
                        {"trials", config.trials},
                        {"sample_sizes", config.sample_sizes},
                        {"rule", rule_json(config.rule)},
                        {"tie_break", to_string(config.tie_break)},
                        {"workers", config.workers}};
    {
        auto summary = dir.open("selection_summary.json");
        summary << json{{"experiment", "selection"}, {"config", config_echo}, {"paths", paths}, {"results", aggregates}}
                       .dump(2)
                << '\n';
    }

    json manifest = base_manifest("select", args);
    manifest["config"] = config_echo;
    manifest["topology_hash"] = input.fingerprint;
    manifest["master_seed"] = config.master_seed;
    dir.write_manifest(std::move(manifest));
    return kOk;
}

int cmd_heatmap(std::span<const std::string> args, const std::string& topology_file, const ExperimentConfig& config,
                const std::string& out_dir, std::ostream& out) {
    config.validate();
    const auto input = read_topology(topology_file);
    const auto results = run_heatmap(input.topology, config);

    OutputDir dir(out_dir);
    json aggregates = json::array();
    for (const auto& r : results) {
        {
            auto csv = dir.open(fmt::format("heatmap_n{}.csv", r.n0));
            write_heatmap_csv(csv, r);
        }
        {
            auto svg = dir.open(fmt::format("heatmap_n{}.svg", r.n0));
            write_heatmap_svg(svg, r,
                              fmt::format("{}: pairs under {} us for {:g}% of packets, {} samples",
                                          input.topology.name(), config.rule.threshold_us,
                                          100.0 * config.rule.required_fraction, r.n0));
        }
        out << fmt::format("n0={} {}\n", r.n0, r.report.summary());
        aggregates.push_back(
            {{"n0", r.n0}, {"fp", r.report.fp}, {"fn", r.report.fn}, {"tp", r.report.tp}, {"tn", r.report.tn}});
    }

    json config_echo = {{"topology", topology_file},
                        {"master_seed", config.master_seed},
                        {"sample_sizes", config.sample_sizes},
                        {"rule", rule_json(config.rule)},
                        {"workers", config.workers}};
    {
        auto summary = dir.open("heatmap_summary.json");
        summary << json{{"experiment", "heatmap"},
                        {"config", config_echo},
                        {"acos", results.front().acos.size()},
                        {"macos", results.front().macos.size()},
                        {"results", aggregates}}
                       .dump(2)
                << '\n';
    }

    json manifest = base_manifest("heatmap", args);
    manifest["config"] = config_echo;
    manifest["topology_hash"] = input.fingerprint;
    manifest["master_seed"] = config.master_seed;
    dir.write_manifest(std::move(manifest));
    return kOk;
}

struct CalibrateArgs {
    double offset_us = 44.0;
    double mean_us = 19.0;
    double threshold_us = 82.0;
    double target = 0.937;
    std::size_t max_hops = 8;
    double tolerance = 0.01;
    double service_time_us = 1.0;
};

int cmd_calibrate(std::span<const std::string> args, const CalibrateArgs& a, const std::string& out_dir,
                  std::ostream& out) {
    const auto fit = calibrate_path(a.offset_us, a.mean_us, a.threshold_us, a.target, a.max_hops, a.tolerance);
    const double stage_mean = fit.model.stage_means_us.front();
    const double load = 1.0 - a.service_time_us / stage_mean;
    if (!(load > 0.0 && load < 1.0)) {
        throw InfeasibleError(fmt::format("stage mean {} us with service time {} us needs load {} outside (0,1)",
                                          stage_mean, a.service_time_us, load));
    }

    // A standalone topology with one ACO-to-MACO chain reproducing the fit.
    const double link_km = a.offset_us / kPropagationUsPerKm / static_cast<double>(fit.hops);
    std::vector<NodeSpec> nodes{{"SRC", NodeRole::Aco}};
    for (std::size_t h = 1; h < fit.hops; ++h) nodes.push_back({fmt::format("HOP_{}", h), NodeRole::Transit});
    nodes.push_back({"DST", NodeRole::Maco});
    std::vector<LinkSpec> links;
    for (std::size_t h = 0; h < fit.hops; ++h) {
        links.push_back({fmt::format("L{}", h + 1), nodes[h].id, nodes[h + 1].id, link_km, load, a.service_time_us});
    }
    const Topology fragment(fmt::format("calibrated-{}hop", fit.hops), std::move(nodes), std::move(links));

    out << fmt::format("hops={} stage_mean_us={} load={} offset_us={} mean_us={} achieved_fraction={:.6f}\n", fit.hops,
                       stage_mean, load, fit.model.propagation_us, fit.model.mean_us(), fit.achieved_fraction);

    OutputDir dir(out_dir);
    {
        auto f = dir.open("calibrated_path.json");
        f << serialize_topology(fragment);
    }
    json manifest = base_manifest("calibrate", args);
    manifest["config"] = {{"offset_us", a.offset_us},   {"total_queue_mean_us", a.mean_us},
                          {"threshold_us", a.threshold_us}, {"target_fraction", a.target},
                          {"max_hops", a.max_hops},     {"tolerance", a.tolerance},
                          {"service_time_us", a.service_time_us}};
    manifest["result"] = {{"hops", fit.hops}, {"achieved_fraction", fit.achieved_fraction}};
    dir.write_manifest(std::move(manifest));
    return kOk;
}

} // namespace

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"In-band telemetry latency sampling simulator", "telsim"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);

    // cochran
    auto* cochran = app.add_subcommand("cochran", "Cochran sample-size / margin-of-error table");
    double z = kDefaultZ;
    double p = kDefaultAssumedProportion;
    std::vector<std::uint64_t> cochran_sizes{5, 10, 50, 100, 400};
    std::optional<double> margin;
    cochran->add_option("--z", z, "Confidence multiplier")->capture_default_str();
    cochran->add_option("--p", p, "Assumed proportion")->capture_default_str();
    auto* n_opt = cochran->add_option("--n", cochran_sizes, "Sample sizes, comma separated")->delimiter(',');
    cochran->add_option("--e", margin, "Margin of error; prints the required n0")->excludes(n_opt);
    std::string cochran_out;
    add_output_option(*cochran, cochran_out);

    // select
    auto* select = app.add_subcommand("select", "Best-path selection frequencies over repeated trials");
    std::string topology_file;
    std::string source;
    std::vector<std::string> destinations;
    ExperimentConfig select_cfg;
    std::string tie_text{to_string(select_cfg.tie_break)};
    select->add_option("--topology", topology_file, "Topology file")->required();
    select->add_option("--source", source, "Source node id")->required();
    select->add_option("--dest", destinations, "Destination node ids, comma separated")->required()->delimiter(',');
    select->add_option("--sizes", select_cfg.sample_sizes, "Samples per path")->delimiter(',');
    select->add_option("--trials", select_cfg.trials)->capture_default_str();
    select->add_option("--seed", select_cfg.master_seed, "Master seed")->capture_default_str();
    select->add_option("--tie-break", tie_text, "random | lowest-mean | lowest-max | first")->capture_default_str();
    select->add_option("--workers", select_cfg.workers)->capture_default_str();
    add_rule_options(*select, select_cfg.rule);
    std::string select_out;
    add_output_option(*select, select_out);

    // heatmap
    auto* heatmap = app.add_subcommand("heatmap", "Compliance heatmaps for every ACO/MACO pair");
    std::string heatmap_topology;
    ExperimentConfig heatmap_cfg;
    heatmap_cfg.sample_sizes = {5, 100, 2500};
    heatmap->add_option("--topology", heatmap_topology, "Topology file")->required();
    heatmap->add_option("--sizes", heatmap_cfg.sample_sizes, "Samples per pair")->delimiter(',');
    heatmap->add_option("--seed", heatmap_cfg.master_seed, "Master seed")->capture_default_str();
    heatmap->add_option("--workers", heatmap_cfg.workers)->capture_default_str();
    add_rule_options(*heatmap, heatmap_cfg.rule);
    std::string heatmap_out;
    add_output_option(*heatmap, heatmap_out);

    // calibrate
    auto* calibrate = app.add_subcommand("calibrate", "Fit an equal-stage path to a target tail fraction");
    CalibrateArgs cal;
    calibrate->add_option("--offset", cal.offset_us, "Propagation offset (us)")->capture_default_str();
    calibrate->add_option("--mean", cal.mean_us, "Total queueing mean (us)")->capture_default_str();
    calibrate->add_option("--threshold", cal.threshold_us)->capture_default_str();
    calibrate->add_option("--target", cal.target, "Target fraction under the threshold")->capture_default_str();
    calibrate->add_option("--max-hops", cal.max_hops)->capture_default_str();
    calibrate->add_option("--tolerance", cal.tolerance)->capture_default_str();
    calibrate->add_option("--service-time", cal.service_time_us, "Mean service time E(X) (us)")
        ->capture_default_str();
    std::string calibrate_out;
    add_output_option(*calibrate, calibrate_out);

    std::vector<std::string> argv_store{"telsim"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& a : argv_store) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::Success& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kUsage;
    }

    try {
        if (*cochran) {
            return cmd_cochran(args, z, p, cochran_sizes, margin, cochran_out, out);
        }
        if (*select) {
            const auto tie = parse_tie_break(tie_text);
            if (!tie) throw DomainError("unknown tie-break '" + tie_text + "'");
            select_cfg.tie_break = *tie;
            return cmd_select(args, topology_file, source, destinations, select_cfg, select_out, out);
        }
        if (*heatmap) {
            return cmd_heatmap(args, heatmap_topology, heatmap_cfg, heatmap_out, out);
        }
        if (*calibrate) {
            return cmd_calibrate(args, cal, calibrate_out, out);
        }
    } catch (const DomainError& e) {
        err << "usage error: " << e.what() << '\n';
        return kUsage;
    } catch (const InfeasibleError& e) {
        err << "infeasible: " << e.what() << '\n';
        return kInfeasible;
    } catch (const ParseError& e) {
        err << "input error: " << e.what() << '\n';
        return kInput;
    } catch (const ValidationError& e) {
        err << "input error: " << e.what() << '\n';
        return kInput;
    } catch (const RoutingError& e) {
        err << "input error: " << e.what() << '\n';
        return kInput;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kInput;
    }
    return kUsage;
}

} // namespace telsim::cli
