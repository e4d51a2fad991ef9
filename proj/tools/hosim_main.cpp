// hosim command-line front end: collect -> train -> run -> compare.
//
// Exit codes: 0 on success, 1 on runtime failure, 2 on usage errors
// (unknown flags, unreadable config, malformed lists).

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hosim/experiment.hpp"
#include "hosim/pipeline.hpp"
#include "hosim/sim.hpp"

namespace {

struct GlobalArgs {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out;
};

std::uint64_t effective_seed(const GlobalArgs& g, const hosim::ScenarioConfig& cfg) {
    return g.seed.value_or(cfg.rng_seed);
}

std::vector<hosim::MechKind> parse_mechanisms(const std::vector<std::string>& names) {
    std::vector<hosim::MechKind> kinds;
    for (const auto& n : names) {
        auto k = hosim::mech_from_name(n);
        if (!k)
            throw CLI::ValidationError("--mechanisms",
                                       "unknown mechanism '" + n +
                                           "' (expected a3, flha-expert, flha-q or flha-son)");
        kinds.push_back(*k);
    }
    return kinds;
}

int cmd_collect(const GlobalArgs& g, long steps) {
    auto cfg = hosim::load_config(g.config_path);
    if (steps <= 0) steps = cfg.sim_duration_steps;
    auto ds = hosim::collect_history(cfg, steps, effective_seed(g, cfg));
    for (const auto& w : ds.warnings) std::cerr << "warning: " << w << "\n";
    std::string out = g.out.empty() ? "history.csv" : g.out;
    hosim::save_history(out, ds);
    std::cout << "wrote " << ds.size() << " samples to " << out << "\n";
    return 0;
}

int cmd_train(const GlobalArgs& g, const std::string& history_path) {
    auto cfg = hosim::load_config(g.config_path);
    auto ds = hosim::load_history(history_path);
    std::string out = g.out.empty() ? "artifacts" : g.out;
    std::uint64_t seed = effective_seed(g, cfg);

    auto son = hosim::train_pipeline(cfg, ds, hosim::TrainVariant::Son, seed);
    hosim::save_artifacts(out, son);
    std::cout << "flha-son: " << son.rulebase.rules.size() << " rules, threshold "
              << son.threshold << ", artifacts in " << out << "\n";

    auto q = hosim::train_pipeline(cfg, ds, hosim::TrainVariant::GenericQ, seed);
    hosim::save_artifacts(out + "/q", q);
    std::cout << "flha-q: " << q.rulebase.rules.size() << " rules, threshold " << q.threshold
              << ", artifacts in " << out << "/q\n";
    return 0;
}

int cmd_run(const GlobalArgs& g, const std::string& mechanism, const std::string& artifacts) {
    auto cfg = hosim::load_config(g.config_path);
    auto kind = hosim::mech_from_name(mechanism);
    if (!kind)
        throw CLI::ValidationError("--mechanism", "unknown mechanism '" + mechanism + "'");
    auto mech = hosim::make_mechanism(*kind, cfg, artifacts);

    auto result = hosim::run(cfg, mech, effective_seed(g, cfg));
    std::string out = g.out.empty() ? "run_out" : g.out;
    std::filesystem::create_directories(out);
    hosim::save_events(out + "/events.csv", result.events);
    hosim::save_links(out + "/links.csv", result.links);
    hosim::save_kpi_report(out + "/kpi.csv", out + "/kpi_timeseries.csv", result.report);
    std::cout << mechanism << ": " << result.events.size() << " handovers, ho_ratio "
              << result.report.ho_ratio << ", outputs in " << out << "\n";
    return 0;
}

int cmd_compare(const GlobalArgs& g, const std::vector<double>& speeds,
                const std::vector<std::string>& mech_names,
                const std::vector<std::uint64_t>& seeds, const std::string& artifacts) {
    auto cfg = hosim::load_config(g.config_path);
    hosim::CompareSpec spec;
    spec.speeds_kmh = speeds;
    spec.mechanisms = parse_mechanisms(mech_names);
    spec.seeds = seeds.empty() ? std::vector<std::uint64_t>{effective_seed(g, cfg)} : seeds;

    auto results = hosim::run_matrix(cfg, spec, artifacts);
    std::string out = g.out.empty() ? "compare_out" : g.out;
    hosim::write_compare_outputs(out, spec, results);
    std::cout << results.size() << " runs, tables in " << out << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hosim: deterministic two-tier HetNets handover simulator"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalArgs g;
    app.add_option("--config", g.config_path, "scenario config file")
        ->required()
        ->check(CLI::ExistingFile);
    app.add_option("--seed", g.seed, "master seed (defaults to rng_seed from the config)");
    app.add_option("--out", g.out, "output file or directory");

    auto* collect = app.add_subcommand("collect", "record serving-link history under the A3 baseline");
    long steps = 0;
    collect->add_option("--steps", steps, "steps to simulate (default: sim_duration_steps)");

    auto* train = app.add_subcommand("train", "self-configure and self-optimise from history");
    std::string history_path;
    train->add_option("--history", history_path, "history csv from collect")
        ->required()
        ->check(CLI::ExistingFile);

    auto* runc = app.add_subcommand("run", "run one mechanism and emit logs and KPIs");
    std::string mechanism = "a3";
    std::string artifacts;
    runc->add_option("--mechanism", mechanism, "a3 | flha-expert | flha-q | flha-son");
    runc->add_option("--artifacts", artifacts, "artifact directory from train");

    auto* compare = app.add_subcommand("compare", "cross-product of speeds x mechanisms x seeds");
    std::vector<double> speeds{30.0, 75.0, 120.0};
    std::vector<std::string> mech_names{"a3", "flha-expert", "flha-q", "flha-son"};
    std::vector<std::uint64_t> seeds;
    std::string cmp_artifacts;
    compare->add_option("--speeds", speeds, "UE speeds in km/h")->delimiter(',');
    compare->add_option("--mechanisms", mech_names, "mechanisms to compare")->delimiter(',');
    compare->add_option("--seeds", seeds, "master seeds, one run per seed")->delimiter(',');
    compare->add_option("--artifacts", cmp_artifacts, "artifact directory from train");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (collect->parsed()) return cmd_collect(g, steps);
        if (train->parsed()) return cmd_train(g, history_path);
        if (runc->parsed()) return cmd_run(g, mechanism, artifacts);
        if (compare->parsed()) return cmd_compare(g, speeds, mech_names, seeds, cmp_artifacts);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
