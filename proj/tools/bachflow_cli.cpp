// Command-line front end: subcommand dispatch over the library's run().
//
// A JSON config file (--config) seeds every option; explicit flags override
// it.  Each run writes config.echo.json next to its outputs, and that echo
// reloads as a config file unchanged.

#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "bachflow/run.hpp"

namespace {

bachflow::RunConfig load_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw bachflow::ConfigError("cannot read config file: " + path);
    bachflow::json j;
    try {
        is >> j;
        return bachflow::runconfig_from_json(j);
    } catch (const std::exception& e) {
        throw bachflow::ConfigError(std::string("malformed config file: ") + e.what());
    }
}

void add_common(CLI::App* sub, bachflow::RunConfig& cfg) {
    sub->add_option("--seed", cfg.seed, "seed for all randomized grids");
    sub->add_option("--out-dir", cfg.out_dir, "output root (default $BACHFLOW_OUT_DIR or ./runs)");
    sub->add_option("--run-name", cfg.run_name, "run directory name (default: subcommand)");
    sub->add_option("--rtol", cfg.rtol, "integrator relative tolerance");
    sub->add_option("--atol", cfg.atol, "integrator absolute tolerance");
}

void add_initial(CLI::App* sub, bachflow::RunConfig& cfg, std::string& bracket_path,
                 std::string& metric_path) {
    sub->add_option("--a", cfg.a, "structure constant a");
    sub->add_option("--b", cfg.b, "structure constant b");
    sub->add_option("--c", cfg.c, "structure constant c");
    sub->add_option("--bracket-json", bracket_path, "full initial bracket (JSON file)");
    sub->add_option("--metric-json", metric_path, "initial gram matrix (JSON file)");
}

}  // namespace

int main(int argc, char** argv) {
    bachflow::RunConfig cfg;

    // phase 1: pick up --config so file values become the defaults below
    for (int i = 1; i < argc - 1; ++i) {
        if (std::string(argv[i]) == "--config") {
            try {
                cfg = load_config_file(argv[i + 1]);
            } catch (const bachflow::ConfigError& e) {
                std::cerr << "config error: " << e.what() << "\n";
                return bachflow::kExitConfig;
            }
        }
    }

    CLI::App app{"Bach flow laboratory for four-dimensional nilpotent Lie groups"};
    app.require_subcommand(0, 1);
    std::string config_path, bracket_path, metric_path;
    app.add_option("--config", config_path, "JSON config file (flags override it)");

    auto* flow = app.add_subcommand("flow", "integrate the bracket or metric flow");
    flow->add_option("--t-end", cfg.t_end, "integration horizon");
    flow->add_option("--formulation", cfg.formulation,
                     "reduced | full-gauged | full-ungauged | metric");
    flow->add_option("--grid", cfg.grid_samples, "extra uniform sample times");
    add_initial(flow, cfg, bracket_path, metric_path);
    add_common(flow, cfg);

    auto* normalized = app.add_subcommand("normalized", "norm-fixing r-normalized flow");
    normalized->add_option("--t-end", cfg.t_end, "integration horizon");
    normalized->add_option("--grid", cfg.grid_samples, "extra uniform sample times");
    normalized->add_option("--conv-tol", cfg.conv_tol, "convergence detection tolerance");
    normalized->add_flag("--rescale", cfg.rescale, "rescale the initial bracket to norm 2");
    add_initial(normalized, cfg, bracket_path, metric_path);
    add_common(normalized, cfg);

    auto* soliton = app.add_subcommand("soliton", "search and certify algebraic solitons");
    soliton->add_option("--region-min", cfg.region_min, "search box lower edge");
    soliton->add_option("--region-max", cfg.region_max, "search box upper edge");
    soliton->add_option("--starts", cfg.starts, "Newton multistart count");
    add_common(soliton, cfg);

    auto* verify = app.add_subcommand("verify", "closed forms vs curvature oracle");
    verify->add_option("--grid", cfg.grid, "grid edge length (grid^3 points)");
    add_common(verify, cfg);

    auto* sweep = app.add_subcommand("sweep", "batch of reduced-flow runs");
    sweep->add_option("--count", cfg.count, "number of initial conditions");
    sweep->add_option("--t-end", cfg.t_end, "integration horizon");
    sweep->add_option("--norm-max", cfg.norm_max, "max initial bracket norm");
    add_common(sweep, cfg);

    CLI11_PARSE(app, argc, argv);

    if (flow->parsed()) cfg.subcommand = "flow";
    else if (normalized->parsed()) cfg.subcommand = "normalized";
    else if (soliton->parsed()) cfg.subcommand = "soliton";
    else if (verify->parsed()) cfg.subcommand = "verify";
    else if (sweep->parsed()) cfg.subcommand = "sweep";
    else if (config_path.empty()) {
        std::cerr << app.help() << "\n";
        return bachflow::kExitConfig;
    }

    try {
        if (!bracket_path.empty()) {
            std::ifstream is(bracket_path);
            if (!is) throw bachflow::ConfigError("cannot read bracket file: " + bracket_path);
            bachflow::json j;
            is >> j;
            cfg.bracket = bachflow::bracket_from_json(j);
        }
        if (!metric_path.empty()) {
            std::ifstream is(metric_path);
            if (!is) throw bachflow::ConfigError("cannot read metric file: " + metric_path);
            bachflow::json j;
            is >> j;
            cfg.metric_gram = bachflow::mat4_from_json(j);
        }
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return bachflow::kExitConfig;
    }

    return bachflow::run(cfg);
}
