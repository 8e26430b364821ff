// pcsim command-line driver. Talks to the simulator exclusively through the
// C API in pcsim.h.

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pcsim.h"

namespace {

struct CommonOpts {
    std::string config_path;
    std::string output_dir;
    std::vector<std::uint64_t> seeds;
    std::int64_t max_steps = -1;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("-c,--config", opts.config_path, "Experiment config file (JSON)");
    cmd->add_option("-o,--output-dir", opts.output_dir, "Directory for metrics files");
    cmd->add_option("--seed", opts.seeds, "Seed override (repeatable)");
    cmd->add_option("--max-steps", opts.max_steps, "Step-count override");
}

int report_error(const char* what) {
    std::fprintf(stderr, "pcsim: %s: %s\n", what, pcsim_last_error());
    return 2;
}

pcsim_config* make_config(const CommonOpts& opts) {
    pcsim_config* config = nullptr;
    pcsim_status status = opts.config_path.empty()
                              ? pcsim_config_create_default(&config)
                              : pcsim_config_load_file(opts.config_path.c_str(), &config);
    if (status != PCSIM_OK) {
        report_error("config");
        return nullptr;
    }
    if (!opts.output_dir.empty() &&
        pcsim_config_set_output_dir(config, opts.output_dir.c_str()) != PCSIM_OK) {
        report_error("output-dir");
        pcsim_config_free(config);
        return nullptr;
    }
    if (!opts.seeds.empty() &&
        pcsim_config_set_seeds(config, opts.seeds.data(), opts.seeds.size()) != PCSIM_OK) {
        report_error("seeds");
        pcsim_config_free(config);
        return nullptr;
    }
    if (opts.max_steps >= 0 &&
        pcsim_config_set_max_steps(config, opts.max_steps) != PCSIM_OK) {
        report_error("max-steps");
        pcsim_config_free(config);
        return nullptr;
    }
    return config;
}

int run_and_print(pcsim_config* config) {
    pcsim_report* report = nullptr;
    if (pcsim_run(config, &report) != PCSIM_OK) {
        const int rc = report_error("run");
        pcsim_config_free(config);
        return rc;
    }
    std::printf("%s", pcsim_report_text(report));
    pcsim_report_free(report);
    pcsim_config_free(config);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pcsim — rollout-allocation simulator for group-based RL"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(pcsim_version()));

    CommonOpts run_opts;
    std::string run_method;
    CLI::App* run_cmd = app.add_subcommand("run", "Run one allocation method");
    add_common(run_cmd, run_opts);
    run_cmd->add_option("-m,--method", run_method, "grpo, dapo, or pc");

    CommonOpts compare_opts;
    CLI::App* compare_cmd =
        app.add_subcommand("compare", "Run grpo, dapo, and pc under identical seeds");
    add_common(compare_cmd, compare_opts);

    CommonOpts sweep_opts;
    std::string axis;
    std::string values;
    std::string mode = "direct";
    CLI::App* sweep_cmd = app.add_subcommand("sweep", "Sweep one scheduler parameter");
    add_common(sweep_cmd, sweep_opts);
    sweep_cmd->add_option("--axis", axis, "n_pilot, p_lower, p_upper, p_solve, or d")
        ->required();
    sweep_cmd->add_option("--values", values, "Comma-separated values")->required();
    sweep_cmd->add_option("--mode", mode, "direct, equal-training, or equal-sampling");

    CLI11_PARSE(app, argc, argv);

    if (run_cmd->parsed()) {
        pcsim_config* config = make_config(run_opts);
        if (!config) return 2;
        if (!run_method.empty() &&
            pcsim_config_set_method(config, run_method.c_str()) != PCSIM_OK) {
            const int rc = report_error("method");
            pcsim_config_free(config);
            return rc;
        }
        return run_and_print(config);
    }

    if (compare_cmd->parsed()) {
        pcsim_config* config = make_config(compare_opts);
        if (!config) return 2;
        if (pcsim_config_set_method(config, "compare") != PCSIM_OK) {
            const int rc = report_error("method");
            pcsim_config_free(config);
            return rc;
        }
        return run_and_print(config);
    }

    // sweep
    pcsim_config* config = make_config(sweep_opts);
    if (!config) return 2;
    pcsim_report* report = nullptr;
    if (pcsim_sweep(config, axis.c_str(), values.c_str(), mode.c_str(), &report) !=
        PCSIM_OK) {
        const int rc = report_error("sweep");
        pcsim_config_free(config);
        return rc;
    }
    std::printf("%s", pcsim_report_text(report));
    pcsim_report_free(report);
    pcsim_config_free(config);
    return 0;
}
