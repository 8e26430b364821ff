#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pcsim/baselines.hpp"
#include "pcsim/env.hpp"
#include "pcsim/metrics.hpp"
#include "pcsim/scheduler.hpp"

namespace pcsim {

enum class TargetPolicy : std::uint8_t { grpo_peak, fixed };

struct ExperimentConfig {
    EnvConfig env;
    std::string method = "compare";  // grpo | dapo | pc | compare
    SchedulerConfig scheduler;
    BaselineConfig baseline;
    std::int64_t max_steps = 300;
    std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
    TargetPolicy target_policy = TargetPolicy::grpo_peak;
    double target_value = 0.0;  // used when target_policy == fixed
    std::string output_dir = "out";
    bool require_train_match = false;  // assert baseline.n == n_pilot + n_commit

    void validate() const;  // throws config_error with a field path
    std::string to_json_text() const;
    static ExperimentConfig from_json_text(const std::string& text);
    static ExperimentConfig load_file(const std::string& path);
    std::string digest() const;  // hash of the canonical serialization
};

struct RunResult {
    RunSummary summary;
    std::vector<StepMetrics> series;
};

/// Runs one (method, seed) pair. `method` is grpo, dapo, or pc.
RunResult run_single(const ExperimentConfig& config, const std::string& method,
                     std::uint64_t seed, bool detailed_log = false);

struct CompareResult {
    double target = 0.0;
    std::map<std::string, std::vector<RunResult>> runs;  // method -> per-seed
    std::map<std::string, std::vector<AveragedStepPoint>> averaged;
    std::map<std::string, double> rollouts_at_target;  // -1.0 = never
    std::optional<double> grpo_over_pc;
    std::optional<double> dapo_over_pc;
};

/// Runs grpo, dapo, and pc on identical environment seeds and compares
/// rollouts-to-target on the seed-averaged series.
CompareResult run_compare(const ExperimentConfig& config);

std::string compare_table_text(const CompareResult& result);
std::string compare_summary_json(const CompareResult& result, const ExperimentConfig& config);

struct ExperimentReport {
    std::string table_text;
    std::string summary_json;
};

/// Top-level entry: runs the configured method (or compare), writes one
/// metrics table per (method, seed) plus a summary into output_dir.
ExperimentReport run_experiment(const ExperimentConfig& config);

enum class SweepMode : std::uint8_t { direct, equal_training, equal_sampling };

struct SweepPoint {
    double value = 0.0;
    bool feasible = true;
    std::string note;  // why infeasible, when it is
    std::int32_t n_pilot = 0;
    std::int32_t n_commit = 0;
    std::int64_t expected_sampled_per_step = 0;  // b_g*n_pilot + b_t*n_commit
    RunSummary summary;                          // seed-averaged headline numbers
};

struct SweepResult {
    std::string axis;
    SweepMode mode = SweepMode::direct;
    std::vector<SweepPoint> points;
    std::string table_text;
};

/// Sweeps one named parameter of the pilot/commit scheduler. Axes: n_pilot
/// (split sweep; mode picks the n_commit rule), p_lower, p_upper, p_solve, d.
SweepResult run_sweep(const ExperimentConfig& config, const std::string& axis,
                      const std::vector<double>& values, SweepMode mode);

std::string sweep_summary_json(const SweepResult& result);

}  // namespace pcsim
