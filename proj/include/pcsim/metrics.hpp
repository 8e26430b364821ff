#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pcsim/grpo.hpp"

namespace pcsim {

/// Sentinel for "target never reached".
inline constexpr std::int64_t kNeverReached = -1;

struct StepLedgerEntry {
    std::int64_t step = 0;
    std::int64_t sampled = 0;
    std::int64_t trained = 0;
    std::int32_t extra_rounds = 0;
};

/// Exact per-step and cumulative counts of sampled vs trained rollouts.
class BudgetLedger {
public:
    void begin_step(std::int64_t step);
    void add_sampled(std::int64_t count);
    void add_trained(std::int64_t count);
    void add_extra_round();

    std::int64_t sampled_total() const { return sampled_total_; }
    std::int64_t trained_total() const { return trained_total_; }
    const std::vector<StepLedgerEntry>& per_step() const { return per_step_; }

private:
    std::int64_t sampled_total_ = 0;
    std::int64_t trained_total_ = 0;
    std::vector<StepLedgerEntry> per_step_;
};

struct StepMetrics {
    std::int64_t step = 0;
    double mean_success = 0.0;
    double mean_reward_std = 0.0;  // mean group std over this step's trained groups
    std::int64_t sampled_cumulative = 0;
    std::int64_t trained_cumulative = 0;
    std::int32_t buffer_size = 0;
    std::int64_t evictions_cumulative = 0;
    std::int32_t extra_rounds = 0;
};

/// Cumulative sampled rollouts at the first step whose mean_success reaches
/// `target`; kNeverReached if the series never gets there.
std::int64_t rollouts_to_target(const std::vector<StepMetrics>& series, double target);

/// a / b; empty when either input is kNeverReached.
std::optional<double> efficiency_ratio(std::int64_t rollouts_a, std::int64_t rollouts_b);

/// Arithmetic mean of the per-group reward standard deviation.
double mean_group_std(const std::vector<GroupSample>& groups);

/// One point of a seed-averaged metrics series. Cumulative counts become
/// fractional under averaging.
struct AveragedStepPoint {
    std::int64_t step = 0;
    double mean_success = 0.0;
    double sampled_cumulative = 0.0;
};

/// Per-step mean across runs, truncated to the shortest series.
std::vector<AveragedStepPoint> average_series(
    const std::vector<std::vector<StepMetrics>>& runs);

/// Averaged-series analogue of rollouts_to_target; -1.0 when never reached.
double rollouts_to_target(const std::vector<AveragedStepPoint>& series, double target);

/// Flat delimited table with a fixed header, one row per step.
std::string metrics_to_csv(const std::vector<StepMetrics>& series);
extern const char* const kMetricsCsvHeader;

struct RunSummary {
    std::string method;
    std::uint64_t seed = 0;
    std::string config_digest;
    std::int64_t steps = 0;
    double peak_success = 0.0;
    double target = 0.0;
    std::int64_t rollouts_to_target = kNeverReached;
    std::int64_t sampled_total = 0;
    std::int64_t trained_total = 0;
    std::int64_t exhausted_at = -1;  // step at which the active pool ran dry, or -1
};

std::string summary_to_json(const RunSummary& summary);

}  // namespace pcsim
