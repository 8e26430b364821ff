#include "pcsim/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>

#include "pcsim/errors.hpp"

#include "json.hpp"

namespace pcsim {

namespace {

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

void BudgetLedger::begin_step(std::int64_t step) {
    per_step_.push_back(StepLedgerEntry{step, 0, 0, 0});
}

void BudgetLedger::add_sampled(std::int64_t count) {
    if (per_step_.empty()) throw error("ledger: add_sampled before begin_step");
    per_step_.back().sampled += count;
    sampled_total_ += count;
}

void BudgetLedger::add_trained(std::int64_t count) {
    if (per_step_.empty()) throw error("ledger: add_trained before begin_step");
    per_step_.back().trained += count;
    trained_total_ += count;
}

void BudgetLedger::add_extra_round() {
    if (per_step_.empty()) throw error("ledger: add_extra_round before begin_step");
    per_step_.back().extra_rounds += 1;
}

std::int64_t rollouts_to_target(const std::vector<StepMetrics>& series, double target) {
    for (const StepMetrics& m : series) {
        if (m.mean_success >= target) return m.sampled_cumulative;
    }
    return kNeverReached;
}

std::optional<double> efficiency_ratio(std::int64_t rollouts_a, std::int64_t rollouts_b) {
    if (rollouts_a == kNeverReached || rollouts_b == kNeverReached) return std::nullopt;
    return static_cast<double>(rollouts_a) / static_cast<double>(rollouts_b);
}

double mean_group_std(const std::vector<GroupSample>& groups) {
    if (groups.empty()) throw error("mean_group_std: no groups");
    double sum = 0.0;
    for (const GroupSample& g : groups) sum += group_stats(g.rewards).std_dev;
    return sum / static_cast<double>(groups.size());
}

std::vector<AveragedStepPoint> average_series(
    const std::vector<std::vector<StepMetrics>>& runs) {
    if (runs.empty()) return {};
    std::size_t length = std::numeric_limits<std::size_t>::max();
    for (const auto& run : runs) length = std::min(length, run.size());
    if (length == std::numeric_limits<std::size_t>::max()) length = 0;

    std::vector<AveragedStepPoint> out(length);
    const double inv = 1.0 / static_cast<double>(runs.size());
    for (std::size_t i = 0; i < length; ++i) {
        AveragedStepPoint& p = out[i];
        p.step = runs.front()[i].step;
        for (const auto& run : runs) {
            p.mean_success += run[i].mean_success;
            p.sampled_cumulative += static_cast<double>(run[i].sampled_cumulative);
        }
        p.mean_success *= inv;
        p.sampled_cumulative *= inv;
    }
    return out;
}

double rollouts_to_target(const std::vector<AveragedStepPoint>& series, double target) {
    for (const AveragedStepPoint& p : series) {
        if (p.mean_success >= target) return p.sampled_cumulative;
    }
    return -1.0;
}

const char* const kMetricsCsvHeader =
    "step,mean_success,mean_reward_std,sampled_cum,trained_cum,buffer_size,"
    "evictions_cum,extra_rounds";

std::string metrics_to_csv(const std::vector<StepMetrics>& series) {
    std::string out = kMetricsCsvHeader;
    out += '\n';
    for (const StepMetrics& m : series) {
        out += std::to_string(m.step);
        out += ',';
        out += format_double(m.mean_success);
        out += ',';
        out += format_double(m.mean_reward_std);
        out += ',';
        out += std::to_string(m.sampled_cumulative);
        out += ',';
        out += std::to_string(m.trained_cumulative);
        out += ',';
        out += std::to_string(m.buffer_size);
        out += ',';
        out += std::to_string(m.evictions_cumulative);
        out += ',';
        out += std::to_string(m.extra_rounds);
        out += '\n';
    }
    return out;
}

std::string summary_to_json(const RunSummary& s) {
    nlohmann::json j;
    j["method"] = s.method;
    j["seed"] = s.seed;
    j["config_digest"] = s.config_digest;
    j["steps"] = s.steps;
    j["peak_success"] = s.peak_success;
    j["target"] = s.target;
    if (s.rollouts_to_target == kNeverReached) {
        j["rollouts_to_target"] = nullptr;
        j["reached_target"] = false;
    } else {
        j["rollouts_to_target"] = s.rollouts_to_target;
        j["reached_target"] = true;
    }
    j["sampled_total"] = s.sampled_total;
    j["trained_total"] = s.trained_total;
    j["exhausted_at"] = s.exhausted_at;
    return j.dump(2) + "\n";
}

}  // namespace pcsim
