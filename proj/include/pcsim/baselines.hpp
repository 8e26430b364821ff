#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "pcsim/env.hpp"
#include "pcsim/metrics.hpp"
#include "pcsim/scheduler.hpp"

namespace pcsim {

struct BaselineConfig {
    std::int32_t n = 64;  // rollouts per prompt
    std::int32_t b_t = 128;
    std::int32_t oversample_s = 3;  // DAPO only: b_g = s * b_t

    std::int32_t b_g() const { return oversample_s * b_t; }
    void validate() const;
};

/// Uniform allocation: every drawn prompt gets n rollouts and every group is
/// trained on, including zero-variance groups whose updates are exactly zero.
class GrpoRunner {
public:
    GrpoRunner(const BaselineConfig& config, Environment& env, BudgetLedger& ledger,
               std::uint64_t traversal_seed, bool detailed_log = false);

    std::optional<StepMetrics> step();

    bool done() const { return done_; }
    std::int64_t exhausted_at() const { return exhausted_at_; }
    const std::vector<std::vector<GroupSample>>& trained_log() const { return trained_log_; }

private:
    BaselineConfig cfg_;
    Environment& env_;
    BudgetLedger& ledger_;
    EpochCursor cursor_;
    std::int64_t step_ = 0;
    std::int64_t exhausted_at_ = -1;
    bool done_ = false;
    bool detailed_;
    std::vector<std::vector<GroupSample>> trained_log_;
};

/// Oversample-and-filter: samples n rollouts for each of b_g prompts, keeps
/// groups with nonzero reward variance, trains on the first b_t kept groups
/// in traversal order. Surplus survivors are discarded; deficits trigger
/// additional full sampling rounds.
class DapoRunner {
public:
    DapoRunner(const BaselineConfig& config, Environment& env, BudgetLedger& ledger,
               std::uint64_t traversal_seed, bool detailed_log = false);

    std::optional<StepMetrics> step();

    bool done() const { return done_; }
    std::int64_t exhausted_at() const { return exhausted_at_; }
    const std::vector<std::vector<GroupSample>>& trained_log() const { return trained_log_; }

private:
    BaselineConfig cfg_;
    Environment& env_;
    BudgetLedger& ledger_;
    EpochCursor cursor_;
    std::int64_t step_ = 0;
    std::int64_t exhausted_at_ = -1;
    bool done_ = false;
    bool detailed_;
    std::vector<std::vector<GroupSample>> trained_log_;
};

}  // namespace pcsim
