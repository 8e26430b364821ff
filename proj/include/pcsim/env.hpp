#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pcsim/rng.hpp"

namespace pcsim {

enum class PromptStatus : std::uint8_t { active, evicted };

struct PromptState {
    std::int32_t id = 0;
    double logit = 0.0;  // success probability = sigmoid(logit)
    PromptStatus status = PromptStatus::active;
    bool learnable = true;  // false models unsolvable prompts: logit is frozen
    std::int32_t created_epoch = 0;
};

/// Three-component initial difficulty mixture. Proportions and levels are
/// config, not constants: they shape how many prompts start hard, in the
/// informative mid range, or near solved.
struct MixtureConfig {
    double hard_weight = 0.45;
    double mid_weight = 0.35;
    double easy_weight = 0.20;
    double hard_p = 0.02;
    double mid_p_lo = 0.20;
    double mid_p_hi = 0.80;
    double easy_p = 0.90;
};

struct EnvConfig {
    std::int32_t population_size = 4096;
    MixtureConfig mixture;
    double hopeless_fraction = 0.10;  // unsolvable prompts, logit frozen
    double hopeless_p = 0.001;
    double learning_rate = 1.0;
    std::uint64_t seed = 1;

    void validate() const;  // throws config_error
};

/// A synthetic population of prompts, each a one-parameter Bernoulli policy.
/// Rollout draws come from one counter-based stream per prompt keyed on
/// (seed, prompt id), so sampling order across prompts never changes any
/// prompt's reward sequence.
class Environment {
public:
    explicit Environment(const EnvConfig& config);

    std::int32_t population_size() const { return static_cast<std::int32_t>(prompts_.size()); }
    const PromptState& prompt(std::int32_t id) const;
    const EnvConfig& config() const { return cfg_; }

    /// `count` Bernoulli(sigmoid(logit)) draws from the prompt's stream.
    /// Sampling an evicted prompt is a contract violation and throws.
    std::vector<std::uint8_t> sample_rollouts(std::int32_t id, int count);

    /// One aggregate policy step on the prompt: logit += lr * surrogate
    /// gradient of the reward group. No-op for degenerate groups and for
    /// non-learnable prompts.
    void apply_update(std::int32_t id, std::span<const std::uint8_t> rewards,
                      double learning_rate);

    void evict(std::int32_t id);

    /// Mean success probability over ALL prompts, including evicted and
    /// non-learnable ones, so eviction bookkeeping cannot inflate the score.
    double eval_mean_success() const;

    std::int32_t active_count() const { return active_count_; }
    std::vector<std::int32_t> active_ids() const;

    /// Total rollouts ever drawn; independent cross-check for budget ledgers.
    std::int64_t total_draws() const { return total_draws_; }

private:
    EnvConfig cfg_;
    std::vector<PromptState> prompts_;
    std::vector<Stream> streams_;
    std::int32_t active_count_ = 0;
    std::int64_t total_draws_ = 0;
};

}  // namespace pcsim
