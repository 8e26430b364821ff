#include "pcsim/env.hpp"

#include <cmath>
#include <string>

#include "pcsim/errors.hpp"
#include "pcsim/grpo.hpp"

namespace pcsim {

namespace {

// Stream ids 0..population-1 belong to prompts; give internal streams ids far
// outside that range.
constexpr std::uint64_t kInitStream = 0xefac'1000'0000'0001ull;

double logit_of(double p) { return std::log(p / (1.0 - p)); }

}  // namespace

void EnvConfig::validate() const {
    if (population_size < 0) {
        throw config_error("env.population_size", "must be >= 0");
    }
    if (!(hopeless_fraction >= 0.0 && hopeless_fraction < 1.0)) {
        throw config_error("env.hopeless_fraction", "must lie in [0, 1)");
    }
    if (!(learning_rate > 0.0)) {
        throw config_error("env.learning_rate", "must be > 0");
    }
    if (!(hopeless_p > 0.0 && hopeless_p < 1.0)) {
        throw config_error("env.hopeless_p", "must lie in (0, 1)");
    }
    const MixtureConfig& m = mixture;
    if (m.hard_weight < 0.0 || m.mid_weight < 0.0 || m.easy_weight < 0.0) {
        throw config_error("env.mixture", "weights must be >= 0");
    }
    if (m.hard_weight + m.mid_weight + m.easy_weight <= 0.0) {
        throw config_error("env.mixture", "weights must not all be zero");
    }
    if (!(m.hard_p > 0.0 && m.hard_p < 1.0) || !(m.easy_p > 0.0 && m.easy_p < 1.0)) {
        throw config_error("env.mixture", "component probabilities must lie in (0, 1)");
    }
    if (!(m.mid_p_lo > 0.0 && m.mid_p_lo <= m.mid_p_hi && m.mid_p_hi < 1.0)) {
        throw config_error("env.mixture", "mid range must satisfy 0 < lo <= hi < 1");
    }
}

Environment::Environment(const EnvConfig& config) : cfg_(config) {
    cfg_.validate();
    const std::int32_t n = cfg_.population_size;
    prompts_.reserve(n);
    streams_.reserve(n);

    // Hopeless prompts are placed by a seeded shuffle so their positions do
    // not correlate with prompt ids.
    Stream init(cfg_.seed, kInitStream);
    std::vector<std::int32_t> placement(n);
    for (std::int32_t i = 0; i < n; ++i) placement[i] = i;
    shuffle(placement, init);
    const auto hopeless_count =
        static_cast<std::int32_t>(cfg_.hopeless_fraction * static_cast<double>(n));
    std::vector<std::uint8_t> hopeless(n, 0);
    for (std::int32_t i = 0; i < hopeless_count; ++i) hopeless[placement[i]] = 1;

    const MixtureConfig& m = cfg_.mixture;
    const double total = m.hard_weight + m.mid_weight + m.easy_weight;
    for (std::int32_t id = 0; id < n; ++id) {
        PromptState prompt;
        prompt.id = id;
        if (hopeless[id]) {
            prompt.logit = logit_of(cfg_.hopeless_p);
            prompt.learnable = false;
        } else {
            const double u = init.next_unit() * total;
            if (u < m.hard_weight) {
                prompt.logit = logit_of(m.hard_p);
            } else if (u < m.hard_weight + m.mid_weight) {
                const double p = m.mid_p_lo + init.next_unit() * (m.mid_p_hi - m.mid_p_lo);
                prompt.logit = logit_of(p);
            } else {
                prompt.logit = logit_of(m.easy_p);
            }
        }
        prompts_.push_back(prompt);
        streams_.emplace_back(cfg_.seed, static_cast<std::uint64_t>(id));
    }
    active_count_ = n;
}

const PromptState& Environment::prompt(std::int32_t id) const {
    if (id < 0 || id >= population_size()) {
        throw std::invalid_argument("prompt id out of range: " + std::to_string(id));
    }
    return prompts_[id];
}

std::vector<std::uint8_t> Environment::sample_rollouts(std::int32_t id, int count) {
    const PromptState& p = prompt(id);
    if (count < 1) {
        throw std::invalid_argument("rollout count must be >= 1, got " + std::to_string(count));
    }
    if (p.status == PromptStatus::evicted) {
        throw error("sample_rollouts: prompt " + std::to_string(id) + " is evicted");
    }
    const double success = sigmoid(p.logit);
    std::vector<std::uint8_t> rewards(count);
    Stream& stream = streams_[id];
    for (int i = 0; i < count; ++i) {
        rewards[i] = stream.next_bernoulli(success) ? 1 : 0;
    }
    total_draws_ += count;
    return rewards;
}

void Environment::apply_update(std::int32_t id, std::span<const std::uint8_t> rewards,
                               double learning_rate) {
    const PromptState& p = prompt(id);
    if (p.status == PromptStatus::evicted) {
        throw error("apply_update: prompt " + std::to_string(id) + " is evicted");
    }
    if (rewards.empty()) {
        throw std::invalid_argument("apply_update: empty reward group");
    }
    if (!p.learnable) return;
    const double grad = surrogate_gradient(p.logit, rewards);
    prompts_[id].logit += learning_rate * grad;
}

void Environment::evict(std::int32_t id) {
    const PromptState& p = prompt(id);
    if (p.status == PromptStatus::evicted) {
        throw error("evict: prompt " + std::to_string(id) + " already evicted");
    }
    prompts_[id].status = PromptStatus::evicted;
    --active_count_;
}

double Environment::eval_mean_success() const {
    if (prompts_.empty()) {
        throw error("eval_mean_success: empty population");
    }
    double sum = 0.0;
    for (const PromptState& p : prompts_) sum += sigmoid(p.logit);
    return sum / static_cast<double>(prompts_.size());
}

std::vector<std::int32_t> Environment::active_ids() const {
    std::vector<std::int32_t> ids;
    ids.reserve(active_count_);
    for (const PromptState& p : prompts_) {
        if (p.status == PromptStatus::active) ids.push_back(p.id);
    }
    return ids;
}

}  // namespace pcsim
