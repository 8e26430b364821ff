#include "pcsim/baselines.hpp"

#include <algorithm>

#include "pcsim/errors.hpp"
#include "pcsim/grpo.hpp"

namespace pcsim {

void BaselineConfig::validate() const {
    if (n < 2) throw config_error("baseline.n", "must be >= 2");
    if (b_t < 1) throw config_error("baseline.b_t", "must be >= 1");
    if (oversample_s < 1) throw config_error("baseline.oversample_s", "must be >= 1");
}

namespace {

// Updates go out in prompt-id order; the group list itself keeps traversal
// order so metrics sum in a method-independent order.
void apply_updates_in_id_order(Environment& env, const std::vector<GroupSample>& groups) {
    std::vector<const GroupSample*> ordered;
    ordered.reserve(groups.size());
    for (const GroupSample& g : groups) ordered.push_back(&g);
    std::sort(ordered.begin(), ordered.end(),
              [](const GroupSample* a, const GroupSample* b) {
                  return a->prompt_id < b->prompt_id;
              });
    for (const GroupSample* g : ordered) {
        env.apply_update(g->prompt_id, g->rewards, env.config().learning_rate);
    }
}

StepMetrics make_metrics(std::int64_t step, const Environment& env,
                         const BudgetLedger& ledger, const std::vector<GroupSample>& trained,
                         std::int32_t extra_rounds) {
    StepMetrics m;
    m.step = step;
    m.mean_success = env.eval_mean_success();
    m.mean_reward_std = trained.empty() ? 0.0 : mean_group_std(trained);
    m.sampled_cumulative = ledger.sampled_total();
    m.trained_cumulative = ledger.trained_total();
    m.buffer_size = 0;
    m.evictions_cumulative = 0;
    m.extra_rounds = extra_rounds;
    return m;
}

}  // namespace

GrpoRunner::GrpoRunner(const BaselineConfig& config, Environment& env, BudgetLedger& ledger,
                       std::uint64_t traversal_seed, bool detailed_log)
    : cfg_(config), env_(env), ledger_(ledger), cursor_(traversal_seed),
      detailed_(detailed_log) {
    cfg_.validate();
}

std::optional<StepMetrics> GrpoRunner::step() {
    if (done_) return std::nullopt;
    ledger_.begin_step(step_);

    std::vector<std::int32_t> batch = cursor_.next_batch(env_, cfg_.b_t, nullptr);
    if (static_cast<std::int32_t>(batch.size()) < cfg_.b_t) {
        done_ = true;
        exhausted_at_ = step_;
        return std::nullopt;
    }

    std::vector<GroupSample> trained;
    trained.reserve(batch.size());
    for (std::int32_t id : batch) {
        GroupSample g;
        g.prompt_id = id;
        g.policy_step = step_;
        g.rewards = env_.sample_rollouts(id, cfg_.n);
        trained.push_back(std::move(g));
    }
    ledger_.add_sampled(static_cast<std::int64_t>(batch.size()) * cfg_.n);
    ledger_.add_trained(static_cast<std::int64_t>(batch.size()) * cfg_.n);

    if (detailed_) trained_log_.push_back(trained);
    apply_updates_in_id_order(env_, trained);

    StepMetrics m = make_metrics(step_, env_, ledger_, trained, 0);
    ++step_;
    return m;
}

DapoRunner::DapoRunner(const BaselineConfig& config, Environment& env, BudgetLedger& ledger,
                       std::uint64_t traversal_seed, bool detailed_log)
    : cfg_(config), env_(env), ledger_(ledger), cursor_(traversal_seed),
      detailed_(detailed_log) {
    cfg_.validate();
}

std::optional<StepMetrics> DapoRunner::step() {
    if (done_) return std::nullopt;
    ledger_.begin_step(step_);

    std::vector<GroupSample> survivors;
    survivors.reserve(cfg_.b_t);
    std::unordered_set<std::int32_t> sampled_this_step;
    const std::int32_t rounds_cap =
        (env_.active_count() + cfg_.b_g() - 1) / std::max(cfg_.b_g(), 1);
    std::int32_t rounds = 0;

    while (static_cast<std::int32_t>(survivors.size()) < cfg_.b_t && rounds < rounds_cap) {
        std::vector<std::int32_t> batch =
            cursor_.next_batch(env_, cfg_.b_g(), &sampled_this_step);
        if (batch.empty()) break;
        ++rounds;
        if (rounds > 1) ledger_.add_extra_round();
        for (std::int32_t id : batch) {
            sampled_this_step.insert(id);
            std::vector<std::uint8_t> rewards = env_.sample_rollouts(id, cfg_.n);
            // Keep only groups with nonzero reward variance; surplus beyond
            // the training batch is discarded.
            if (static_cast<std::int32_t>(survivors.size()) < cfg_.b_t) {
                const GroupStats stats = group_stats(rewards);
                if (stats.std_dev > 0.0) {
                    GroupSample g;
                    g.prompt_id = id;
                    g.policy_step = step_;
                    g.rewards = std::move(rewards);
                    survivors.push_back(std::move(g));
                }
            }
        }
        ledger_.add_sampled(static_cast<std::int64_t>(batch.size()) * cfg_.n);
    }

    if (static_cast<std::int32_t>(survivors.size()) < cfg_.b_t) {
        done_ = true;
        exhausted_at_ = step_;
        return std::nullopt;
    }

    ledger_.add_trained(static_cast<std::int64_t>(survivors.size()) * cfg_.n);
    if (detailed_) trained_log_.push_back(survivors);
    apply_updates_in_id_order(env_, survivors);

    StepMetrics m = make_metrics(step_, env_, ledger_, survivors, rounds - 1);
    ++step_;
    return m;
}

}  // namespace pcsim
