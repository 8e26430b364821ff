#include "pcsim/scheduler.hpp"

#include <algorithm>
#include <string>

#include "pcsim/errors.hpp"
#include "pcsim/grpo.hpp"

namespace pcsim {

namespace {
constexpr std::uint64_t kTraversalStream = 0xefac'2000'0000'0002ull;
}

void SchedulerConfig::validate() const {
    if (n_pilot < 1) throw config_error("scheduler.n_pilot", "must be >= 1");
    if (n_commit < 0) throw config_error("scheduler.n_commit", "must be >= 0");
    if (!(p_lower >= 0.0 && p_lower <= 1.0)) {
        throw config_error("scheduler.p_lower", "must lie in [0, 1]");
    }
    if (!(p_upper >= 0.0 && p_upper <= 1.0)) {
        throw config_error("scheduler.p_upper", "must lie in [0, 1]");
    }
    if (!(p_solve > 0.0)) {
        throw config_error("scheduler.p_solve", "must be > 0 (values > 1 disable eviction)");
    }
    if (p_lower > p_upper) {
        throw config_error("scheduler.p_lower", "must be <= p_upper");
    }
    if (p_upper > p_solve) {
        throw config_error("scheduler.p_upper", "must be <= p_solve");
    }
    if (max_age_d < 0) throw config_error("scheduler.max_age_d", "must be >= 0");
    if (b_t < 1) throw config_error("scheduler.b_t", "must be >= 1");
    if (oversample_s < 1) throw config_error("scheduler.oversample_s", "must be >= 1");
}

Classification classify(const PilotEstimate& estimate, const SchedulerConfig& config) {
    const double p_hat = estimate.p_hat();
    if (p_hat < config.p_lower) return Classification::defer_hard;
    if (p_hat > config.p_upper) return Classification::skip_easy;
    return Classification::keep;
}

bool should_evict(const PilotEstimate& estimate, const SchedulerConfig& config) {
    return estimate.p_hat() >= config.p_solve;
}

EpochCursor::EpochCursor(std::uint64_t seed) : rng_(seed, kTraversalStream) {}

void EpochCursor::start_epoch(const Environment& env) {
    order_ = env.active_ids();
    shuffle(order_, rng_);
    pos_ = 0;
    ++epochs_;
}

std::vector<std::int32_t> EpochCursor::next_batch(
    const Environment& env, std::int32_t count,
    const std::unordered_set<std::int32_t>* exclude) {
    std::vector<std::int32_t> batch;
    if (env.active_count() == 0) return batch;
    batch.reserve(count);
    std::unordered_set<std::int32_t> in_batch;
    int fruitless_epochs = 0;
    while (static_cast<std::int32_t>(batch.size()) < count) {
        if (pos_ >= order_.size()) {
            if (fruitless_epochs >= 2) break;  // nothing left that we may draw
            start_epoch(env);
            ++fruitless_epochs;
            if (order_.empty()) break;
        }
        const std::int32_t id = order_[pos_++];
        if (env.prompt(id).status != PromptStatus::active) continue;  // evicted mid-epoch
        if (exclude && exclude->count(id)) continue;
        if (in_batch.count(id)) continue;
        batch.push_back(id);
        in_batch.insert(id);
        fruitless_epochs = 0;
    }
    return batch;
}

PilotCommitScheduler::PilotCommitScheduler(const SchedulerConfig& config, Environment& env,
                                           BudgetLedger& ledger,
                                           std::uint64_t traversal_seed, bool detailed_log)
    : cfg_(config), env_(env), ledger_(ledger), cursor_(traversal_seed),
      detailed_(detailed_log) {
    cfg_.validate();
}

std::vector<PilotEstimate> PilotCommitScheduler::run_pilot(
    std::span<const std::int32_t> batch, std::int64_t tag_step) {
    std::vector<PilotEstimate> estimates;
    estimates.reserve(batch.size());
    for (std::int32_t id : batch) {
        PilotEstimate est;
        est.prompt_id = id;
        est.trials = cfg_.n_pilot;
        est.pilot_rewards = env_.sample_rollouts(id, cfg_.n_pilot);
        est.successes = 0;
        for (std::uint8_t r : est.pilot_rewards) est.successes += r;
        est.pilot_step = tag_step;
        estimates.push_back(std::move(est));
    }
    ledger_.add_sampled(static_cast<std::int64_t>(batch.size()) * cfg_.n_pilot);
    if (!log_.empty() && log_.back().step == step_) {
        auto& ids = log_.back().pilot_batch_ids;
        ids.insert(ids.end(), batch.begin(), batch.end());
    }
    return estimates;
}

void PilotCommitScheduler::age_out_buffer(std::int64_t current_step) {
    std::erase_if(buffer_, [&](const BufferEntry& e) {
        return current_step - e.created_step > cfg_.max_age_d;
    });
}

void PilotCommitScheduler::purge_buffer(std::int32_t prompt_id) {
    std::erase_if(buffer_, [&](const BufferEntry& e) {
        return e.estimate.prompt_id == prompt_id;
    });
}

void PilotCommitScheduler::evict_prompt(std::int32_t prompt_id) {
    env_.evict(prompt_id);
    purge_buffer(prompt_id);
    ++evictions_total_;
}

void PilotCommitScheduler::process_estimates(std::vector<PilotEstimate>& estimates,
                                             StepPlan& plan,
                                             std::unordered_set<std::int32_t>& selected_ids,
                                             std::int64_t current_step) {
    for (PilotEstimate& est : estimates) {
        const std::int32_t id = est.prompt_id;
        const Classification cls = classify(est, cfg_);
        if (should_evict(est, cfg_)) {
            // Evicted prompts leave every future sampling path, including a
            // pending commit: a keep-classified survivor is dropped rather
            // than buffered, and any older buffer entries are purged.
            evict_prompt(id);
            plan.evicted.push_back(id);
            if (cls == Classification::skip_easy) plan.skipped_easy.push_back(id);
            continue;
        }
        switch (cls) {
            case Classification::keep:
                if (static_cast<std::int32_t>(plan.selected.size()) < cfg_.b_t &&
                    !selected_ids.count(id)) {
                    selected_ids.insert(id);
                    plan.consumed.push_back(
                        ConsumedRecord{id, current_step, est.pilot_step, false});
                    plan.selected.push_back(std::move(est));
                } else {
                    buffer_.push_back(BufferEntry{std::move(est), current_step});
                }
                break;
            case Classification::defer_hard:
                plan.deferred_hard.push_back(id);
                break;
            case Classification::skip_easy:
                plan.skipped_easy.push_back(id);
                break;
        }
    }
    estimates.clear();
}

StepPlan PilotCommitScheduler::plan_step(std::vector<PilotEstimate> fresh,
                                         std::int64_t current_step) {
    age_out_buffer(current_step);

    StepPlan plan;
    std::unordered_set<std::int32_t> selected_ids;
    std::unordered_set<std::int32_t> piloted_this_step;
    for (const PilotEstimate& est : fresh) piloted_this_step.insert(est.prompt_id);

    // Fresh keeps fill the batch first; the replay buffer covers the deficit
    // oldest-first; excess keeps are buffered for later steps.
    process_estimates(fresh, plan, selected_ids, current_step);

    for (auto it = buffer_.begin();
         it != buffer_.end() && static_cast<std::int32_t>(plan.selected.size()) < cfg_.b_t;) {
        if (selected_ids.count(it->estimate.prompt_id)) {
            ++it;  // already trained this step via a fresher estimate
            continue;
        }
        plan.consumed.push_back(ConsumedRecord{it->estimate.prompt_id, it->created_step,
                                               it->estimate.pilot_step, true});
        selected_ids.insert(it->estimate.prompt_id);
        plan.selected.push_back(std::move(it->estimate));
        it = buffer_.erase(it);
    }

    const std::int32_t rounds_cap =
        (env_.active_count() + cfg_.b_g() - 1) / std::max(cfg_.b_g(), 1);
    while (static_cast<std::int32_t>(plan.selected.size()) < cfg_.b_t &&
           plan.extra_pilot_rounds < rounds_cap) {
        std::vector<std::int32_t> batch =
            cursor_.next_batch(env_, cfg_.b_g(), &piloted_this_step);
        if (batch.empty()) break;
        ++plan.extra_pilot_rounds;
        ledger_.add_extra_round();
        for (std::int32_t id : batch) piloted_this_step.insert(id);
        std::vector<PilotEstimate> extra = run_pilot(batch, current_step);
        process_estimates(extra, plan, selected_ids, current_step);
    }

    if (static_cast<std::int32_t>(plan.selected.size()) < cfg_.b_t) {
        plan.pool_exhausted = true;
    }
    return plan;
}

std::vector<GroupSample> PilotCommitScheduler::run_commit(StepPlan& plan,
                                                          std::int64_t current_step) {
    (void)current_step;
    std::vector<GroupSample> batch;
    batch.reserve(plan.selected.size());
    for (const PilotEstimate& est : plan.selected) {
        GroupSample group;
        group.prompt_id = est.prompt_id;
        group.policy_step = est.pilot_step;
        group.rewards = est.pilot_rewards;
        if (cfg_.n_commit > 0) {
            std::vector<std::uint8_t> fresh = env_.sample_rollouts(est.prompt_id, cfg_.n_commit);
            group.rewards.insert(group.rewards.end(), fresh.begin(), fresh.end());
        }
        batch.push_back(std::move(group));
    }
    const auto selected = static_cast<std::int64_t>(plan.selected.size());
    ledger_.add_sampled(selected * cfg_.n_commit);
    ledger_.add_trained(selected * (cfg_.n_pilot + cfg_.n_commit));
    return batch;
}

std::optional<StepMetrics> PilotCommitScheduler::step() {
    if (done_) return std::nullopt;
    ledger_.begin_step(step_);
    log_.push_back(SchedulerStepRecord{});
    log_.back().step = step_;

    std::vector<PilotEstimate> fresh;
    if (cfg_.binding_enabled) {
        if (have_pending_) {
            fresh = std::move(pending_);
            pending_.clear();
            have_pending_ = false;
        } else {
            // Pipeline fill: the very first step has no estimates from a
            // previous step, so it pilots and consumes in place.
            std::vector<std::int32_t> batch = cursor_.next_batch(env_, cfg_.b_g(), nullptr);
            fresh = run_pilot(batch, step_);
        }
    } else {
        std::vector<std::int32_t> batch = cursor_.next_batch(env_, cfg_.b_g(), nullptr);
        fresh = run_pilot(batch, step_);
    }

    StepPlan plan = plan_step(std::move(fresh), step_);

    SchedulerStepRecord& record = log_.back();
    record.selected_count = static_cast<std::int32_t>(plan.selected.size());
    record.deferred_count = static_cast<std::int32_t>(plan.deferred_hard.size());
    record.skipped_count = static_cast<std::int32_t>(plan.skipped_easy.size());
    record.evicted_count = static_cast<std::int32_t>(plan.evicted.size());
    record.evicted_ids = plan.evicted;
    record.extra_rounds = plan.extra_pilot_rounds;
    record.consumed = plan.consumed;

    if (plan.pool_exhausted) {
        done_ = true;
        exhausted_at_ = step_;
        record.buffer_size_after = static_cast<std::int32_t>(buffer_.size());
        return std::nullopt;
    }

    std::vector<GroupSample> trained = run_commit(plan, step_);

    if (detailed_) {
        record.trained.reserve(trained.size());
        for (std::size_t i = 0; i < trained.size(); ++i) {
            TrainedRecord tr;
            tr.prompt_id = trained[i].prompt_id;
            tr.pilot_rewards = plan.selected[i].pilot_rewards;
            tr.trained_rewards = trained[i].rewards;
            record.trained.push_back(std::move(tr));
        }
    }

    if (cfg_.binding_enabled) {
        // Pilot batch for the next step, sampled under the pre-update policy:
        // in an overlapped system this pass runs concurrently with training.
        std::vector<std::int32_t> batch = cursor_.next_batch(env_, cfg_.b_g(), nullptr);
        if (!batch.empty()) {
            pending_ = run_pilot(batch, step_);
            have_pending_ = true;
        }
    }

    // Updates applied sequentially in prompt-id order.
    std::vector<const GroupSample*> ordered;
    ordered.reserve(trained.size());
    for (const GroupSample& g : trained) ordered.push_back(&g);
    std::sort(ordered.begin(), ordered.end(),
              [](const GroupSample* a, const GroupSample* b) {
                  return a->prompt_id < b->prompt_id;
              });
    for (const GroupSample* g : ordered) {
        env_.apply_update(g->prompt_id, g->rewards, env_.config().learning_rate);
    }

    record.buffer_size_after = static_cast<std::int32_t>(buffer_.size());

    StepMetrics metrics;
    metrics.step = step_;
    metrics.mean_success = env_.eval_mean_success();
    metrics.mean_reward_std = trained.empty() ? 0.0 : mean_group_std(trained);
    metrics.sampled_cumulative = ledger_.sampled_total();
    metrics.trained_cumulative = ledger_.trained_total();
    metrics.buffer_size = static_cast<std::int32_t>(buffer_.size());
    metrics.evictions_cumulative = evictions_total_;
    metrics.extra_rounds = plan.extra_pilot_rounds;

    ++step_;
    return metrics;
}

void PilotCommitScheduler::push_buffer_entry(PilotEstimate estimate,
                                             std::int64_t created_step) {
    buffer_.push_back(BufferEntry{std::move(estimate), created_step});
}

}  // namespace pcsim
