#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <unordered_set>
#include <vector>

#include "pcsim/env.hpp"
#include "pcsim/metrics.hpp"

namespace pcsim {

struct SchedulerConfig {
    std::int32_t n_pilot = 16;
    std::int32_t n_commit = 48;
    double p_lower = 0.125;
    double p_upper = 0.75;
    double p_solve = 1.0;  // values > 1 disable eviction
    std::int32_t max_age_d = 4;
    std::int32_t b_t = 128;       // training batch
    std::int32_t oversample_s = 3;  // sampling batch b_g = s * b_t
    bool binding_enabled = true;

    std::int32_t b_g() const { return oversample_s * b_t; }
    void validate() const;  // throws config_error
};

enum class Classification : std::uint8_t { keep, defer_hard, skip_easy };

struct PilotEstimate {
    std::int32_t prompt_id = 0;
    std::int32_t successes = 0;  // k
    std::int32_t trials = 0;     // n_pilot
    std::vector<std::uint8_t> pilot_rewards;
    std::int64_t pilot_step = 0;  // policy step the rewards were sampled under

    double p_hat() const { return static_cast<double>(successes) / trials; }
};

/// A pilot survivor awaiting commit.
struct BufferEntry {
    PilotEstimate estimate;
    std::int64_t created_step = 0;
};

/// keep iff p_lower <= p_hat <= p_upper; defer_hard below, skip_easy above.
Classification classify(const PilotEstimate& estimate, const SchedulerConfig& config);

/// true iff p_hat >= p_solve.
bool should_evict(const PilotEstimate& estimate, const SchedulerConfig& config);

/// Epoch traversal over the active pool: one seeded shuffle per epoch, then
/// sequential slices. Evicted prompts are skipped lazily; eviction shrinks
/// the next epoch's order.
class EpochCursor {
public:
    explicit EpochCursor(std::uint64_t seed);

    /// Up to `count` distinct active ids, excluding `exclude` (may be null).
    /// Returns fewer than `count` only when the pool cannot supply more.
    std::vector<std::int32_t> next_batch(const Environment& env, std::int32_t count,
                                         const std::unordered_set<std::int32_t>* exclude);

    std::int64_t epochs_started() const { return epochs_; }

private:
    void start_epoch(const Environment& env);

    std::vector<std::int32_t> order_;
    std::size_t pos_ = 0;
    std::int64_t epochs_ = 0;
    Stream rng_;
};

struct ConsumedRecord {
    std::int32_t prompt_id = 0;
    std::int64_t created_step = 0;
    std::int64_t pilot_step = 0;
    bool from_buffer = false;
};

struct StepPlan {
    std::vector<PilotEstimate> selected;  // length b_t unless the pool ran dry
    std::vector<ConsumedRecord> consumed;  // one record per selected estimate
    std::vector<std::int32_t> deferred_hard;
    std::vector<std::int32_t> skipped_easy;
    std::vector<std::int32_t> evicted;
    std::int32_t extra_pilot_rounds = 0;
    bool pool_exhausted = false;
};

struct TrainedRecord {
    std::int32_t prompt_id = 0;
    std::vector<std::uint8_t> pilot_rewards;    // as stored at pilot time
    std::vector<std::uint8_t> trained_rewards;  // pilot ++ commit
};

/// Per-step event record, the scheduler's structured log. Counts are always
/// recorded; reward payloads only when detailed logging is on.
struct SchedulerStepRecord {
    std::int64_t step = 0;
    std::vector<std::int32_t> pilot_batch_ids;  // every prompt piloted this step
    std::vector<ConsumedRecord> consumed;
    std::vector<std::int32_t> evicted_ids;
    std::int32_t selected_count = 0;
    std::int32_t deferred_count = 0;
    std::int32_t skipped_count = 0;
    std::int32_t evicted_count = 0;
    std::int32_t extra_rounds = 0;
    std::int32_t buffer_size_after = 0;
    std::vector<TrainedRecord> trained;  // detailed logging only
};

/// The pilot/commit rollout allocator: pilot sampling, asymmetric filtering,
/// eviction of solved prompts, replay buffering with age limit d, commit
/// allocation, and training-batch assembly. With binding enabled, each step
/// consumes pilot estimates produced during the previous step (one-step
/// off-policy delay) and produces the pilot batch for the next step before
/// its own policy update is applied.
class PilotCommitScheduler {
public:
    PilotCommitScheduler(const SchedulerConfig& config, Environment& env,
                         BudgetLedger& ledger, std::uint64_t traversal_seed,
                         bool detailed_log = false);

    /// Samples n_pilot rollouts per prompt and credits the ledger.
    std::vector<PilotEstimate> run_pilot(std::span<const std::int32_t> batch,
                                         std::int64_t tag_step);

    /// Classifies estimates, applies eviction, fills the training batch from
    /// fresh keeps first and then the replay buffer oldest-first, running
    /// extra pilot rounds if both run out.
    StepPlan plan_step(std::vector<PilotEstimate> fresh, std::int64_t current_step);

    /// Draws n_commit fresh rollouts per selected prompt and returns the
    /// combined pilot ++ commit groups.
    std::vector<GroupSample> run_commit(StepPlan& plan, std::int64_t current_step);

    /// One full scheduler step. Returns the step's metrics, or nullopt when
    /// the active pool is exhausted (the run ends cleanly).
    std::optional<StepMetrics> step();

    std::int64_t current_step() const { return step_; }
    bool done() const { return done_; }
    std::int64_t exhausted_at() const { return exhausted_at_; }
    std::int64_t evictions_total() const { return evictions_total_; }
    const std::deque<BufferEntry>& buffer() const { return buffer_; }
    const std::vector<SchedulerStepRecord>& event_log() const { return log_; }

    /// Test hook: pre-load a replay buffer entry.
    void push_buffer_entry(PilotEstimate estimate, std::int64_t created_step);

private:
    void age_out_buffer(std::int64_t current_step);
    void purge_buffer(std::int32_t prompt_id);
    void evict_prompt(std::int32_t prompt_id);
    void process_estimates(std::vector<PilotEstimate>& estimates, StepPlan& plan,
                           std::unordered_set<std::int32_t>& selected_ids,
                           std::int64_t current_step);

    SchedulerConfig cfg_;
    Environment& env_;
    BudgetLedger& ledger_;
    EpochCursor cursor_;
    std::deque<BufferEntry> buffer_;
    std::vector<PilotEstimate> pending_;  // binding: pilot results for the next step
    bool have_pending_ = false;
    std::int64_t step_ = 0;
    std::int64_t evictions_total_ = 0;
    std::int64_t exhausted_at_ = -1;
    bool done_ = false;
    bool detailed_;
    std::vector<SchedulerStepRecord> log_;
};

}  // namespace pcsim
