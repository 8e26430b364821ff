#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace pcsim {

/// A group of binary rewards sampled for one prompt, tagged with the policy
/// step at which they were drawn.
struct GroupSample {
    std::int32_t prompt_id = 0;
    std::vector<std::uint8_t> rewards;
    std::int64_t policy_step = 0;
};

struct GroupStats {
    double mean = 0.0;
    double std_dev = 0.0;  // population normalization (divide by G)
    int group_size = 0;
};

struct AdvantageVector {
    std::vector<double> values;
    bool degenerate = false;  // true iff sigma == 0; values are then all zero
};

/// Split of a group's gradient into one contribution per reward cluster.
/// For single-step binary outcomes the decomposition is exact:
/// |gradient| = |positive_mass| / G * |g_plus - g_minus|.
struct TwoClusterDecomposition {
    double positive_mass = 0.0;  // sum of advantages over rewards >= mean
    double g_plus = 0.0;
    double g_minus = 0.0;
    double gradient_magnitude = 0.0;
    int group_size = 0;
};

/// Result of exhaustively enumerating all binary reward vectors of a given
/// group size and maximizing the positive advantage mass.
struct BoundCheckReport {
    int group_size = 0;
    double max_positive_mass = 0.0;
    std::vector<std::uint32_t> maximizer_masks;  // bit i set <=> reward i == 1
    double bound = 0.0;                          // G / 2
    bool bound_holds = false;
    bool tight = false;                          // max reaches the bound
    bool maximizers_all_balanced = false;        // every maximizer has G/2 ones
    std::int64_t vectors_checked = 0;
};

double sigmoid(double logit);

/// Mean and population standard deviation of a binary reward group.
GroupStats group_stats(std::span<const std::uint8_t> rewards);

/// Group-relative advantages (r_i - mean) / std. A zero-variance group yields
/// all-zero values with the degenerate flag set instead of an error, so
/// all-correct and all-incorrect groups flow through training as no-ops.
AdvantageVector advantages(std::span<const std::uint8_t> rewards);

/// Per-sample score for a single-step Bernoulli policy with success
/// probability sigmoid(logit): d/dlogit log p(reward).
double bernoulli_score(double logit, std::uint8_t reward);

/// Gradient of the group surrogate objective: (1/G) sum_i A_i * score_i.
/// Returns 0 for degenerate groups.
double surrogate_gradient(double logit, std::span<const std::uint8_t> rewards);

/// Throws degenerate_group_error when the group has zero variance.
TwoClusterDecomposition two_cluster_decompose(double logit,
                                              std::span<const std::uint8_t> rewards);

/// Enumerates all 2^G binary reward vectors (2 <= G <= 16) and reports the
/// maximum positive advantage mass together with its maximizers.
BoundCheckReport positive_mass_bound_check(int group_size);

/// Bernoulli reward variance p(1-p) given an estimated success rate.
double variance_proxy(double p_hat);

}  // namespace pcsim
