#include "pcsim/grpo.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

#include "pcsim/errors.hpp"

namespace pcsim {

namespace {

void check_rewards(std::span<const std::uint8_t> rewards) {
    if (rewards.size() < 2) {
        throw std::invalid_argument("reward group too small: need at least 2, got " +
                                    std::to_string(rewards.size()));
    }
    for (std::size_t i = 0; i < rewards.size(); ++i) {
        if (rewards[i] > 1) {
            throw std::invalid_argument("non-binary reward at index " + std::to_string(i) +
                                        ": " + std::to_string(int(rewards[i])));
        }
    }
}

void check_logit(double logit) {
    if (!std::isfinite(logit)) {
        throw std::invalid_argument("logit must be finite");
    }
}

int success_count(std::span<const std::uint8_t> rewards) {
    int k = 0;
    for (std::uint8_t r : rewards) k += r;
    return k;
}

}  // namespace

double sigmoid(double logit) {
    if (logit >= 0.0) {
        const double e = std::exp(-logit);
        return 1.0 / (1.0 + e);
    }
    const double e = std::exp(logit);
    return e / (1.0 + e);
}

GroupStats group_stats(std::span<const std::uint8_t> rewards) {
    check_rewards(rewards);
    const int g = static_cast<int>(rewards.size());
    const int k = success_count(rewards);
    GroupStats stats;
    stats.group_size = g;
    stats.mean = static_cast<double>(k) / g;
    // For binary rewards sum (r - mean)^2 = k(G-k)/G, exactly.
    stats.std_dev = std::sqrt(static_cast<double>(k) * (g - k)) / g;
    return stats;
}

AdvantageVector advantages(std::span<const std::uint8_t> rewards) {
    const GroupStats stats = group_stats(rewards);
    AdvantageVector adv;
    adv.values.resize(rewards.size(), 0.0);
    if (stats.std_dev == 0.0) {
        adv.degenerate = true;
        return adv;
    }
    for (std::size_t i = 0; i < rewards.size(); ++i) {
        adv.values[i] = (rewards[i] - stats.mean) / stats.std_dev;
    }
    return adv;
}

double bernoulli_score(double logit, std::uint8_t reward) {
    check_logit(logit);
    if (reward > 1) {
        throw std::invalid_argument("non-binary reward: " + std::to_string(int(reward)));
    }
    const double p = sigmoid(logit);
    return reward ? 1.0 - p : -p;
}

double surrogate_gradient(double logit, std::span<const std::uint8_t> rewards) {
    check_logit(logit);
    const AdvantageVector adv = advantages(rewards);
    if (adv.degenerate) return 0.0;
    const double g_plus = bernoulli_score(logit, 1);
    const double g_minus = bernoulli_score(logit, 0);
    double sum = 0.0;
    for (std::size_t i = 0; i < rewards.size(); ++i) {
        sum += adv.values[i] * (rewards[i] ? g_plus : g_minus);
    }
    return sum / static_cast<double>(rewards.size());
}

TwoClusterDecomposition two_cluster_decompose(double logit,
                                              std::span<const std::uint8_t> rewards) {
    check_logit(logit);
    const GroupStats stats = group_stats(rewards);
    if (stats.std_dev == 0.0) {
        throw degenerate_group_error("two_cluster_decompose: zero-variance group");
    }
    const AdvantageVector adv = advantages(rewards);
    TwoClusterDecomposition out;
    out.group_size = stats.group_size;
    for (std::size_t i = 0; i < rewards.size(); ++i) {
        if (rewards[i] >= stats.mean) out.positive_mass += adv.values[i];
    }
    out.g_plus = bernoulli_score(logit, 1);
    out.g_minus = bernoulli_score(logit, 0);
    out.gradient_magnitude = std::abs(out.positive_mass) / stats.group_size *
                             std::abs(out.g_plus - out.g_minus);
    return out;
}

BoundCheckReport positive_mass_bound_check(int group_size) {
    if (group_size < 2 || group_size > 16) {
        throw std::invalid_argument("group_size must be in [2, 16], got " +
                                    std::to_string(group_size));
    }
    constexpr double kEps = 1e-9;
    BoundCheckReport report;
    report.group_size = group_size;
    report.bound = group_size / 2.0;

    std::vector<std::uint8_t> rewards(group_size);
    const std::uint32_t full = (1u << group_size) - 1;
    for (std::uint32_t mask = 1; mask < full; ++mask) {  // skip the two degenerate vectors
        for (int i = 0; i < group_size; ++i) rewards[i] = (mask >> i) & 1u;
        const AdvantageVector adv = advantages(rewards);
        const GroupStats stats = group_stats(rewards);
        double positive_mass = 0.0;
        for (int i = 0; i < group_size; ++i) {
            if (rewards[i] >= stats.mean) positive_mass += adv.values[i];
        }
        ++report.vectors_checked;
        if (positive_mass > report.max_positive_mass + kEps) {
            report.max_positive_mass = positive_mass;
            report.maximizer_masks.clear();
            report.maximizer_masks.push_back(mask);
        } else if (positive_mass > report.max_positive_mass - kEps) {
            report.maximizer_masks.push_back(mask);
        }
    }

    report.bound_holds = report.max_positive_mass <= report.bound + kEps;
    report.tight = std::abs(report.max_positive_mass - report.bound) <= kEps;
    report.maximizers_all_balanced = true;
    for (std::uint32_t mask : report.maximizer_masks) {
        if (std::popcount(mask) * 2 != group_size) {
            report.maximizers_all_balanced = false;
            break;
        }
    }
    return report;
}

double variance_proxy(double p_hat) {
    if (!(p_hat >= 0.0 && p_hat <= 1.0)) {
        throw std::invalid_argument("p_hat must lie in [0, 1], got " + std::to_string(p_hat));
    }
    return p_hat * (1.0 - p_hat);
}

}  // namespace pcsim
