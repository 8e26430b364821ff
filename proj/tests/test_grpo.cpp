#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "pcsim/errors.hpp"
#include "pcsim/grpo.hpp"
#include "pcsim/rng.hpp"

using namespace pcsim;

namespace {

using Rewards = std::vector<std::uint8_t>;

// Objective whose gradient at logit_old the surrogate must match: advantages
// are frozen at the sampling policy, rewards re-weighted by the probability
// ratio of the current vs sampling policy.
double ratio_weighted_objective(double logit, double logit_old, const Rewards& rewards) {
    const AdvantageVector adv = advantages(rewards);
    const double p = sigmoid(logit);
    const double p_old = sigmoid(logit_old);
    double sum = 0.0;
    for (std::size_t i = 0; i < rewards.size(); ++i) {
        const double ratio = rewards[i] ? p / p_old : (1.0 - p) / (1.0 - p_old);
        sum += ratio * adv.values[i];
    }
    return sum / static_cast<double>(rewards.size());
}

double central_difference(double (*f)(double, double, const Rewards&), double x,
                          const Rewards& rewards, double h) {
    return (f(x + h, x, rewards) - f(x - h, x, rewards)) / (2.0 * h);
}

Rewards random_group(Stream& rng, int min_size = 2, int max_size = 16) {
    const int g = min_size + static_cast<int>(rng.next_below(max_size - min_size + 1));
    Rewards rewards(g);
    for (int i = 0; i < g; ++i) rewards[i] = rng.next_bernoulli(0.5) ? 1 : 0;
    return rewards;
}

bool is_degenerate(const Rewards& rewards) {
    int k = 0;
    for (auto r : rewards) k += r;
    return k == 0 || k == static_cast<int>(rewards.size());
}

}  // namespace

TEST_CASE("group_stats matches direct evaluation") {
    GroupStats s = group_stats(Rewards{1, 1, 0, 0});
    CHECK(s.mean == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(s.std_dev == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(s.group_size == 4);

    s = group_stats(Rewards{1, 1, 1, 1});
    CHECK(s.mean == 1.0);
    CHECK(s.std_dev == 0.0);

    s = group_stats(Rewards{1, 0, 0, 0});
    CHECK(s.mean == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(s.std_dev == doctest::Approx(std::sqrt(3.0) / 4.0).epsilon(1e-15));
}

TEST_CASE("group_stats rejects bad groups") {
    CHECK_THROWS_AS(group_stats(Rewards{1}), std::invalid_argument);
    CHECK_THROWS_AS(group_stats(Rewards{}), std::invalid_argument);
    CHECK_THROWS_AS(group_stats(Rewards{1, 2, 0}), std::invalid_argument);
}

TEST_CASE("advantages match the normalized-deviation formula") {
    AdvantageVector adv = advantages(Rewards{1, 1, 0, 0});
    REQUIRE(adv.values.size() == 4);
    CHECK_FALSE(adv.degenerate);
    CHECK(adv.values[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(adv.values[1] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(adv.values[2] == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(adv.values[3] == doctest::Approx(-1.0).epsilon(1e-15));

    adv = advantages(Rewards{0, 0, 0, 0});
    CHECK(adv.degenerate);
    for (double v : adv.values) CHECK(v == 0.0);

    adv = advantages(Rewards{1, 0, 0, 0});
    const double sqrt3 = std::sqrt(3.0);
    CHECK(adv.values[0] == doctest::Approx(sqrt3).epsilon(1e-14));
    for (int i = 1; i < 4; ++i) {
        CHECK(adv.values[i] == doctest::Approx(-1.0 / sqrt3).epsilon(1e-14));
    }
}

TEST_CASE("advantage invariants: zero sum, unit mean square") {
    Stream rng(20240901, 17);
    int checked = 0;
    while (checked < 2000) {
        const Rewards rewards = random_group(rng);
        const AdvantageVector adv = advantages(rewards);
        if (adv.degenerate) {
            for (double v : adv.values) CHECK(v == 0.0);
            continue;
        }
        double sum = 0.0;
        double sq = 0.0;
        for (double v : adv.values) {
            sum += v;
            sq += v * v;
        }
        CHECK(std::abs(sum) < 1e-12);
        CHECK(std::abs(sq / static_cast<double>(adv.values.size()) - 1.0) < 1e-12);
        ++checked;
    }
}

TEST_CASE("bernoulli_score at even odds and against the log-likelihood slope") {
    CHECK(bernoulli_score(0.0, 1) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(bernoulli_score(0.0, 0) == doctest::Approx(-0.5).epsilon(1e-15));

    const double logit = std::log(4.0);  // p = 0.8
    CHECK(bernoulli_score(logit, 1) == doctest::Approx(0.2).epsilon(1e-12));

    // d/dlogit log sigmoid(logit), central difference at 1e-6.
    const double h = 1e-6;
    const double fd =
        (std::log(sigmoid(logit + h)) - std::log(sigmoid(logit - h))) / (2.0 * h);
    CHECK(bernoulli_score(logit, 1) == doctest::Approx(fd).epsilon(1e-6));

    const double fd0 = (std::log(1.0 - sigmoid(logit + h)) -
                        std::log(1.0 - sigmoid(logit - h))) / (2.0 * h);
    CHECK(bernoulli_score(logit, 0) == doctest::Approx(fd0).epsilon(1e-6));

    CHECK_THROWS_AS(bernoulli_score(std::nan(""), 1), std::invalid_argument);
    CHECK_THROWS_AS(bernoulli_score(1e308 * 10, 1), std::invalid_argument);
}

TEST_CASE("surrogate_gradient hand-derived values") {
    CHECK(surrogate_gradient(0.0, Rewards{1, 1, 0, 0}) ==
          doctest::Approx(0.5).epsilon(1e-15));
    CHECK(surrogate_gradient(0.7, Rewards{1, 1, 1, 1}) == 0.0);
    CHECK(surrogate_gradient(-2.3, Rewards{0, 0, 0, 0}) == 0.0);
    CHECK(surrogate_gradient(0.0, Rewards{1, 0, 0, 0}) ==
          doctest::Approx(std::sqrt(3.0) / 4.0).epsilon(1e-14));
}

TEST_CASE("surrogate_gradient matches central finite differences") {
    Stream rng(555, 3);
    int checked = 0;
    while (checked < 300) {
        const Rewards rewards = random_group(rng);
        if (is_degenerate(rewards)) continue;
        const double logit = -4.0 + 8.0 * rng.next_unit();
        const double grad = surrogate_gradient(logit, rewards);
        const double fd = central_difference(ratio_weighted_objective, logit, rewards, 1e-5);
        CHECK(std::abs(grad - fd) / std::max(std::abs(fd), 1e-300) < 1e-6);
        ++checked;
    }
}

TEST_CASE("two-cluster decomposition equals the surrogate gradient exactly") {
    TwoClusterDecomposition d = two_cluster_decompose(0.0, Rewards{1, 1, 0, 0});
    CHECK(d.positive_mass == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(d.g_plus == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(d.g_minus == doctest::Approx(-0.5).epsilon(1e-15));
    CHECK(d.gradient_magnitude == doctest::Approx(0.5).epsilon(1e-14));

    d = two_cluster_decompose(0.0, Rewards{1, 0, 0, 0});
    CHECK(d.positive_mass == doctest::Approx(std::sqrt(3.0)).epsilon(1e-14));
    CHECK(d.gradient_magnitude == doctest::Approx(std::sqrt(3.0) / 4.0).epsilon(1e-14));

    d = two_cluster_decompose(0.0, Rewards{1, 1, 1, 0});
    CHECK(d.positive_mass == doctest::Approx(std::sqrt(3.0)).epsilon(1e-14));

    CHECK_THROWS_AS(two_cluster_decompose(0.0, Rewards{1, 1}), degenerate_group_error);

    // Exactness across a logit grid and every non-degenerate vector, G <= 8.
    for (int g = 2; g <= 8; ++g) {
        for (std::uint32_t mask = 1; mask + 1 < (1u << g); ++mask) {
            Rewards rewards(g);
            for (int i = 0; i < g; ++i) rewards[i] = (mask >> i) & 1u;
            for (int li = 0; li <= 20; ++li) {
                const double logit = -4.0 + 0.4 * li;
                const double magnitude =
                    two_cluster_decompose(logit, rewards).gradient_magnitude;
                const double grad = std::abs(surrogate_gradient(logit, rewards));
                CHECK(std::abs(magnitude - grad) < 1e-12);
            }
        }
    }
}

TEST_CASE("positive advantage mass is bounded by half the group size") {
    BoundCheckReport r = positive_mass_bound_check(4);
    CHECK(r.bound_holds);
    CHECK(r.tight);
    CHECK(r.max_positive_mass == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(r.maximizer_masks.size() == 6);
    CHECK(r.maximizers_all_balanced);
    CHECK(r.vectors_checked == 14);

    r = positive_mass_bound_check(2);
    CHECK(r.max_positive_mass == doctest::Approx(1.0).epsilon(1e-12));
    REQUIRE(r.maximizer_masks.size() == 2);
    CHECK(((r.maximizer_masks[0] == 1 && r.maximizer_masks[1] == 2) ||
           (r.maximizer_masks[0] == 2 && r.maximizer_masks[1] == 1)));

    r = positive_mass_bound_check(5);
    CHECK(r.bound_holds);
    CHECK_FALSE(r.tight);  // odd group: the bound is strict
    CHECK(r.max_positive_mass < 2.5 - 1e-9);

    CHECK_THROWS_AS(positive_mass_bound_check(1), std::invalid_argument);
    CHECK_THROWS_AS(positive_mass_bound_check(17), std::invalid_argument);
}

TEST_CASE("variance proxy") {
    CHECK(variance_proxy(0.5) == 0.25);
    CHECK(variance_proxy(0.0) == 0.0);
    CHECK(variance_proxy(0.75) == doctest::Approx(0.1875).epsilon(1e-15));
    CHECK_THROWS_AS(variance_proxy(-0.01), std::invalid_argument);
    CHECK_THROWS_AS(variance_proxy(1.01), std::invalid_argument);

    // Symmetric about 0.5 and strictly maximized there.
    const double peak = variance_proxy(0.5);
    for (int i = 0; i <= 100; ++i) {
        const double p = i / 100.0;
        CHECK(variance_proxy(p) == variance_proxy(1.0 - p));
        if (i != 50) CHECK(variance_proxy(p) < peak);
    }
}
