#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "brainstorm/consensus.hpp"
#include "helpers.hpp"

using namespace brainstorm;

namespace {

// standard normal CDF; oracle for the site-noise flip rate
double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

struct Ensemble {
    std::vector<Vote> votes;
    std::vector<AgentProfile> profiles;
};

Ensemble random_ensemble(rng::Stream& stream, std::size_t max_agents = 12) {
    Ensemble e;
    const std::size_t n = 1 + stream.next_index(max_agents);
    for (std::size_t i = 0; i < n; ++i) {
        e.votes.push_back(stream.next_unit() < 0.5 ? vote_plus : vote_minus);
        e.profiles.push_back({stream.next_uniform(0.05, 1.0), stream.next_uniform(0.05, 1.0)});
    }
    return e;
}

}  // namespace

TEST_CASE("unanimous votes saturate the margin at +-1") {
    rng::Stream stream(1);
    for (int trial = 0; trial < 50; ++trial) {
        Ensemble e = random_ensemble(stream);
        for (Vote& v : e.votes) v = vote_plus;
        CHECK(weighted_margin(e.votes, e.profiles) == 1.0);
        for (Vote& v : e.votes) v = vote_minus;
        CHECK(weighted_margin(e.votes, e.profiles) == -1.0);
    }
}

TEST_CASE("a single dissenting agent is the whole ensemble") {
    const std::vector<Vote> votes{vote_minus};
    const std::vector<AgentProfile> profiles{{0.8, 0.8}};
    CHECK(weighted_margin(votes, profiles) == -1.0);
}

TEST_CASE("three-agent worked margin") {
    const std::vector<Vote> votes{vote_plus, vote_minus, vote_minus};
    const std::vector<AgentProfile> profiles{{0.9, 0.9}, {0.6, 0.6}, {0.6, 0.6}};
    const double m = weighted_margin(votes, profiles);
    CHECK(std::fabs(m - (-1.0 / 7.0)) < 1e-12);
    const Decision d = decide(m);
    CHECK(d.vote == vote_minus);
    CHECK_FALSE(d.tie);
    CHECK(std::fabs(reliability(m) - 3.0 / 7.0) < 1e-12);
}

TEST_CASE("margin requires a non-empty, non-degenerate ensemble") {
    CHECK_THROWS_AS(weighted_margin({}, {}), DataError);
    const std::vector<Vote> votes{vote_plus, vote_minus};
    const std::vector<AgentProfile> zeros{{0.0, 0.0}, {0.0, 0.0}};
    CHECK_THROWS_AS(weighted_margin(votes, zeros), DataError);
    const std::vector<AgentProfile> one{{0.5, 0.5}};
    CHECK_THROWS_AS(weighted_margin(votes, one), DataError);
}

TEST_CASE("decide follows the sign and flags exact ties") {
    CHECK(decide(0.3).vote == vote_plus);
    CHECK_FALSE(decide(0.3).tie);
    CHECK(decide(-1.0 / 7.0).vote == vote_minus);
    const Decision tie = decide(0.0);
    CHECK(tie.vote == vote_plus);
    CHECK(tie.tie);
}

TEST_CASE("margin bound, sign symmetry, scale invariance, permutation invariance") {
    rng::Stream stream(7);
    for (int trial = 0; trial < 10000; ++trial) {
        Ensemble e = random_ensemble(stream);
        const double m = weighted_margin(e.votes, e.profiles);
        CHECK(std::fabs(m) <= 1.0);

        Ensemble negated = e;
        for (Vote& v : negated.votes) v = Vote{-v.value};
        CHECK(weighted_margin(negated.votes, negated.profiles) == -m);

        const double c = stream.next_uniform(0.001, 10.0);
        Ensemble scaled = e;
        for (AgentProfile& p : scaled.profiles) p = {p.precision * c, p.recall * c};
        CHECK(std::fabs(weighted_margin(scaled.votes, scaled.profiles) - m) < 1e-12);

        Ensemble permuted = e;
        std::vector<std::size_t> order(e.votes.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        stream.shuffle(order);
        for (std::size_t i = 0; i < order.size(); ++i) {
            permuted.votes[i] = e.votes[order[i]];
            permuted.profiles[i] = e.profiles[order[i]];
        }
        const double mp = weighted_margin(permuted.votes, permuted.profiles);
        CHECK(std::fabs(mp - m) < 1e-12);
        CHECK(decide(mp).vote == decide(m).vote);
    }
}

TEST_CASE("equal profiles reduce to a plain majority vote") {
    rng::Stream stream(17);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 1 + stream.next_index(15);
        const AgentProfile shared{stream.next_uniform(0.1, 1.0), stream.next_uniform(0.1, 1.0)};
        std::vector<Vote> votes;
        int sum = 0;
        for (std::size_t i = 0; i < n; ++i) {
            votes.push_back(stream.next_unit() < 0.5 ? vote_plus : vote_minus);
            sum += votes.back().value;
        }
        const std::vector<AgentProfile> profiles(n, shared);
        const double m = weighted_margin(votes, profiles);
        CHECK(std::fabs(m - double(sum) / double(n)) < 1e-12);
        CHECK(decide(m).vote == vote_of_sign(double(sum)));
    }
}

TEST_CASE("noise at beta = 0 reproduces the noiseless decision on every draw") {
    rng::Stream stream(23);
    for (int trial = 0; trial < 200; ++trial) {
        const Ensemble e = random_ensemble(stream);
        const Decision base = decide(weighted_margin(e.votes, e.profiles));
        for (double temperature :
             {std::numeric_limits<double>::infinity(), 1e12}) {
            NoiseSpec noise;
            noise.mode = NoiseMode::site_dependent;
            noise.temperature = temperature;
            noise.seed = stream.next_u64();
            for (std::uint64_t draw = 0; draw < 5; ++draw) {
                const NoisyDecision nd = decide_noisy(e.votes, e.profiles, noise, draw);
                CHECK(nd.vote == base.vote);
            }
        }
    }
}

TEST_CASE("strong global noise overrides the votes") {
    const std::vector<AgentProfile> profiles(5, AgentProfile{0.7, 0.7});
    NoiseSpec noise;
    noise.mode = NoiseMode::uniform_global;
    noise.temperature = 1e-9;  // beta = 1e9
    noise.seed = 99;
    const std::vector<Vote> all_plus(5, vote_plus);
    const std::vector<Vote> all_minus(5, vote_minus);
    for (std::uint64_t draw = 0; draw < 20; ++draw) {
        const NoisyDecision a = decide_noisy(all_plus, profiles, noise, draw);
        const NoisyDecision b = decide_noisy(all_minus, profiles, noise, draw);
        // the shared field decides, whatever the votes say
        CHECK(a.vote == b.vote);
        CHECK(a.vote == vote_of_sign(a.augmented_sum));
    }
}

TEST_CASE("noisy decisions are deterministic in (seed, draw index)") {
    rng::Stream stream(31);
    const Ensemble e = random_ensemble(stream);
    NoiseSpec noise;
    noise.mode = NoiseMode::site_dependent;
    noise.temperature = 2.0;
    noise.seed = 1234;
    const NoisyDecision a = decide_noisy(e.votes, e.profiles, noise, 5);
    const NoisyDecision b = decide_noisy(e.votes, e.profiles, noise, 5);
    CHECK(a.vote == b.vote);
    CHECK(a.augmented_sum == b.augmented_sum);
    const NoisyDecision c = decide_noisy(e.votes, e.profiles, noise, 6);
    CHECK(c.augmented_sum != a.augmented_sum);
}

TEST_CASE("site-noise flip rate matches the normal-CDF oracle") {
    // N = 20 equal agents, 13 vs 7 votes: margin is exactly 0.3
    const std::size_t n = 20;
    std::vector<Vote> votes;
    for (std::size_t i = 0; i < n; ++i) votes.push_back(i < 13 ? vote_plus : vote_minus);
    const std::vector<AgentProfile> profiles(n, AgentProfile{0.8, 0.8});
    const double m = weighted_margin(votes, profiles);
    REQUIRE(std::fabs(m - 0.3) < 1e-12);

    NoiseSpec noise;
    noise.mode = NoiseMode::site_dependent;
    noise.distribution = NoiseDistribution::gaussian_unit;
    noise.temperature = 1.0 / 0.2;  // beta = 0.2
    noise.seed = 77;

    const std::size_t draws = 100000;
    std::size_t flips = 0;
    for (std::uint64_t draw = 0; draw < draws; ++draw) {
        flips += decide_noisy(votes, profiles, noise, draw).vote == vote_minus;
    }
    const double expected = normal_cdf(-m / (noise.beta() * std::sqrt(double(n))));
    CHECK(std::fabs(double(flips) / double(draws) - expected) < 0.01);
}

TEST_CASE("temperature scaling mode amplifies noise with temperature") {
    const std::vector<Vote> votes{vote_plus, vote_plus, vote_plus};
    const std::vector<AgentProfile> profiles(3, AgentProfile{0.9, 0.9});
    NoiseSpec noise;
    noise.mode = NoiseMode::site_dependent;
    noise.scaling = NoiseScaling::temperature;
    noise.seed = 5;
    noise.temperature = 1e-9;
    // vanishing temperature now means vanishing noise
    for (std::uint64_t draw = 0; draw < 50; ++draw) {
        CHECK(decide_noisy(votes, profiles, noise, draw).vote == vote_plus);
    }
}

TEST_CASE("two-agent impact hand values") {
    const ConsensusConfig config;
    const std::vector<AgentProfile> profiles{{0.5, 0.5}, {0.5, 0.5}};
    const std::vector<Vote> agree{vote_plus, vote_plus};
    CHECK(std::fabs(learning_impact(0, agree, profiles, config) - (-1.0)) < 1e-12);
    CHECK(std::fabs(learning_impact(1, agree, profiles, config) - (-1.0)) < 1e-12);
    const std::vector<Vote> split{vote_plus, vote_minus};
    CHECK(std::fabs(learning_impact(0, split, profiles, config)) < 1e-12);
}

TEST_CASE("zero couplings zero the impact") {
    ConsensusConfig config;
    config.coupling_precision = 0.0;
    config.coupling_recall = 0.0;
    rng::Stream stream(3);
    for (int trial = 0; trial < 50; ++trial) {
        const Ensemble e = random_ensemble(stream);
        for (std::size_t i = 0; i < e.votes.size(); ++i) {
            CHECK(learning_impact(i, e.votes, e.profiles, config) == 0.0);
        }
    }
}

TEST_CASE("impact rejects an out-of-range index") {
    const std::vector<Vote> votes{vote_plus};
    const std::vector<AgentProfile> profiles{{0.5, 0.5}};
    CHECK_THROWS_AS(learning_impact(1, votes, profiles, ConsensusConfig{}),
                    std::invalid_argument);
}

TEST_CASE("equal-coupling impact falls as agreement rises") {
    // enumerate every vote pattern for N <= 5 and check anti-monotonicity
    const ConsensusConfig config;
    for (std::size_t n = 2; n <= 5; ++n) {
        const std::vector<AgentProfile> profiles(n, AgentProfile{0.6, 0.6});
        std::vector<std::pair<int, double>> by_agreement;  // (#agents agreeing with 0, impact)
        for (std::size_t mask = 0; mask < (std::size_t(1) << n); ++mask) {
            std::vector<Vote> votes;
            for (std::size_t i = 0; i < n; ++i) {
                votes.push_back(mask & (std::size_t(1) << i) ? vote_plus : vote_minus);
            }
            int agreeing = 0;
            for (const Vote& v : votes) agreeing += v == votes[0];
            by_agreement.emplace_back(agreeing, learning_impact(0, votes, profiles, config));
        }
        for (const auto& [a1, i1] : by_agreement) {
            for (const auto& [a2, i2] : by_agreement) {
                if (a1 < a2) CHECK(i1 >= i2 - 1e-12);
            }
        }
    }
}

TEST_CASE("reliability maps the margin onto [0, 1]") {
    CHECK(reliability(1.0) == 1.0);
    CHECK(reliability(0.0) == 0.5);
    CHECK(reliability(-1.0) == 0.0);
    CHECK(std::fabs(reliability(-1.0 / 7.0) - 3.0 / 7.0) < 1e-12);
    CHECK_THROWS_AS(reliability(1.5), std::invalid_argument);
    CHECK_THROWS_AS(reliability(-2.0), std::invalid_argument);
}
