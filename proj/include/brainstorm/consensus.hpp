#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "brainstorm/core.hpp"
#include "brainstorm/rng.hpp"

namespace brainstorm {

enum class NoiseMode { none, uniform_global, site_dependent };
enum class NoiseDistribution { gaussian_unit, uniform_pm1 };

// How a draw is scaled before it enters the vote sum: by 1/(kT) (the
// default) or by T itself. With the default, noise vanishes as the
// temperature grows.
enum class NoiseScaling { inverse_temperature, temperature };

inline std::string_view noise_mode_name(NoiseMode m) {
    switch (m) {
        case NoiseMode::none: return "none";
        case NoiseMode::uniform_global: return "uniform_global";
        case NoiseMode::site_dependent: return "site_dependent";
    }
    return "none";
}

inline NoiseMode noise_mode_from_name(std::string_view name) {
    for (NoiseMode m : {NoiseMode::none, NoiseMode::uniform_global, NoiseMode::site_dependent}) {
        if (noise_mode_name(m) == name) return m;
    }
    throw DataError("unknown noise mode '" + std::string(name) + "'");
}

inline std::string_view noise_distribution_name(NoiseDistribution d) {
    return d == NoiseDistribution::gaussian_unit ? "gaussian_unit" : "uniform_pm1";
}

inline NoiseDistribution noise_distribution_from_name(std::string_view name) {
    if (name == "gaussian_unit") return NoiseDistribution::gaussian_unit;
    if (name == "uniform_pm1") return NoiseDistribution::uniform_pm1;
    throw DataError("unknown noise distribution '" + std::string(name) + "'");
}

inline std::string_view noise_scaling_name(NoiseScaling s) {
    return s == NoiseScaling::inverse_temperature ? "inverse_temperature" : "temperature";
}

inline NoiseScaling noise_scaling_from_name(std::string_view name) {
    if (name == "inverse_temperature") return NoiseScaling::inverse_temperature;
    if (name == "temperature") return NoiseScaling::temperature;
    throw DataError("unknown noise scaling '" + std::string(name) + "'");
}

struct NoiseSpec {
    NoiseMode mode = NoiseMode::none;
    NoiseDistribution distribution = NoiseDistribution::gaussian_unit;
    double temperature = 1.0;  // > 0; +infinity is allowed and zeroes the default scaling
    double boltzmann_k = 1.0;
    NoiseScaling scaling = NoiseScaling::inverse_temperature;
    std::uint64_t seed = 0;

    double beta() const { return 1.0 / (boltzmann_k * temperature); }

    double scale() const {
        return scaling == NoiseScaling::temperature ? temperature : beta();
    }

    void validate() const {
        if (mode == NoiseMode::none) return;
        if (std::isnan(temperature) || !(temperature > 0.0)) {
            throw DataError("noise temperature must be > 0");
        }
        if (!(boltzmann_k > 0.0) || !std::isfinite(boltzmann_k)) {
            throw DataError("boltzmann constant must be finite and > 0");
        }
        if (!std::isfinite(scale()) || scale() < 0.0) {
            throw DataError("noise scale must be finite and >= 0");
        }
    }

    friend bool operator==(const NoiseSpec&, const NoiseSpec&) = default;
};

// How an agent's profile values are scaled before they enter the impact
// sums. Only the identity t(x) = x is defined.
enum class StrengthScaling { identity };

inline std::string_view strength_scaling_name(StrengthScaling) { return "identity"; }

inline StrengthScaling strength_scaling_from_name(std::string_view name) {
    if (name == "identity") return StrengthScaling::identity;
    throw DataError("unknown strength scaling '" + std::string(name) + "'");
}

struct ConsensusConfig {
    double coupling_precision = 1.0;  // weight of the disagreement (precision) term
    double coupling_recall = 1.0;     // weight of the agreement (recall) term
    StrengthScaling strength_scaling = StrengthScaling::identity;
    NoiseSpec noise;

    friend bool operator==(const ConsensusConfig&, const ConsensusConfig&) = default;
};

namespace detail {

inline void check_ensemble(std::span<const Vote> votes, std::span<const AgentProfile> profiles) {
    if (votes.empty()) throw DataError("consensus requires at least one agent");
    if (votes.size() != profiles.size()) {
        throw DataError("vote count (" + std::to_string(votes.size()) +
                        ") does not match profile count (" + std::to_string(profiles.size()) + ")");
    }
}

inline double draw_noise(rng::Stream& stream, NoiseDistribution distribution) {
    return distribution == NoiseDistribution::gaussian_unit ? stream.next_gaussian()
                                                            : stream.next_symmetric();
}

}  // namespace detail

// Weighted majority-minority difference: each vote weighted by the agent's
// recall + precision, normalized by the ensemble total. The two camps are
// accumulated separately and subtracted once, which pins |result| <= 1
// bit-for-bit, makes unanimity exactly +-1, and makes a balanced
// equal-weight ensemble exactly 0.
inline double weighted_margin(std::span<const Vote> votes,
                              std::span<const AgentProfile> profiles) {
    detail::check_ensemble(votes, profiles);
    double majority_weight = 0.0;
    double minority_weight = 0.0;
    for (std::size_t j = 0; j < votes.size(); ++j) {
        const double w = profiles[j].recall + profiles[j].precision;
        (votes[j].value > 0 ? majority_weight : minority_weight) += w;
    }
    const double total = majority_weight + minority_weight;
    if (!(total > 0.0)) {
        throw DataError("all agent profiles are zero; the margin is undefined");
    }
    return (majority_weight - minority_weight) / total;
}

// Normalized per-agent weights; sums to 1 and the margin equals the
// weight-weighted vote sum.
inline std::vector<double> consensus_weights(std::span<const AgentProfile> profiles) {
    double total = 0.0;
    for (const AgentProfile& p : profiles) total += p.recall + p.precision;
    if (!(total > 0.0)) {
        throw DataError("all agent profiles are zero; weights are undefined");
    }
    std::vector<double> weights;
    weights.reserve(profiles.size());
    for (const AgentProfile& p : profiles) weights.push_back((p.recall + p.precision) / total);
    return weights;
}

struct Decision {
    Vote vote = vote_plus;
    bool tie = false;
};

// Sign rule: positive margins choose +1, negative choose -1, an exact zero
// resolves to +1 with the tie flag set.
inline Decision decide(double margin) {
    if (!std::isfinite(margin)) throw std::invalid_argument("margin must be finite");
    if (margin > 0.0) return {vote_plus, false};
    if (margin < 0.0) return {vote_minus, false};
    return {vote_plus, true};
}

struct NoisyDecision {
    Vote vote = vote_plus;
    bool tie = false;
    double augmented_sum = 0.0;
};

// Margin plus a scaled noise field: site-dependent mode draws one value per
// agent, uniform-global mode shares a single draw across all agents. Draws
// are keyed by (seed, draw_index, agent index), so parallel and serial
// evaluation orders agree bit-for-bit.
inline NoisyDecision decide_noisy(std::span<const Vote> votes,
                                  std::span<const AgentProfile> profiles,
                                  const NoiseSpec& noise, std::uint64_t draw_index = 0) {
    if (noise.mode == NoiseMode::none) {
        throw std::invalid_argument("decide_noisy requires an active noise mode");
    }
    noise.validate();
    const double margin = weighted_margin(votes, profiles);

    double field_sum = 0.0;
    if (noise.mode == NoiseMode::uniform_global) {
        rng::Stream stream(rng::derive_seed(noise.seed, {draw_index}));
        field_sum = double(votes.size()) * detail::draw_noise(stream, noise.distribution);
    } else {
        for (std::size_t j = 0; j < votes.size(); ++j) {
            rng::Stream stream(rng::derive_seed(noise.seed, {draw_index, j}));
            field_sum += detail::draw_noise(stream, noise.distribution);
        }
    }

    const double total = margin + noise.scale() * field_sum;
    const Decision d = decide(total);
    return {d.vote, d.tie, total};
}

// Diagnostic coupling an agent feels from the rest of the ensemble: a
// precision-weighted pull from disagreeing agents minus a recall-weighted
// pull from agreeing ones (self included; its disagreement term is zero).
// Never feeds back into decisions.
inline double learning_impact(std::size_t agent, std::span<const Vote> votes,
                              std::span<const AgentProfile> profiles,
                              const ConsensusConfig& config) {
    detail::check_ensemble(votes, profiles);
    if (agent >= votes.size()) throw std::invalid_argument("agent index out of range");
    const double n = double(votes.size());
    const double own = double(votes[agent].value);
    double disagreement = 0.0;
    double agreement = 0.0;
    for (std::size_t j = 0; j < votes.size(); ++j) {
        const double alignment = own * double(votes[j].value);
        disagreement += profiles[j].precision / n * (1.0 - alignment);
        agreement += profiles[j].recall / n * (1.0 + alignment);
    }
    return config.coupling_precision * disagreement - config.coupling_recall * agreement;
}

// Margin mapped to a score for class +1: (1+m)/2.
inline double reliability(double margin) {
    if (!(margin >= -1.0 - 1e-9) || !(margin <= 1.0 + 1e-9)) {
        throw std::invalid_argument("margin outside [-1, 1]");
    }
    return std::clamp(0.5 * (1.0 + margin), 0.0, 1.0);
}

// One fused prediction: every agent's vote, the normalized weights, and the
// (possibly noise-resolved) decision. reliability always derives from the
// noiseless margin.
struct ConsensusResult {
    std::vector<Vote> votes;
    std::vector<double> weights;
    double margin = 0.0;
    Vote decision = vote_plus;
    double reliability = 0.5;
    bool tie = false;
};

}  // namespace brainstorm
