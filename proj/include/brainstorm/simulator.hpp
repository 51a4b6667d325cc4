#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "brainstorm/consensus.hpp"
#include "brainstorm/core.hpp"
#include "brainstorm/rng.hpp"

namespace brainstorm {

enum class PopulationKind { point_mass, independent_uniform, correlated_equal };

inline std::string_view population_kind_name(PopulationKind k) {
    switch (k) {
        case PopulationKind::point_mass: return "point_mass";
        case PopulationKind::independent_uniform: return "independent_uniform";
        case PopulationKind::correlated_equal: return "correlated_equal";
    }
    return "point_mass";
}

inline PopulationKind population_kind_from_name(std::string_view name) {
    for (PopulationKind k : {PopulationKind::point_mass, PopulationKind::independent_uniform,
                             PopulationKind::correlated_equal}) {
        if (population_kind_name(k) == name) return k;
    }
    throw DataError("unknown population kind '" + std::string(name) + "'");
}

// A profile can drive vote simulation only if its implied false-positive
// rate recall*(1-precision)/precision stays within [0, 1] under balanced
// priors.
inline bool profile_admissible(const AgentProfile& profile) {
    if (!(profile.precision > 0.0)) return false;
    return profile.recall * (1.0 - profile.precision) / profile.precision <= 1.0 + 1e-12;
}

// Distribution over agent (precision, recall) pairs. point_mass fixes both
// at (a, b); independent_uniform draws each from uniform(a, b);
// correlated_equal draws one value from uniform(a, b) and uses it for both.
struct PopulationSpec {
    PopulationKind kind = PopulationKind::point_mass;
    double a = 0.7;
    double b = 0.7;

    void validate() const {
        if (!(a >= 0.0 && a <= 1.0) || !(b >= 0.0 && b <= 1.0)) {
            throw DataError("population parameters must lie in [0, 1]");
        }
        if (kind != PopulationKind::point_mass && a > b) {
            throw DataError("population interval requires lo <= hi");
        }
        if (kind == PopulationKind::point_mass &&
            !profile_admissible(AgentProfile{a, b})) {
            throw DataError("point-mass profile implies a false-positive rate above 1");
        }
    }
};

// N independent draws; inadmissible draws are rejected and redrawn, so every
// returned profile can be inverted into vote rates.
inline std::vector<AgentProfile> sample_population(const PopulationSpec& spec,
                                                   std::size_t count, std::uint64_t seed) {
    spec.validate();
    if (count == 0) throw DataError("population size must be at least 1");
    rng::Stream stream(seed);
    std::vector<AgentProfile> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        AgentProfile profile;
        std::size_t attempts = 0;
        do {
            if (++attempts > 100000) {
                throw DataError("population spec admits (almost) no valid agents");
            }
            switch (spec.kind) {
                case PopulationKind::point_mass:
                    profile = {spec.a, spec.b};
                    break;
                case PopulationKind::independent_uniform:
                    profile.precision = stream.next_uniform(spec.a, spec.b);
                    profile.recall = stream.next_uniform(spec.a, spec.b);
                    break;
                case PopulationKind::correlated_equal: {
                    const double v = stream.next_uniform(spec.a, spec.b);
                    profile = {v, v};
                    break;
                }
            }
        } while (!profile_admissible(profile));
        out.push_back(profile);
    }
    return out;
}

// Conditioned vote simulation under balanced class priors: given truth +1 an
// agent votes +1 with probability recall; given truth -1 it votes +1 with
// the implied false-positive rate recall*(1-precision)/precision.
inline std::vector<Vote> simulate_votes(std::span<const AgentProfile> profiles,
                                        Vote true_label, std::uint64_t seed) {
    rng::Stream stream(seed);
    std::vector<Vote> votes;
    votes.reserve(profiles.size());
    for (const AgentProfile& q : profiles) {
        if (!(q.precision > 0.0)) {
            throw DataError("precision 0 leaves the false-positive rate undefined");
        }
        double fpr = q.recall * (1.0 - q.precision) / q.precision;
        if (fpr > 1.0 + 1e-12) {
            throw DataError("profile implies a false-positive rate above 1");
        }
        fpr = std::min(fpr, 1.0);
        const double u = stream.next_unit();
        if (true_label.value > 0) {
            votes.push_back(u < q.recall ? vote_plus : vote_minus);
        } else {
            votes.push_back(u < fpr ? vote_plus : vote_minus);
        }
    }
    return votes;
}

// Probability that an odd-sized ensemble of equal, independent agents with
// per-agent accuracy q reaches the correct majority:
// sum_{j > N/2} C(N, j) q^j (1-q)^(N-j).
inline double majority_accuracy_closed_form(std::size_t agent_count, double q) {
    if (agent_count == 0 || agent_count % 2 == 0) {
        throw std::invalid_argument("closed-form majority accuracy requires an odd agent count");
    }
    if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("q must lie in [0, 1]");
    std::vector<double> binomial(agent_count + 1, 0.0);
    binomial[0] = 1.0;
    for (std::size_t i = 1; i <= agent_count; ++i) {
        for (std::size_t j = i; j >= 1; --j) binomial[j] += binomial[j - 1];
    }
    double accuracy = 0.0;
    for (std::size_t j = agent_count / 2 + 1; j <= agent_count; ++j) {
        accuracy += binomial[j] * std::pow(q, double(j)) *
                    std::pow(1.0 - q, double(agent_count - j));
    }
    return accuracy;
}

struct SweepCell {
    std::size_t agent_count = 0;
    double temperature = 0.0;
    double accuracy = 0.0;
    double standard_error = 0.0;
    std::size_t trials = 0;
};

struct SweepGrid {
    PopulationSpec population;
    NoiseSpec noise_template;  // temperature is overridden per cell
    std::vector<std::size_t> agent_counts;
    std::vector<double> temperatures;
    std::vector<SweepCell> cells;  // row-major: [n_index * temperatures.size() + t_index]

    const SweepCell& at(std::size_t n_index, std::size_t t_index) const {
        return cells.at(n_index * temperatures.size() + t_index);
    }
};

// Monte Carlo accuracy surface over (N, temperature). Every trial redraws an
// agent population, alternates the true label for an exactly balanced mix,
// and scores the (noisy) consensus decision. Per-trial seeds derive from
// (seed, cell, trial), so results are independent of evaluation order.
inline SweepGrid run_sweep(const PopulationSpec& population,
                           std::vector<std::size_t> agent_counts,
                           const NoiseSpec& noise_template,
                           std::vector<double> temperatures, std::size_t trials,
                           std::uint64_t seed) {
    population.validate();
    if (trials < 100) throw DataError("sweeps need at least 100 trials per cell");
    if (agent_counts.empty()) throw DataError("sweep needs at least one ensemble size");
    if (temperatures.empty()) throw DataError("sweep needs at least one temperature");
    for (std::size_t n : agent_counts) {
        if (n == 0 || n % 2 == 0) {
            throw DataError("sweep ensemble sizes must be odd (ties would blur the curves)");
        }
    }

    SweepGrid grid;
    grid.population = population;
    grid.noise_template = noise_template;
    grid.agent_counts = std::move(agent_counts);
    grid.temperatures = std::move(temperatures);
    grid.cells.reserve(grid.agent_counts.size() * grid.temperatures.size());

    for (std::size_t ni = 0; ni < grid.agent_counts.size(); ++ni) {
        for (std::size_t ti = 0; ti < grid.temperatures.size(); ++ti) {
            const std::uint64_t cell_index = ni * grid.temperatures.size() + ti;
            const std::size_t n = grid.agent_counts[ni];
            std::size_t correct = 0;
            for (std::size_t trial = 0; trial < trials; ++trial) {
                const std::uint64_t base = rng::derive_seed(seed, {cell_index, trial});
                const Vote truth = trial % 2 == 0 ? vote_plus : vote_minus;
                const auto profiles =
                    sample_population(population, n, rng::derive_seed(base, {0}));
                const auto votes =
                    simulate_votes(profiles, truth, rng::derive_seed(base, {1}));
                Vote verdict;
                if (noise_template.mode == NoiseMode::none) {
                    verdict = decide(weighted_margin(votes, profiles)).vote;
                } else {
                    NoiseSpec cell_noise = noise_template;
                    cell_noise.temperature = grid.temperatures[ti];
                    cell_noise.seed = rng::derive_seed(base, {2});
                    verdict = decide_noisy(votes, profiles, cell_noise).vote;
                }
                correct += verdict == truth;
            }
            SweepCell cell;
            cell.agent_count = n;
            cell.temperature = grid.temperatures[ti];
            cell.trials = trials;
            cell.accuracy = double(correct) / double(trials);
            cell.standard_error =
                std::sqrt(cell.accuracy * (1.0 - cell.accuracy) / double(trials));
            grid.cells.push_back(cell);
        }
    }
    return grid;
}

enum class SweepAxis { agent_count, temperature };

struct TransitionEstimate {
    bool found = false;
    double critical_value = std::numeric_limits<double>::quiet_NaN();
    double slope = 0.0;
};

// Locates the steepest accuracy change along an axis via centered finite
// differences on the interior points. Ties (a constant slope, say) resolve
// to the point nearest the axis midpoint; a flat profile reports
// found = false with zero slope.
inline TransitionEstimate detect_transition(std::span<const double> axis,
                                            std::span<const double> accuracy) {
    if (axis.size() != accuracy.size()) {
        throw std::invalid_argument("axis and accuracy lengths differ");
    }
    if (axis.size() < 4) throw DataError("transition detection needs at least 4 points");

    const std::size_t n = axis.size();
    std::vector<double> slopes(n, 0.0);
    double max_magnitude = 0.0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double dx = axis[i + 1] - axis[i - 1];
        if (!(dx != 0.0)) throw DataError("axis values must be strictly monotone");
        slopes[i] = (accuracy[i + 1] - accuracy[i - 1]) / dx;
        max_magnitude = std::max(max_magnitude, std::fabs(slopes[i]));
    }
    if (max_magnitude <= 1e-15) return {false, std::numeric_limits<double>::quiet_NaN(), 0.0};

    const double midpoint = 0.5 * (axis.front() + axis.back());
    const double tie_floor = max_magnitude * (1.0 - 1e-9);
    std::size_t best = 0;
    bool have = false;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (std::fabs(slopes[i]) < tie_floor) continue;
        if (!have || std::fabs(axis[i] - midpoint) < std::fabs(axis[best] - midpoint)) {
            best = i;
            have = true;
        }
    }
    return {true, axis[best], slopes[best]};
}

inline TransitionEstimate detect_transition(const SweepGrid& grid, SweepAxis axis,
                                            std::size_t other_index = 0) {
    std::vector<double> xs, accs;
    if (axis == SweepAxis::agent_count) {
        if (other_index >= grid.temperatures.size()) {
            throw std::invalid_argument("temperature index out of range");
        }
        for (std::size_t ni = 0; ni < grid.agent_counts.size(); ++ni) {
            xs.push_back(double(grid.agent_counts[ni]));
            accs.push_back(grid.at(ni, other_index).accuracy);
        }
    } else {
        if (other_index >= grid.agent_counts.size()) {
            throw std::invalid_argument("agent-count index out of range");
        }
        for (std::size_t ti = 0; ti < grid.temperatures.size(); ++ti) {
            xs.push_back(grid.temperatures[ti]);
            accs.push_back(grid.at(other_index, ti).accuracy);
        }
    }
    return detect_transition(xs, accs);
}

}  // namespace brainstorm
