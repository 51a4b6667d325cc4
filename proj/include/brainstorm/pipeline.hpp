#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "brainstorm/calibration.hpp"
#include "brainstorm/consensus.hpp"
#include "brainstorm/core.hpp"
#include "brainstorm/learners.hpp"
#include "brainstorm/representations.hpp"
#include "brainstorm/rng.hpp"

namespace brainstorm {

inline std::vector<LearnerSpec> default_roster() {
    std::vector<LearnerSpec> roster;
    for (LearnerKind kind : {LearnerKind::decision_tree, LearnerKind::knn,
                             LearnerKind::naive_bayes, LearnerKind::linear_sgd,
                             LearnerKind::random_forest, LearnerKind::trend_vector}) {
        LearnerSpec spec;
        spec.kind = kind;
        roster.push_back(spec);
    }
    return roster;
}

struct PipelineConfig {
    std::size_t representation_count = 3;
    std::vector<RepKind> representation_pool = default_representation_pool();
    std::vector<LearnerSpec> roster = default_roster();
    std::size_t folds = 5;
    double smoothing = 1.0;
    bool force_recall_equals_precision = false;
    bool average_profiles_per_kind = false;
    ConsensusConfig consensus;
    std::uint64_t seed = 0;

    void validate() const {
        if (roster.empty()) throw DataError("learner roster must not be empty");
        if (folds < 2) throw DataError("fold count must be at least 2");
        if (representation_count == 0) throw DataError("representation count must be at least 1");
        if (!(smoothing >= 0.0) || !std::isfinite(smoothing)) {
            throw DataError("smoothing must be a finite value >= 0");
        }
        for (const LearnerSpec& spec : roster) spec.validate();
        consensus.noise.validate();
    }
};

// Canonical one-line rendering of every configuration field; its hash is the
// bundle's config digest.
inline std::string config_fingerprint(const PipelineConfig& config) {
    const auto num = [](double v) {
        char buffer[40];
        std::snprintf(buffer, sizeof buffer, "%.17g", v);
        return std::string(buffer);
    };
    std::string fp = "reps=" + std::to_string(config.representation_count) + ";pool=";
    for (RepKind k : config.representation_pool) fp += std::string(rep_kind_name(k)) + ",";
    fp += ";roster=";
    for (const LearnerSpec& s : config.roster) {
        fp += std::string(learner_kind_name(s.kind)) + "(" + std::to_string(s.max_depth) + "," +
              std::to_string(s.neighbors) + "," + std::to_string(s.epochs) + "," +
              num(s.learning_rate) + "," + std::to_string(s.trees) + "," + num(s.subsample) +
              "," + std::to_string(s.seed) + "),";
    }
    fp += ";folds=" + std::to_string(config.folds) + ";smoothing=" + num(config.smoothing) +
          ";force_ps=" + (config.force_recall_equals_precision ? "1" : "0") +
          ";avg_kind=" + (config.average_profiles_per_kind ? "1" : "0") +
          ";couplings=" + num(config.consensus.coupling_precision) + "," +
          num(config.consensus.coupling_recall) + "," +
          std::string(strength_scaling_name(config.consensus.strength_scaling)) +
          ";noise=" + std::string(noise_mode_name(config.consensus.noise.mode)) + "," +
          std::string(noise_distribution_name(config.consensus.noise.distribution)) + "," +
          num(config.consensus.noise.temperature) + "," +
          num(config.consensus.noise.boltzmann_k) + "," +
          std::string(noise_scaling_name(config.consensus.noise.scaling)) + "," +
          std::to_string(config.consensus.noise.seed) + ";seed=" + std::to_string(config.seed);
    return fp;
}

// One voting agent: a trained learner bound to the representation it was
// trained under, plus its calibrated profile.
struct AgentRecord {
    std::size_t representation_index = 0;
    TrainedLearner learner;
    AgentProfile profile;
};

struct ModelBundle {
    static constexpr int format_version = 1;

    std::uint64_t seed = 0;
    PipelineConfig config;
    std::vector<std::string> feature_names;
    std::size_t dimensionality = 0;
    std::vector<FittedRepresentation> representations;
    std::vector<AgentRecord> agents;
    std::string config_digest;

    std::string agent_name(std::size_t index) const {
        const AgentRecord& agent = agents.at(index);
        return "r" + std::to_string(agent.representation_index) + ":" +
               std::string(learner_kind_name(agent.learner.spec.kind));
    }
};

// Trains the full agent grid: every (representation, learner) pair is
// calibrated out-of-fold first, then refit on the whole training set.
inline ModelBundle train_pipeline(const Dataset& dataset, const PipelineConfig& config) {
    config.validate();
    validate_dataset(dataset);
    if (!dataset.fully_labeled()) throw DataError("training requires a fully labeled dataset");

    ModelBundle bundle;
    bundle.seed = config.seed;
    bundle.config = config;
    bundle.config_digest = detail::fnv1a64_hex(config_fingerprint(config));
    bundle.feature_names = dataset.feature_names;
    bundle.dimensionality = dataset.dimensionality;
    bundle.representations = generate_representation_set(
        dataset, config.representation_count, rng::derive_seed(config.seed, {1}),
        config.representation_pool);

    const std::size_t learner_count = config.roster.size();
    bundle.agents.reserve(bundle.representations.size() * learner_count);
    for (std::size_t r = 0; r < bundle.representations.size(); ++r) {
        const FittedRepresentation& representation = bundle.representations[r];
        const Dataset transformed = apply_representation(representation, dataset);
        for (std::size_t l = 0; l < learner_count; ++l) {
            LearnerSpec spec = config.roster[l];
            spec.seed = rng::derive_seed(config.seed, {2, r, l, config.roster[l].seed});
            AgentRecord agent;
            agent.representation_index = r;
            try {
                agent.profile = estimate_profile(spec, representation, dataset, config.folds,
                                                 rng::derive_seed(config.seed, {3, r, l}),
                                                 config.smoothing);
                agent.learner = train(spec, transformed);
            } catch (const DataError& e) {
                throw DataError("agent r" + std::to_string(r) + ":" +
                                std::string(learner_kind_name(spec.kind)) +
                                " failed to build: " + e.what());
            }
            if (config.force_recall_equals_precision) {
                agent.profile.recall = agent.profile.precision;
            }
            bundle.agents.push_back(std::move(agent));
        }
    }

    if (config.average_profiles_per_kind) {
        std::map<LearnerKind, AgentProfile> sums;
        std::map<LearnerKind, std::size_t> counts;
        for (const AgentRecord& agent : bundle.agents) {
            AgentProfile& sum = sums[agent.learner.spec.kind];
            sum.precision += agent.profile.precision;
            sum.recall += agent.profile.recall;
            ++counts[agent.learner.spec.kind];
        }
        for (AgentRecord& agent : bundle.agents) {
            const AgentProfile& sum = sums[agent.learner.spec.kind];
            const double count = double(counts[agent.learner.spec.kind]);
            agent.profile = {sum.precision / count, sum.recall / count};
        }
    }
    return bundle;
}

namespace detail {

inline std::vector<AgentProfile> bundle_profiles(const ModelBundle& bundle) {
    std::vector<AgentProfile> profiles;
    profiles.reserve(bundle.agents.size());
    for (const AgentRecord& agent : bundle.agents) profiles.push_back(agent.profile);
    return profiles;
}

}  // namespace detail

// Fuses the ensemble per query sample. The noise draw index is the sample's
// position in the batch, so batch and one-at-a-time prediction agree when
// the caller preserves indices.
inline std::vector<ConsensusResult> predict_bundle(const ModelBundle& bundle,
                                                   std::span<const Sample> samples) {
    if (bundle.agents.empty()) throw DataError("bundle holds no agents");
    const auto profiles = detail::bundle_profiles(bundle);
    const auto weights = consensus_weights(profiles);

    std::vector<ConsensusResult> results;
    results.reserve(samples.size());
    for (std::size_t q = 0; q < samples.size(); ++q) {
        const Sample& sample = samples[q];
        if (sample.features.size() != bundle.dimensionality) {
            throw DataError("query row " + std::to_string(q) + " has " +
                            std::to_string(sample.features.size()) +
                            " features, bundle expects " +
                            std::to_string(bundle.dimensionality));
        }
        std::vector<Sample> transformed;
        transformed.reserve(bundle.representations.size());
        for (const FittedRepresentation& rep : bundle.representations) {
            transformed.push_back(apply_representation(rep, sample));
        }
        ConsensusResult result;
        result.votes.reserve(bundle.agents.size());
        for (const AgentRecord& agent : bundle.agents) {
            result.votes.push_back(
                predict(agent.learner, transformed[agent.representation_index]));
        }
        result.weights = weights;
        result.margin = weighted_margin(result.votes, profiles);
        const NoiseSpec& noise = bundle.config.consensus.noise;
        if (noise.mode == NoiseMode::none) {
            const Decision d = decide(result.margin);
            result.decision = d.vote;
            result.tie = d.tie;
        } else {
            const NoisyDecision d = decide_noisy(result.votes, profiles, noise, q);
            result.decision = d.vote;
            result.tie = d.tie;
        }
        result.reliability = reliability(result.margin);
        results.push_back(std::move(result));
    }
    return results;
}

struct MetricRow {
    std::string name;
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
};

struct EvaluationReport {
    std::vector<MetricRow> agents;
    MetricRow consensus;
    std::vector<double> margins;
    double best_agent_accuracy = 0.0;
    double median_agent_accuracy = 0.0;
    bool consensus_at_least_best = false;

    // One row per agent plus the consensus row.
    std::vector<MetricRow> rows() const {
        std::vector<MetricRow> all = agents;
        all.push_back(consensus);
        return all;
    }
};

inline EvaluationReport evaluate_bundle(const ModelBundle& bundle, const Dataset& test) {
    validate_dataset(test);
    if (!test.fully_labeled()) throw DataError("evaluation requires a labeled test set");
    const std::vector<Vote> truth = labels_of(test);
    const auto results = predict_bundle(bundle, test.samples);

    const auto metrics = [](std::span<const Vote> preds, std::span<const Vote> labels,
                            std::string name) {
        const ConfusionCounts c = confusion(preds, labels);
        const AgentProfile raw = profile_from_counts(c, 0.0);
        MetricRow row;
        row.name = std::move(name);
        row.accuracy = double(c.tp + c.tn) / double(c.total());
        row.precision = raw.precision;
        row.recall = raw.recall;
        return row;
    };

    EvaluationReport report;
    std::vector<Vote> consensus_preds;
    consensus_preds.reserve(results.size());
    for (const ConsensusResult& r : results) {
        consensus_preds.push_back(r.decision);
        report.margins.push_back(r.margin);
    }
    report.consensus = metrics(consensus_preds, truth, "consensus");

    std::vector<Vote> agent_preds(results.size());
    for (std::size_t a = 0; a < bundle.agents.size(); ++a) {
        for (std::size_t i = 0; i < results.size(); ++i) agent_preds[i] = results[i].votes[a];
        report.agents.push_back(metrics(agent_preds, truth, bundle.agent_name(a)));
    }

    std::vector<double> accuracies;
    accuracies.reserve(report.agents.size());
    for (const MetricRow& row : report.agents) accuracies.push_back(row.accuracy);
    std::sort(accuracies.begin(), accuracies.end());
    report.best_agent_accuracy = accuracies.back();
    const std::size_t n = accuracies.size();
    report.median_agent_accuracy = n % 2 ? accuracies[n / 2]
                                         : 0.5 * (accuracies[n / 2 - 1] + accuracies[n / 2]);
    report.consensus_at_least_best = report.consensus.accuracy >= report.best_agent_accuracy;
    return report;
}

}  // namespace brainstorm
