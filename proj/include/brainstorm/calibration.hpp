#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "brainstorm/core.hpp"
#include "brainstorm/learners.hpp"
#include "brainstorm/representations.hpp"

namespace brainstorm {

struct ConfusionCounts {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t tn = 0;
    std::size_t fn = 0;

    std::size_t total() const { return tp + fp + tn + fn; }
};

inline ConfusionCounts confusion(std::span<const Vote> predictions,
                                 std::span<const Vote> truth) {
    if (predictions.size() != truth.size()) {
        throw DataError("prediction/truth length mismatch: " +
                        std::to_string(predictions.size()) + " vs " +
                        std::to_string(truth.size()));
    }
    if (predictions.empty()) throw DataError("confusion requires at least one pair");
    ConfusionCounts c;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const bool pred_pos = predictions[i].value > 0;
        const bool true_pos = truth[i].value > 0;
        if (pred_pos && true_pos) ++c.tp;
        else if (pred_pos && !true_pos) ++c.fp;
        else if (!pred_pos && !true_pos) ++c.tn;
        else ++c.fn;
    }
    return c;
}

// precision = (tp+a)/(tp+fp+2a), recall = (tp+a)/(tp+fn+2a). With a = 0 an
// empty denominator yields 0 (the agent showed no evidence either way).
inline AgentProfile profile_from_counts(const ConfusionCounts& c, double smoothing = 1.0) {
    if (!(smoothing >= 0.0) || !std::isfinite(smoothing)) {
        throw DataError("smoothing must be a finite value >= 0");
    }
    const auto ratio = [](double num, double den) { return den > 0.0 ? num / den : 0.0; };
    const double a = smoothing;
    AgentProfile profile;
    profile.precision = ratio(double(c.tp) + a, double(c.tp + c.fp) + 2.0 * a);
    profile.recall = ratio(double(c.tp) + a, double(c.tp + c.fn) + 2.0 * a);
    return profile;
}

// Pools out-of-fold predictions over a k-fold split into one confusion
// table; every sample is predicted exactly once, by a model that never saw
// it. Trainer: (const Dataset& train_split) -> callable(const Sample&) -> Vote.
template <class Trainer>
ConfusionCounts pooled_out_of_fold_counts(const Dataset& dataset, std::size_t k,
                                          std::uint64_t seed, Trainer&& trainer) {
    const auto folds = split_folds(dataset, k, seed);
    ConfusionCounts pooled;
    std::vector<char> held_out(dataset.size(), 0);
    for (const auto& fold : folds) {
        std::fill(held_out.begin(), held_out.end(), 0);
        for (std::size_t idx : fold) held_out[idx] = 1;
        std::vector<std::size_t> train_rows;
        train_rows.reserve(dataset.size() - fold.size());
        for (std::size_t i = 0; i < dataset.size(); ++i) {
            if (!held_out[i]) train_rows.push_back(i);
        }
        auto predictor = trainer(subset(dataset, train_rows));
        for (std::size_t idx : fold) {
            const Vote pred = predictor(dataset.samples[idx]);
            const Vote truth = *dataset.samples[idx].label;
            const bool pred_pos = pred.value > 0;
            const bool true_pos = truth.value > 0;
            if (pred_pos && true_pos) ++pooled.tp;
            else if (pred_pos && !true_pos) ++pooled.fp;
            else if (!pred_pos && !true_pos) ++pooled.tn;
            else ++pooled.fn;
        }
    }
    return pooled;
}

// Cross-validated precision/recall for one (learner, representation) agent.
inline AgentProfile estimate_profile(const LearnerSpec& spec,
                                     const FittedRepresentation& representation,
                                     const Dataset& dataset, std::size_t k,
                                     std::uint64_t seed, double smoothing = 1.0) {
    const Dataset transformed = apply_representation(representation, dataset);
    const ConfusionCounts counts =
        pooled_out_of_fold_counts(transformed, k, seed, [&](const Dataset& train_split) {
            TrainedLearner model = train(spec, train_split);
            return [model = std::move(model)](const Sample& s) { return predict(model, s); };
        });
    return profile_from_counts(counts, smoothing);
}

}  // namespace brainstorm
