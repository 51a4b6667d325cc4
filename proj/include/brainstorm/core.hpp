#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "brainstorm/rng.hpp"

namespace brainstorm {

// Raised for anything caused by user-supplied data, files or run settings;
// the CLI maps it to the data-error exit code.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::uint64_t fnv1a64(std::string_view text) {
    std::uint64_t hash = 1469598103934665603ULL;
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 1099511628211ULL;
    }
    return hash;
}

inline std::string fnv1a64_hex(std::string_view text) {
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "fnv1a64:%016llx",
                  static_cast<unsigned long long>(fnv1a64(text)));
    return buffer;
}

}  // namespace detail

// A binary agent state; the only two values are -1 and +1.
struct Vote {
    int value = 1;

    friend bool operator==(const Vote&, const Vote&) = default;
};

inline constexpr Vote vote_plus{+1};
inline constexpr Vote vote_minus{-1};

// Global tie rule: anything not strictly negative maps to +1.
inline Vote vote_of_sign(double x) { return x < 0.0 ? vote_minus : vote_plus; }

inline Vote make_vote(int value) {
    if (value != 1 && value != -1) {
        throw DataError("vote value must be -1 or +1, got " + std::to_string(value));
    }
    return Vote{value};
}

// One feature vector; label is absent for query samples.
struct Sample {
    std::vector<double> features;
    std::optional<Vote> label;
};

// Per-learner prediction-quality estimate; the source of the consensus
// weights. Both values live in [0, 1].
struct AgentProfile {
    double precision = 0.0;
    double recall = 0.0;

    friend bool operator==(const AgentProfile&, const AgentProfile&) = default;
};

struct Dataset {
    std::vector<Sample> samples;
    std::vector<std::string> feature_names;
    std::size_t dimensionality = 0;

    std::size_t size() const { return samples.size(); }

    bool fully_labeled() const {
        return std::all_of(samples.begin(), samples.end(),
                           [](const Sample& s) { return s.label.has_value(); });
    }
};

inline std::vector<std::string> default_feature_names(std::size_t dimensionality) {
    std::vector<std::string> names;
    names.reserve(dimensionality);
    for (std::size_t i = 0; i < dimensionality; ++i) {
        names.push_back("x" + std::to_string(i + 1));
    }
    return names;
}

// Convenience constructor used throughout the tests and the simulator:
// labels empty means an unlabeled (query) dataset.
inline Dataset make_dataset(std::vector<std::vector<double>> rows,
                            const std::vector<int>& labels = {},
                            std::vector<std::string> feature_names = {}) {
    Dataset out;
    out.dimensionality = rows.empty() ? 0 : rows.front().size();
    out.feature_names = feature_names.empty() ? default_feature_names(out.dimensionality)
                                              : std::move(feature_names);
    if (!labels.empty() && labels.size() != rows.size()) {
        throw DataError("label count does not match row count");
    }
    out.samples.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        Sample s;
        s.features = std::move(rows[i]);
        if (!labels.empty()) s.label = make_vote(labels[i]);
        out.samples.push_back(std::move(s));
    }
    return out;
}

inline std::vector<Vote> labels_of(const Dataset& dataset) {
    std::vector<Vote> out;
    out.reserve(dataset.size());
    for (const Sample& s : dataset.samples) {
        if (!s.label) throw DataError("dataset contains unlabeled samples");
        out.push_back(*s.label);
    }
    return out;
}

inline Dataset subset(const Dataset& dataset, const std::vector<std::size_t>& rows) {
    Dataset out;
    out.feature_names = dataset.feature_names;
    out.dimensionality = dataset.dimensionality;
    out.samples.reserve(rows.size());
    for (std::size_t r : rows) out.samples.push_back(dataset.samples.at(r));
    return out;
}

// Accepted label tokens: "+1", "1", "yes" map to +1; "-1", "0", "no" map
// to -1 (case-insensitive, surrounding whitespace ignored).
inline Vote parse_label_token(std::string_view token) {
    auto begin = token.find_first_not_of(" \t\r\n");
    if (begin == std::string_view::npos) throw DataError("empty label token");
    auto end = token.find_last_not_of(" \t\r\n");
    std::string t(token.substr(begin, end - begin + 1));
    std::transform(t.begin(), t.end(), t.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (t == "1" || t == "+1" || t == "yes") return vote_plus;
    if (t == "-1" || t == "0" || t == "no") return vote_minus;
    throw DataError("unknown label '" + std::string(token) + "'");
}

inline std::vector<Vote> map_labels(const std::vector<std::string>& raw_labels) {
    std::vector<Vote> out;
    out.reserve(raw_labels.size());
    for (std::size_t row = 0; row < raw_labels.size(); ++row) {
        try {
            out.push_back(parse_label_token(raw_labels[row]));
        } catch (const DataError& e) {
            throw DataError(std::string(e.what()) + " at row " + std::to_string(row));
        }
    }
    return out;
}

inline std::string render_label(Vote v) { return v.value > 0 ? "1" : "-1"; }

inline std::vector<std::string> render_labels(const std::vector<Vote>& votes) {
    std::vector<std::string> out;
    out.reserve(votes.size());
    for (Vote v : votes) out.push_back(render_label(v));
    return out;
}

struct ClassCounts {
    std::size_t positives = 0;
    std::size_t negatives = 0;
    std::size_t unlabeled = 0;
};

// Checks every dataset invariant and reports class counts. Never mutates.
// Row/column indices in messages are 0-based.
inline ClassCounts validate_dataset(const Dataset& dataset) {
    if (dataset.samples.empty()) throw DataError("dataset is empty");
    if (dataset.dimensionality == 0) throw DataError("dataset has zero features");
    if (!dataset.feature_names.empty() &&
        dataset.feature_names.size() != dataset.dimensionality) {
        throw DataError("feature name count (" + std::to_string(dataset.feature_names.size()) +
                        ") does not match dimensionality (" +
                        std::to_string(dataset.dimensionality) + ")");
    }
    ClassCounts counts;
    for (std::size_t row = 0; row < dataset.samples.size(); ++row) {
        const Sample& s = dataset.samples[row];
        if (s.features.size() != dataset.dimensionality) {
            throw DataError("ragged row " + std::to_string(row) + ": " +
                            std::to_string(s.features.size()) + " features, expected " +
                            std::to_string(dataset.dimensionality));
        }
        for (std::size_t col = 0; col < s.features.size(); ++col) {
            if (!std::isfinite(s.features[col])) {
                throw DataError("non-finite value at row " + std::to_string(row) +
                                ", column " + std::to_string(col));
            }
        }
        if (!s.label) {
            ++counts.unlabeled;
        } else if (s.label->value > 0) {
            ++counts.positives;
        } else {
            ++counts.negatives;
        }
    }
    return counts;
}

// k disjoint index sets covering [0, n). Stratified by label whenever both
// classes have at least k members; plain otherwise. Deterministic in seed.
inline std::vector<std::vector<std::size_t>> split_folds(const Dataset& dataset,
                                                         std::size_t k,
                                                         std::uint64_t seed) {
    const std::size_t n = dataset.size();
    if (k < 2) throw DataError("fold count must be at least 2, got " + std::to_string(k));
    if (k > n) {
        throw DataError("fold count " + std::to_string(k) + " exceeds sample count " +
                        std::to_string(n));
    }
    if (!dataset.fully_labeled()) throw DataError("fold splitting requires a labeled dataset");

    std::vector<std::size_t> positives, negatives;
    for (std::size_t i = 0; i < n; ++i) {
        (dataset.samples[i].label->value > 0 ? positives : negatives).push_back(i);
    }

    std::vector<std::vector<std::size_t>> folds(k);
    const auto deal = [&](std::vector<std::size_t> indices, std::uint64_t stream_seed) {
        rng::Stream stream(stream_seed);
        stream.shuffle(indices);
        for (std::size_t i = 0; i < indices.size(); ++i) {
            folds[i % k].push_back(indices[i]);
        }
    };

    if (positives.size() >= k && negatives.size() >= k) {
        deal(positives, rng::derive_seed(seed, {1}));
        deal(negatives, rng::derive_seed(seed, {2}));
    } else {
        std::vector<std::size_t> all(n);
        std::iota(all.begin(), all.end(), std::size_t{0});
        deal(all, rng::derive_seed(seed, {0}));
    }
    for (auto& fold : folds) std::sort(fold.begin(), fold.end());
    return folds;
}

}  // namespace brainstorm
