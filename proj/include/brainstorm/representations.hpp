#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "brainstorm/core.hpp"
#include "brainstorm/rng.hpp"

namespace brainstorm {

enum class RepKind {
    identity,
    zscore,
    minmax,
    binarize_at_median,
    feature_subset,
    rank_transform,
};

inline std::string_view rep_kind_name(RepKind kind) {
    switch (kind) {
        case RepKind::identity: return "identity";
        case RepKind::zscore: return "zscore";
        case RepKind::minmax: return "minmax";
        case RepKind::binarize_at_median: return "binarize_at_median";
        case RepKind::feature_subset: return "feature_subset";
        case RepKind::rank_transform: return "rank_transform";
    }
    return "identity";
}

inline RepKind rep_kind_from_name(std::string_view name) {
    for (RepKind k : {RepKind::identity, RepKind::zscore, RepKind::minmax,
                      RepKind::binarize_at_median, RepKind::feature_subset,
                      RepKind::rank_transform}) {
        if (rep_kind_name(k) == name) return k;
    }
    throw DataError("unknown representation kind '" + std::string(name) + "'");
}

struct RepresentationSpec {
    RepKind kind = RepKind::identity;
    double subset_fraction = 0.5;  // feature_subset only
    std::uint64_t seed = 0;        // feature_subset only

    friend bool operator==(const RepresentationSpec&, const RepresentationSpec&) = default;
};

// A transform with statistics frozen at fit time. Only the fields relevant
// to the spec's kind are populated.
struct FittedRepresentation {
    RepresentationSpec spec;
    std::size_t input_dimensionality = 0;
    std::vector<double> means;                      // zscore
    std::vector<double> deviations;                 // zscore (population)
    std::vector<double> minima;                     // minmax
    std::vector<double> maxima;                     // minmax
    std::vector<double> medians;                    // binarize_at_median
    std::vector<std::vector<double>> sorted_values; // rank_transform
    std::vector<std::size_t> retained;              // feature_subset

    std::size_t output_dimensionality() const {
        return spec.kind == RepKind::feature_subset ? retained.size()
                                                    : input_dimensionality;
    }
};

// Per-feature class separation measured as the absolute Welch t statistic.
// Constant features score 0; exact separators with zero within-class
// variance score +infinity. Result is sorted by score descending, index
// ascending on ties.
inline std::vector<std::pair<std::size_t, double>> score_features(const Dataset& dataset) {
    const ClassCounts counts = validate_dataset(dataset);
    if (counts.unlabeled > 0) throw DataError("feature scoring requires a labeled dataset");
    if (counts.positives == 0 || counts.negatives == 0) {
        throw DataError("feature scoring requires both classes");
    }

    std::vector<std::pair<std::size_t, double>> scores;
    scores.reserve(dataset.dimensionality);
    for (std::size_t f = 0; f < dataset.dimensionality; ++f) {
        double sum_p = 0, sum_n = 0;
        std::size_t np = 0, nn = 0;
        for (const Sample& s : dataset.samples) {
            if (s.label->value > 0) {
                sum_p += s.features[f];
                ++np;
            } else {
                sum_n += s.features[f];
                ++nn;
            }
        }
        const double mean_p = sum_p / double(np);
        const double mean_n = sum_n / double(nn);
        double ss_p = 0, ss_n = 0;
        for (const Sample& s : dataset.samples) {
            const double d = s.features[f] - (s.label->value > 0 ? mean_p : mean_n);
            (s.label->value > 0 ? ss_p : ss_n) += d * d;
        }
        const double var_p = np >= 2 ? ss_p / double(np - 1) : 0.0;
        const double var_n = nn >= 2 ? ss_n / double(nn - 1) : 0.0;
        const double se2 = var_p / double(np) + var_n / double(nn);
        const double diff = std::fabs(mean_p - mean_n);
        double score;
        if (se2 <= 0.0) {
            score = diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
        } else {
            score = diff / std::sqrt(se2);
        }
        scores.emplace_back(f, score);
    }
    std::sort(scores.begin(), scores.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    return scores;
}

namespace detail {

inline double median_of(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace detail

inline FittedRepresentation fit_representation(const Dataset& dataset,
                                               const RepresentationSpec& spec) {
    validate_dataset(dataset);
    FittedRepresentation fitted;
    fitted.spec = spec;
    fitted.input_dimensionality = dataset.dimensionality;
    const std::size_t d = dataset.dimensionality;
    const std::size_t n = dataset.size();

    const auto column = [&](std::size_t f) {
        std::vector<double> col;
        col.reserve(n);
        for (const Sample& s : dataset.samples) col.push_back(s.features[f]);
        return col;
    };

    switch (spec.kind) {
        case RepKind::identity:
            break;
        case RepKind::zscore: {
            fitted.means.resize(d);
            fitted.deviations.resize(d);
            for (std::size_t f = 0; f < d; ++f) {
                const auto col = column(f);
                const double mean = std::accumulate(col.begin(), col.end(), 0.0) / double(n);
                double ss = 0;
                for (double v : col) ss += (v - mean) * (v - mean);
                fitted.means[f] = mean;
                fitted.deviations[f] = std::sqrt(ss / double(n));
            }
            break;
        }
        case RepKind::minmax: {
            fitted.minima.resize(d);
            fitted.maxima.resize(d);
            for (std::size_t f = 0; f < d; ++f) {
                const auto col = column(f);
                const auto [lo, hi] = std::minmax_element(col.begin(), col.end());
                fitted.minima[f] = *lo;
                fitted.maxima[f] = *hi;
            }
            break;
        }
        case RepKind::binarize_at_median: {
            fitted.medians.resize(d);
            for (std::size_t f = 0; f < d; ++f) fitted.medians[f] = detail::median_of(column(f));
            break;
        }
        case RepKind::rank_transform: {
            fitted.sorted_values.resize(d);
            for (std::size_t f = 0; f < d; ++f) {
                auto col = column(f);
                std::sort(col.begin(), col.end());
                fitted.sorted_values[f] = std::move(col);
            }
            break;
        }
        case RepKind::feature_subset: {
            if (!(spec.subset_fraction > 0.0) || spec.subset_fraction > 1.0) {
                throw DataError("feature_subset fraction must be in (0, 1]");
            }
            std::size_t keep = static_cast<std::size_t>(
                std::llround(spec.subset_fraction * double(d)));
            keep = std::clamp<std::size_t>(keep, 1, d);
            std::vector<std::size_t> indices(d);
            std::iota(indices.begin(), indices.end(), std::size_t{0});
            rng::Stream stream(spec.seed);
            stream.shuffle(indices);
            indices.resize(keep);
            std::sort(indices.begin(), indices.end());
            fitted.retained = std::move(indices);
            break;
        }
    }
    return fitted;
}

// Transforms samples under the frozen statistics. Labels and sample order
// are never touched; only feature_subset changes dimensionality.
inline Sample apply_representation(const FittedRepresentation& fitted, const Sample& sample) {
    if (sample.features.size() != fitted.input_dimensionality) {
        throw DataError("sample has " + std::to_string(sample.features.size()) +
                        " features, representation was fitted on " +
                        std::to_string(fitted.input_dimensionality));
    }
    Sample out;
    out.label = sample.label;
    switch (fitted.spec.kind) {
        case RepKind::identity:
            out.features = sample.features;
            break;
        case RepKind::zscore:
            out.features.resize(fitted.input_dimensionality);
            for (std::size_t f = 0; f < sample.features.size(); ++f) {
                const double dev = fitted.deviations[f];
                out.features[f] = dev > 0.0 ? (sample.features[f] - fitted.means[f]) / dev : 0.0;
            }
            break;
        case RepKind::minmax:
            out.features.resize(fitted.input_dimensionality);
            for (std::size_t f = 0; f < sample.features.size(); ++f) {
                const double range = fitted.maxima[f] - fitted.minima[f];
                out.features[f] =
                    range > 0.0 ? (sample.features[f] - fitted.minima[f]) / range : 0.5;
            }
            break;
        case RepKind::binarize_at_median:
            out.features.resize(fitted.input_dimensionality);
            for (std::size_t f = 0; f < sample.features.size(); ++f) {
                // values equal to the median binarize up
                out.features[f] = sample.features[f] >= fitted.medians[f] ? 1.0 : -1.0;
            }
            break;
        case RepKind::rank_transform:
            out.features.resize(fitted.input_dimensionality);
            for (std::size_t f = 0; f < sample.features.size(); ++f) {
                const auto& col = fitted.sorted_values[f];
                const double x = sample.features[f];
                const auto lo = std::lower_bound(col.begin(), col.end(), x) - col.begin();
                const auto hi = std::upper_bound(col.begin(), col.end(), x) - col.begin();
                // midrank empirical CDF, in [0, 1)
                out.features[f] = (double(lo) + 0.5 * double(hi - lo)) / double(col.size());
            }
            break;
        case RepKind::feature_subset:
            out.features.reserve(fitted.retained.size());
            for (std::size_t f : fitted.retained) out.features.push_back(sample.features[f]);
            break;
    }
    return out;
}

inline std::vector<Sample> apply_representation(const FittedRepresentation& fitted,
                                                const std::vector<Sample>& samples) {
    std::vector<Sample> out;
    out.reserve(samples.size());
    for (const Sample& s : samples) out.push_back(apply_representation(fitted, s));
    return out;
}

inline Dataset apply_representation(const FittedRepresentation& fitted, const Dataset& dataset) {
    Dataset out;
    out.samples = apply_representation(fitted, dataset.samples);
    out.dimensionality = fitted.output_dimensionality();
    if (fitted.spec.kind == RepKind::feature_subset) {
        for (std::size_t f : fitted.retained) {
            out.feature_names.push_back(f < dataset.feature_names.size()
                                            ? dataset.feature_names[f]
                                            : "x" + std::to_string(f + 1));
        }
    } else {
        out.feature_names = dataset.feature_names;
    }
    return out;
}

inline std::vector<RepKind> default_representation_pool() {
    return {RepKind::zscore, RepKind::minmax, RepKind::binarize_at_median,
            RepKind::feature_subset, RepKind::rank_transform};
}

// The first representation is always identity, so the ensemble always sees
// the raw data; the rest are drawn from the pool with derived seeds.
inline std::vector<FittedRepresentation> generate_representation_set(
    const Dataset& dataset, std::size_t count, std::uint64_t seed,
    std::span<const RepKind> pool) {
    if (count == 0) throw DataError("representation count must be at least 1");
    if (pool.empty() && count > 1) throw DataError("representation pool is empty");

    std::vector<FittedRepresentation> out;
    out.reserve(count);
    out.push_back(fit_representation(dataset, RepresentationSpec{}));
    rng::Stream kind_picks(rng::derive_seed(seed, {0x7e9}));
    for (std::size_t i = 1; i < count; ++i) {
        RepresentationSpec spec;
        spec.kind = pool[kind_picks.next_index(pool.size())];
        spec.seed = rng::derive_seed(seed, {i});
        out.push_back(fit_representation(dataset, spec));
    }
    return out;
}

inline std::vector<FittedRepresentation> generate_representation_set(const Dataset& dataset,
                                                                     std::size_t count,
                                                                     std::uint64_t seed) {
    const auto pool = default_representation_pool();
    return generate_representation_set(dataset, count, seed, pool);
}

}  // namespace brainstorm
