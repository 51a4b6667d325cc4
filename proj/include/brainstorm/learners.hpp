#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "brainstorm/core.hpp"
#include "brainstorm/rng.hpp"

namespace brainstorm {

enum class LearnerKind {
    decision_tree,
    knn,
    naive_bayes,
    linear_sgd,
    random_forest,
    trend_vector,
};

inline std::string_view learner_kind_name(LearnerKind kind) {
    switch (kind) {
        case LearnerKind::decision_tree: return "decision_tree";
        case LearnerKind::knn: return "knn";
        case LearnerKind::naive_bayes: return "naive_bayes";
        case LearnerKind::linear_sgd: return "linear_sgd";
        case LearnerKind::random_forest: return "random_forest";
        case LearnerKind::trend_vector: return "trend_vector";
    }
    return "decision_tree";
}

inline LearnerKind learner_kind_from_name(std::string_view name) {
    for (LearnerKind k : {LearnerKind::decision_tree, LearnerKind::knn,
                          LearnerKind::naive_bayes, LearnerKind::linear_sgd,
                          LearnerKind::random_forest, LearnerKind::trend_vector}) {
        if (learner_kind_name(k) == name) return k;
    }
    throw DataError("unknown learner kind '" + std::string(name) + "'");
}

struct LearnerSpec {
    LearnerKind kind = LearnerKind::decision_tree;
    int max_depth = 6;          // decision_tree, random_forest
    int neighbors = 5;          // knn
    int epochs = 100;           // linear_sgd
    double learning_rate = 0.1; // linear_sgd
    int trees = 25;             // random_forest
    double subsample = 1.0;     // random_forest bootstrap fraction
    std::uint64_t seed = 0;

    void validate() const {
        if (max_depth < 1) throw DataError("tree depth must be >= 1");
        if (neighbors < 1) throw DataError("neighbor count must be >= 1");
        if (epochs < 1) throw DataError("epoch count must be >= 1");
        if (!(learning_rate > 0.0)) throw DataError("learning rate must be > 0");
        if (trees < 1) throw DataError("tree count must be >= 1");
        if (!(subsample > 0.0) || subsample > 1.0) {
            throw DataError("subsample fraction must be in (0, 1]");
        }
    }
};

struct TreeNode {
    bool leaf = true;
    std::size_t feature = 0;
    double threshold = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    int label = 1;
};

struct TreeState {
    std::vector<TreeNode> nodes;  // nodes[0] is the root
};

struct ForestState {
    std::vector<TreeState> trees;
};

struct KnnState {
    std::vector<std::vector<double>> points;
    std::vector<int> labels;
};

struct BayesState {
    double log_prior_pos = 0.0;
    double log_prior_neg = 0.0;
    std::vector<double> mean_pos, var_pos;
    std::vector<double> mean_neg, var_neg;
};

struct SgdState {
    std::vector<double> weights;
    double bias = 0.0;
};

struct CentroidState {
    std::vector<double> positive;
    std::vector<double> negative;
};

struct TrainedLearner {
    LearnerSpec spec;
    std::size_t dimensionality = 0;
    std::variant<TreeState, ForestState, KnnState, BayesState, SgdState, CentroidState> state;
};

namespace detail {

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

inline double gini(std::size_t pos, std::size_t neg) {
    const double n = double(pos + neg);
    if (n == 0) return 0.0;
    const double fp = double(pos) / n;
    const double fn = double(neg) / n;
    return 1.0 - fp * fp - fn * fn;
}

struct SplitChoice {
    bool found = false;
    std::size_t feature = 0;
    double threshold = 0.0;
    double impurity = std::numeric_limits<double>::infinity();
};

// Scans candidate features for the threshold (midpoint between adjacent
// distinct values) minimizing the weighted child Gini impurity. First
// candidate wins ties, so the caller's candidate order fixes the result.
inline SplitChoice best_split(const std::vector<Sample>& data,
                              const std::vector<std::size_t>& rows,
                              const std::vector<std::size_t>& candidates) {
    SplitChoice best;
    std::vector<std::pair<double, int>> column;
    column.reserve(rows.size());
    for (std::size_t f : candidates) {
        column.clear();
        for (std::size_t r : rows) {
            column.emplace_back(data[r].features[f], data[r].label->value);
        }
        std::sort(column.begin(), column.end());
        const std::size_t n = column.size();
        std::size_t total_pos = 0;
        for (const auto& [v, y] : column) total_pos += y > 0;
        std::size_t left_pos = 0;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            left_pos += column[i].second > 0;
            if (column[i].first == column[i + 1].first) continue;
            const std::size_t nl = i + 1;
            const std::size_t nr = n - nl;
            const std::size_t rp = total_pos - left_pos;
            const double weighted =
                (double(nl) * gini(left_pos, nl - left_pos) + double(nr) * gini(rp, nr - rp)) /
                double(n);
            if (weighted < best.impurity) {
                best.found = true;
                best.feature = f;
                best.threshold = 0.5 * (column[i].first + column[i + 1].first);
                best.impurity = weighted;
            }
        }
    }
    return best;
}

// Grows one subtree, returning its root index. mtry == 0 scans all features;
// otherwise each node scans a fresh random subset of mtry features drawn
// from feature_rng in node construction (depth-first) order.
inline std::int32_t grow_tree(const std::vector<Sample>& data, std::vector<TreeNode>& nodes,
                              std::vector<std::size_t> rows, int depth_left, std::size_t mtry,
                              rng::Stream* feature_rng, std::size_t dimensionality) {
    std::size_t pos = 0;
    for (std::size_t r : rows) pos += data[r].label->value > 0;
    const std::size_t neg = rows.size() - pos;

    const auto make_leaf = [&]() {
        TreeNode leaf;
        leaf.leaf = true;
        leaf.label = pos >= neg ? 1 : -1;  // ties resolve to +1
        nodes.push_back(leaf);
        return std::int32_t(nodes.size() - 1);
    };

    if (depth_left <= 0 || pos == 0 || neg == 0) return make_leaf();

    std::vector<std::size_t> candidates;
    if (mtry == 0 || mtry >= dimensionality) {
        candidates.resize(dimensionality);
        std::iota(candidates.begin(), candidates.end(), std::size_t{0});
    } else {
        std::vector<std::size_t> all(dimensionality);
        std::iota(all.begin(), all.end(), std::size_t{0});
        for (std::size_t i = 0; i < mtry; ++i) {
            const std::size_t j = i + feature_rng->next_index(dimensionality - i);
            std::swap(all[i], all[j]);
        }
        candidates.assign(all.begin(), all.begin() + std::ptrdiff_t(mtry));
        std::sort(candidates.begin(), candidates.end());
    }

    const SplitChoice split = best_split(data, rows, candidates);
    if (!split.found) return make_leaf();

    std::vector<std::size_t> left_rows, right_rows;
    for (std::size_t r : rows) {
        (data[r].features[split.feature] < split.threshold ? left_rows : right_rows).push_back(r);
    }
    rows.clear();

    TreeNode node;
    node.leaf = false;
    node.feature = split.feature;
    node.threshold = split.threshold;
    nodes.push_back(node);
    const std::int32_t self = std::int32_t(nodes.size() - 1);
    const std::int32_t left =
        grow_tree(data, nodes, std::move(left_rows), depth_left - 1, mtry, feature_rng,
                  dimensionality);
    const std::int32_t right =
        grow_tree(data, nodes, std::move(right_rows), depth_left - 1, mtry, feature_rng,
                  dimensionality);
    nodes[self].left = left;
    nodes[self].right = right;
    return self;
}

inline int tree_predict(const TreeState& tree, const std::vector<double>& features) {
    std::int32_t at = 0;
    while (!tree.nodes[at].leaf) {
        const TreeNode& node = tree.nodes[at];
        at = features[node.feature] < node.threshold ? node.left : node.right;
    }
    return tree.nodes[at].label;
}

inline constexpr double kVarianceFloor = 1e-9;

}  // namespace detail

// Fits one base classifier. Deterministic in (spec.seed, dataset); never
// fails on a valid two-class labeled dataset.
inline TrainedLearner train(const LearnerSpec& spec, const Dataset& dataset) {
    spec.validate();
    validate_dataset(dataset);
    if (!dataset.fully_labeled()) throw DataError("training requires a labeled dataset");

    const std::size_t n = dataset.size();
    const std::size_t d = dataset.dimensionality;
    TrainedLearner out;
    out.spec = spec;
    out.dimensionality = d;

    std::vector<std::size_t> pos_rows, neg_rows;
    for (std::size_t i = 0; i < n; ++i) {
        (dataset.samples[i].label->value > 0 ? pos_rows : neg_rows).push_back(i);
    }

    const auto class_mean = [&](const std::vector<std::size_t>& rows) {
        std::vector<double> mean(d, 0.0);
        for (std::size_t r : rows) {
            for (std::size_t f = 0; f < d; ++f) mean[f] += dataset.samples[r].features[f];
        }
        for (double& m : mean) m /= double(rows.size());
        return mean;
    };

    switch (spec.kind) {
        case LearnerKind::decision_tree: {
            TreeState tree;
            std::vector<std::size_t> rows(n);
            std::iota(rows.begin(), rows.end(), std::size_t{0});
            detail::grow_tree(dataset.samples, tree.nodes, std::move(rows), spec.max_depth, 0,
                              nullptr, d);
            out.state = std::move(tree);
            break;
        }
        case LearnerKind::knn: {
            KnnState knn;
            knn.points.reserve(n);
            knn.labels.reserve(n);
            for (const Sample& s : dataset.samples) {
                knn.points.push_back(s.features);
                knn.labels.push_back(s.label->value);
            }
            out.state = std::move(knn);
            break;
        }
        case LearnerKind::naive_bayes: {
            if (pos_rows.empty() || neg_rows.empty()) {
                throw DataError("naive_bayes requires both classes in training data");
            }
            BayesState nb;
            nb.log_prior_pos = std::log(double(pos_rows.size()) / double(n));
            nb.log_prior_neg = std::log(double(neg_rows.size()) / double(n));
            nb.mean_pos = class_mean(pos_rows);
            nb.mean_neg = class_mean(neg_rows);
            const auto class_var = [&](const std::vector<std::size_t>& rows,
                                       const std::vector<double>& mean) {
                std::vector<double> var(d, 0.0);
                for (std::size_t r : rows) {
                    for (std::size_t f = 0; f < d; ++f) {
                        const double diff = dataset.samples[r].features[f] - mean[f];
                        var[f] += diff * diff;
                    }
                }
                for (double& v : var) v = std::max(v / double(rows.size()), detail::kVarianceFloor);
                return var;
            };
            nb.var_pos = class_var(pos_rows, nb.mean_pos);
            nb.var_neg = class_var(neg_rows, nb.mean_neg);
            out.state = std::move(nb);
            break;
        }
        case LearnerKind::linear_sgd: {
            SgdState sgd;
            sgd.weights.assign(d, 0.0);
            rng::Stream order_rng(rng::derive_seed(spec.seed, {0x59d}));
            std::vector<std::size_t> order(n);
            std::iota(order.begin(), order.end(), std::size_t{0});
            for (int epoch = 0; epoch < spec.epochs; ++epoch) {
                order_rng.shuffle(order);
                for (std::size_t idx : order) {
                    const Sample& s = dataset.samples[idx];
                    const double y = s.label->value;
                    const double z = detail::dot(sgd.weights, s.features) + sgd.bias;
                    const double g = 1.0 / (1.0 + std::exp(y * z));  // logistic-loss gradient
                    const double step = spec.learning_rate * y * g;
                    for (std::size_t f = 0; f < d; ++f) sgd.weights[f] += step * s.features[f];
                    sgd.bias += step;
                }
            }
            out.state = std::move(sgd);
            break;
        }
        case LearnerKind::random_forest: {
            ForestState forest;
            forest.trees.reserve(std::size_t(spec.trees));
            const std::size_t boot_n = std::max<std::size_t>(
                1, std::size_t(std::llround(spec.subsample * double(n))));
            const std::size_t mtry =
                std::max<std::size_t>(1, std::size_t(std::ceil(std::sqrt(double(d)))));
            for (int t = 0; t < spec.trees; ++t) {
                rng::Stream bootstrap(rng::derive_seed(spec.seed, {0xb007, std::uint64_t(t)}));
                rng::Stream features(rng::derive_seed(spec.seed, {0xfea7, std::uint64_t(t)}));
                std::vector<std::size_t> rows;
                rows.reserve(boot_n);
                for (std::size_t i = 0; i < boot_n; ++i) rows.push_back(bootstrap.next_index(n));
                TreeState tree;
                detail::grow_tree(dataset.samples, tree.nodes, std::move(rows), spec.max_depth,
                                  mtry, &features, d);
                forest.trees.push_back(std::move(tree));
            }
            out.state = std::move(forest);
            break;
        }
        case LearnerKind::trend_vector: {
            if (pos_rows.empty() || neg_rows.empty()) {
                throw DataError("trend_vector requires both classes in training data");
            }
            CentroidState centroids;
            centroids.positive = class_mean(pos_rows);
            centroids.negative = class_mean(neg_rows);
            out.state = std::move(centroids);
            break;
        }
    }
    return out;
}

// Pure function of (learner, sample); total on matching dimensionality and
// always returns one of the two vote states.
inline Vote predict(const TrainedLearner& learner, const Sample& sample) {
    if (sample.features.size() != learner.dimensionality) {
        throw DataError("sample has " + std::to_string(sample.features.size()) +
                        " features, learner was trained on " +
                        std::to_string(learner.dimensionality));
    }
    const std::vector<double>& x = sample.features;

    if (const auto* tree = std::get_if<TreeState>(&learner.state)) {
        return make_vote(detail::tree_predict(*tree, x));
    }
    if (const auto* forest = std::get_if<ForestState>(&learner.state)) {
        int sum = 0;
        for (const TreeState& tree : forest->trees) sum += detail::tree_predict(tree, x);
        return vote_of_sign(double(sum));
    }
    if (const auto* knn = std::get_if<KnnState>(&learner.state)) {
        const std::size_t n = knn->points.size();
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        // exact distance ties fall back to a canonical order so the stored
        // sample order never matters
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            const double da = detail::squared_distance(knn->points[a], x);
            const double db = detail::squared_distance(knn->points[b], x);
            if (da != db) return da < db;
            if (knn->points[a] != knn->points[b]) return knn->points[a] < knn->points[b];
            return knn->labels[a] < knn->labels[b];
        });
        const std::size_t k = std::min<std::size_t>(std::size_t(learner.spec.neighbors), n);
        int sum = 0;
        for (std::size_t i = 0; i < k; ++i) sum += knn->labels[order[i]];
        return vote_of_sign(double(sum));
    }
    if (const auto* nb = std::get_if<BayesState>(&learner.state)) {
        double ll_pos = nb->log_prior_pos;
        double ll_neg = nb->log_prior_neg;
        for (std::size_t f = 0; f < x.size(); ++f) {
            const double dp = x[f] - nb->mean_pos[f];
            const double dn = x[f] - nb->mean_neg[f];
            ll_pos += -0.5 * std::log(nb->var_pos[f]) - dp * dp / (2.0 * nb->var_pos[f]);
            ll_neg += -0.5 * std::log(nb->var_neg[f]) - dn * dn / (2.0 * nb->var_neg[f]);
        }
        return vote_of_sign(ll_pos - ll_neg);
    }
    if (const auto* sgd = std::get_if<SgdState>(&learner.state)) {
        return vote_of_sign(detail::dot(sgd->weights, x) + sgd->bias);
    }
    const auto& centroids = std::get<CentroidState>(learner.state);
    const double d_pos = detail::squared_distance(centroids.positive, x);
    const double d_neg = detail::squared_distance(centroids.negative, x);
    return vote_of_sign(d_neg - d_pos);
}

}  // namespace brainstorm
