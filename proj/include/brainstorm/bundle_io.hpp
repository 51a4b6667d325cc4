#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <string_view>

#include "json.hpp"

#include "brainstorm/pipeline.hpp"

namespace brainstorm {

// Writes content to path via a temporary sibling and an atomic rename, so a
// failure never leaves a partial file behind.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot open '" + tmp.string() + "' for writing");
        out.write(content.data(), std::streamsize(content.size()));
        if (!out) {
            out.close();
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            throw DataError("failed writing '" + tmp.string() + "'");
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw DataError("cannot move output into place at '" + path.string() + "'");
    }
}

namespace bundle_json {

using nlohmann::json;

inline json to_json(const RepresentationSpec& spec) {
    return {{"kind", rep_kind_name(spec.kind)},
            {"subset_fraction", spec.subset_fraction},
            {"seed", spec.seed}};
}

inline RepresentationSpec representation_spec_from(const json& j) {
    RepresentationSpec spec;
    spec.kind = rep_kind_from_name(j.at("kind").get<std::string>());
    spec.subset_fraction = j.at("subset_fraction").get<double>();
    spec.seed = j.at("seed").get<std::uint64_t>();
    return spec;
}

inline json to_json(const FittedRepresentation& fitted) {
    json j{{"spec", to_json(fitted.spec)},
           {"input_dimensionality", fitted.input_dimensionality}};
    switch (fitted.spec.kind) {
        case RepKind::identity:
            break;
        case RepKind::zscore:
            j["means"] = fitted.means;
            j["deviations"] = fitted.deviations;
            break;
        case RepKind::minmax:
            j["minima"] = fitted.minima;
            j["maxima"] = fitted.maxima;
            break;
        case RepKind::binarize_at_median:
            j["medians"] = fitted.medians;
            break;
        case RepKind::rank_transform:
            j["sorted_values"] = fitted.sorted_values;
            break;
        case RepKind::feature_subset:
            j["retained"] = fitted.retained;
            break;
    }
    return j;
}

inline FittedRepresentation fitted_representation_from(const json& j) {
    FittedRepresentation fitted;
    fitted.spec = representation_spec_from(j.at("spec"));
    fitted.input_dimensionality = j.at("input_dimensionality").get<std::size_t>();
    switch (fitted.spec.kind) {
        case RepKind::identity:
            break;
        case RepKind::zscore:
            fitted.means = j.at("means").get<std::vector<double>>();
            fitted.deviations = j.at("deviations").get<std::vector<double>>();
            break;
        case RepKind::minmax:
            fitted.minima = j.at("minima").get<std::vector<double>>();
            fitted.maxima = j.at("maxima").get<std::vector<double>>();
            break;
        case RepKind::binarize_at_median:
            fitted.medians = j.at("medians").get<std::vector<double>>();
            break;
        case RepKind::rank_transform:
            fitted.sorted_values = j.at("sorted_values").get<std::vector<std::vector<double>>>();
            break;
        case RepKind::feature_subset:
            fitted.retained = j.at("retained").get<std::vector<std::size_t>>();
            break;
    }
    return fitted;
}

inline json to_json(const LearnerSpec& spec) {
    return {{"kind", learner_kind_name(spec.kind)},
            {"max_depth", spec.max_depth},
            {"neighbors", spec.neighbors},
            {"epochs", spec.epochs},
            {"learning_rate", spec.learning_rate},
            {"trees", spec.trees},
            {"subsample", spec.subsample},
            {"seed", spec.seed}};
}

inline LearnerSpec learner_spec_from(const json& j) {
    LearnerSpec spec;
    spec.kind = learner_kind_from_name(j.at("kind").get<std::string>());
    spec.max_depth = j.at("max_depth").get<int>();
    spec.neighbors = j.at("neighbors").get<int>();
    spec.epochs = j.at("epochs").get<int>();
    spec.learning_rate = j.at("learning_rate").get<double>();
    spec.trees = j.at("trees").get<int>();
    spec.subsample = j.at("subsample").get<double>();
    spec.seed = j.at("seed").get<std::uint64_t>();
    return spec;
}

inline json to_json(const TreeState& tree) {
    json nodes = json::array();
    for (const TreeNode& n : tree.nodes) {
        nodes.push_back({{"leaf", n.leaf},
                         {"feature", n.feature},
                         {"threshold", n.threshold},
                         {"left", n.left},
                         {"right", n.right},
                         {"label", n.label}});
    }
    return {{"nodes", nodes}};
}

inline TreeState tree_state_from(const json& j) {
    TreeState tree;
    for (const json& nj : j.at("nodes")) {
        TreeNode n;
        n.leaf = nj.at("leaf").get<bool>();
        n.feature = nj.at("feature").get<std::size_t>();
        n.threshold = nj.at("threshold").get<double>();
        n.left = nj.at("left").get<std::int32_t>();
        n.right = nj.at("right").get<std::int32_t>();
        n.label = nj.at("label").get<int>();
        tree.nodes.push_back(n);
    }
    return tree;
}

inline json state_to_json(const TrainedLearner& learner) {
    json j;
    if (const auto* tree = std::get_if<TreeState>(&learner.state)) {
        j = to_json(*tree);
        j["model"] = "decision_tree";
    } else if (const auto* forest = std::get_if<ForestState>(&learner.state)) {
        json trees = json::array();
        for (const TreeState& t : forest->trees) trees.push_back(to_json(t));
        j = {{"model", "random_forest"}, {"trees", trees}};
    } else if (const auto* knn = std::get_if<KnnState>(&learner.state)) {
        j = {{"model", "knn"}, {"points", knn->points}, {"labels", knn->labels}};
    } else if (const auto* nb = std::get_if<BayesState>(&learner.state)) {
        j = {{"model", "naive_bayes"},
             {"log_prior_pos", nb->log_prior_pos},
             {"log_prior_neg", nb->log_prior_neg},
             {"mean_pos", nb->mean_pos},
             {"var_pos", nb->var_pos},
             {"mean_neg", nb->mean_neg},
             {"var_neg", nb->var_neg}};
    } else if (const auto* sgd = std::get_if<SgdState>(&learner.state)) {
        j = {{"model", "linear_sgd"}, {"weights", sgd->weights}, {"bias", sgd->bias}};
    } else {
        const auto& centroids = std::get<CentroidState>(learner.state);
        j = {{"model", "trend_vector"},
             {"positive", centroids.positive},
             {"negative", centroids.negative}};
    }
    return j;
}

inline void state_from_json(const json& j, TrainedLearner& learner) {
    const std::string model = j.at("model").get<std::string>();
    if (model == "decision_tree") {
        learner.state = tree_state_from(j);
    } else if (model == "random_forest") {
        ForestState forest;
        for (const json& t : j.at("trees")) forest.trees.push_back(tree_state_from(t));
        learner.state = std::move(forest);
    } else if (model == "knn") {
        KnnState knn;
        knn.points = j.at("points").get<std::vector<std::vector<double>>>();
        knn.labels = j.at("labels").get<std::vector<int>>();
        learner.state = std::move(knn);
    } else if (model == "naive_bayes") {
        BayesState nb;
        nb.log_prior_pos = j.at("log_prior_pos").get<double>();
        nb.log_prior_neg = j.at("log_prior_neg").get<double>();
        nb.mean_pos = j.at("mean_pos").get<std::vector<double>>();
        nb.var_pos = j.at("var_pos").get<std::vector<double>>();
        nb.mean_neg = j.at("mean_neg").get<std::vector<double>>();
        nb.var_neg = j.at("var_neg").get<std::vector<double>>();
        learner.state = std::move(nb);
    } else if (model == "linear_sgd") {
        SgdState sgd;
        sgd.weights = j.at("weights").get<std::vector<double>>();
        sgd.bias = j.at("bias").get<double>();
        learner.state = std::move(sgd);
    } else if (model == "trend_vector") {
        CentroidState centroids;
        centroids.positive = j.at("positive").get<std::vector<double>>();
        centroids.negative = j.at("negative").get<std::vector<double>>();
        learner.state = std::move(centroids);
    } else {
        throw DataError("unknown learner state model '" + model + "'");
    }
}

inline json to_json(const NoiseSpec& noise) {
    json j{{"mode", noise_mode_name(noise.mode)},
           {"distribution", noise_distribution_name(noise.distribution)},
           {"boltzmann_k", noise.boltzmann_k},
           {"scaling", noise_scaling_name(noise.scaling)},
           {"seed", noise.seed}};
    // +infinity is a legal temperature but not a legal JSON number
    if (std::isfinite(noise.temperature)) {
        j["temperature"] = noise.temperature;
    } else {
        j["temperature"] = "inf";
    }
    return j;
}

inline NoiseSpec noise_spec_from(const json& j) {
    NoiseSpec noise;
    noise.mode = noise_mode_from_name(j.at("mode").get<std::string>());
    noise.distribution = noise_distribution_from_name(j.at("distribution").get<std::string>());
    noise.boltzmann_k = j.at("boltzmann_k").get<double>();
    noise.scaling = noise_scaling_from_name(j.at("scaling").get<std::string>());
    noise.seed = j.at("seed").get<std::uint64_t>();
    const json& t = j.at("temperature");
    noise.temperature =
        t.is_string() ? std::numeric_limits<double>::infinity() : t.get<double>();
    return noise;
}

inline json to_json(const ConsensusConfig& config) {
    return {{"coupling_precision", config.coupling_precision},
            {"coupling_recall", config.coupling_recall},
            {"strength_scaling", strength_scaling_name(config.strength_scaling)},
            {"noise", to_json(config.noise)}};
}

inline ConsensusConfig consensus_config_from(const json& j) {
    ConsensusConfig config;
    config.coupling_precision = j.at("coupling_precision").get<double>();
    config.coupling_recall = j.at("coupling_recall").get<double>();
    config.strength_scaling =
        strength_scaling_from_name(j.at("strength_scaling").get<std::string>());
    config.noise = noise_spec_from(j.at("noise"));
    return config;
}

inline json to_json(const PipelineConfig& config) {
    json pool = json::array();
    for (RepKind k : config.representation_pool) pool.push_back(rep_kind_name(k));
    json roster = json::array();
    for (const LearnerSpec& spec : config.roster) roster.push_back(to_json(spec));
    return {{"representation_count", config.representation_count},
            {"representation_pool", pool},
            {"roster", roster},
            {"folds", config.folds},
            {"smoothing", config.smoothing},
            {"force_recall_equals_precision", config.force_recall_equals_precision},
            {"average_profiles_per_kind", config.average_profiles_per_kind},
            {"consensus", to_json(config.consensus)},
            {"seed", config.seed}};
}

inline PipelineConfig pipeline_config_from(const json& j) {
    PipelineConfig config;
    config.representation_count = j.at("representation_count").get<std::size_t>();
    config.representation_pool.clear();
    for (const json& k : j.at("representation_pool")) {
        config.representation_pool.push_back(rep_kind_from_name(k.get<std::string>()));
    }
    config.roster.clear();
    for (const json& spec : j.at("roster")) config.roster.push_back(learner_spec_from(spec));
    config.folds = j.at("folds").get<std::size_t>();
    config.smoothing = j.at("smoothing").get<double>();
    config.force_recall_equals_precision = j.at("force_recall_equals_precision").get<bool>();
    config.average_profiles_per_kind = j.at("average_profiles_per_kind").get<bool>();
    config.consensus = consensus_config_from(j.at("consensus"));
    config.seed = j.at("seed").get<std::uint64_t>();
    return config;
}

inline json payload_to_json(const ModelBundle& bundle) {
    json representations = json::array();
    for (const FittedRepresentation& rep : bundle.representations) {
        representations.push_back(to_json(rep));
    }
    json agents = json::array();
    for (const AgentRecord& agent : bundle.agents) {
        agents.push_back({{"representation", agent.representation_index},
                          {"spec", to_json(agent.learner.spec)},
                          {"dimensionality", agent.learner.dimensionality},
                          {"state", state_to_json(agent.learner)},
                          {"profile",
                           {{"precision", agent.profile.precision},
                            {"recall", agent.profile.recall}}}});
    }
    return {{"seed", bundle.seed},
            {"config", to_json(bundle.config)},
            {"config_digest", bundle.config_digest},
            {"feature_names", bundle.feature_names},
            {"dimensionality", bundle.dimensionality},
            {"representations", representations},
            {"agents", agents}};
}

inline ModelBundle bundle_from_payload(const json& payload) {
    ModelBundle bundle;
    bundle.seed = payload.at("seed").get<std::uint64_t>();
    bundle.config = pipeline_config_from(payload.at("config"));
    bundle.config_digest = payload.at("config_digest").get<std::string>();
    bundle.feature_names = payload.at("feature_names").get<std::vector<std::string>>();
    bundle.dimensionality = payload.at("dimensionality").get<std::size_t>();
    for (const json& rep : payload.at("representations")) {
        bundle.representations.push_back(fitted_representation_from(rep));
    }
    for (const json& aj : payload.at("agents")) {
        AgentRecord agent;
        agent.representation_index = aj.at("representation").get<std::size_t>();
        agent.learner.spec = learner_spec_from(aj.at("spec"));
        agent.learner.dimensionality = aj.at("dimensionality").get<std::size_t>();
        state_from_json(aj.at("state"), agent.learner);
        agent.profile.precision = aj.at("profile").at("precision").get<double>();
        agent.profile.recall = aj.at("profile").at("recall").get<double>();
        bundle.agents.push_back(std::move(agent));
    }
    return bundle;
}

}  // namespace bundle_json

// Self-describing document: format tag, version, payload, and a digest of
// the payload's canonical serialization.
inline std::string bundle_to_text(const ModelBundle& bundle) {
    nlohmann::json doc;
    doc["format"] = "brainstorm.bundle";
    doc["version"] = ModelBundle::format_version;
    nlohmann::json payload = bundle_json::payload_to_json(bundle);
    doc["digest"] = detail::fnv1a64_hex(payload.dump());
    doc["payload"] = std::move(payload);
    return doc.dump(2) + "\n";
}

inline ModelBundle bundle_from_text(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("corrupted bundle: ") + e.what());
    }
    try {
        if (!doc.is_object() || doc.value("format", "") != "brainstorm.bundle") {
            throw DataError("not a model bundle (missing format tag)");
        }
        const int version = doc.at("version").get<int>();
        if (version != ModelBundle::format_version) {
            throw DataError("unsupported bundle format version " + std::to_string(version) +
                            " (this build reads version " +
                            std::to_string(ModelBundle::format_version) + ")");
        }
        const std::string stored_digest = doc.at("digest").get<std::string>();
        const nlohmann::json& payload = doc.at("payload");
        if (detail::fnv1a64_hex(payload.dump()) != stored_digest) {
            throw DataError("corrupted bundle: digest mismatch");
        }
        return bundle_json::bundle_from_payload(payload);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("corrupted bundle: ") + e.what());
    }
}

inline void save_bundle(const ModelBundle& bundle, const std::filesystem::path& path) {
    write_file_atomic(path, bundle_to_text(bundle));
}

inline ModelBundle load_bundle(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open bundle file '" + path.string() + "'");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return bundle_from_text(text);
}

}  // namespace brainstorm
