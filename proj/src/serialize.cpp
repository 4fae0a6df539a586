#include "shaml/serialize.hpp"

#include <fstream>

#include "shaml/errors.hpp"

namespace shaml {

namespace {

void check_version(const nlohmann::json& j, const char* kind) {
    if (j.value("format_version", -1) != kModelFormatVersion)
        throw ConfigError(std::string(kind) + ": unsupported model format version");
    if (j.value("kind", "") != kind)
        throw ConfigError(std::string("expected model kind '") + kind + "'");
}

}  // namespace

nlohmann::json to_json(const LogisticModel& m) {
    nlohmann::json j;
    j["format_version"] = kModelFormatVersion;
    j["kind"] = "logistic";
    j["weights"] = m.weights;
    j["bias"] = m.bias;
    j["config"] = {{"learning_rate", m.train_config.learning_rate},
                   {"max_epochs", m.train_config.max_epochs},
                   {"tolerance", m.train_config.tolerance},
                   {"seed", m.train_config.seed}};
    return j;
}

LogisticModel logistic_from_json(const nlohmann::json& j) {
    check_version(j, "logistic");
    LogisticModel m;
    m.weights = j.at("weights").get<std::vector<double>>();
    m.bias = j.at("bias").get<double>();
    const auto& c = j.at("config");
    m.train_config.learning_rate = c.at("learning_rate").get<double>();
    m.train_config.max_epochs = c.at("max_epochs").get<int>();
    m.train_config.tolerance = c.at("tolerance").get<double>();
    m.train_config.seed = c.at("seed").get<std::uint64_t>();
    return m;
}

nlohmann::json to_json(const MlpModel& m) {
    nlohmann::json j;
    j["format_version"] = kModelFormatVersion;
    j["kind"] = "mlp";
    j["layer_sizes"] = m.layer_sizes();
    j["params"] = m.params();
    const auto& c = m.config();
    j["config"] = {{"hidden", c.hidden},     {"dropout", c.dropout},
                   {"learning_rate", c.learning_rate}, {"epochs", c.epochs},
                   {"batch_size", c.batch_size},       {"seed", c.seed}};
    return j;
}

MlpModel mlp_from_json(const nlohmann::json& j) {
    check_version(j, "mlp");
    MlpConfig cfg;
    const auto& c = j.at("config");
    cfg.hidden = c.at("hidden").get<std::vector<std::size_t>>();
    cfg.dropout = c.at("dropout").get<double>();
    cfg.learning_rate = c.at("learning_rate").get<double>();
    cfg.epochs = c.at("epochs").get<int>();
    cfg.batch_size = c.at("batch_size").get<std::size_t>();
    cfg.seed = c.at("seed").get<std::uint64_t>();
    return MlpModel::from_parts(j.at("layer_sizes").get<std::vector<std::size_t>>(),
                                j.at("params").get<std::vector<double>>(), cfg);
}

nlohmann::json to_json(const GbmModel& m) {
    nlohmann::json j;
    j["format_version"] = kModelFormatVersion;
    j["kind"] = "gbm";
    j["loss"] = m.loss == GbmLoss::logistic ? "logistic" : "squared";
    j["base_score"] = m.base_score;
    j["degenerate"] = m.degenerate;
    j["bin_upper"] = m.bin_upper;
    j["feature_names"] = m.feature_names;
    j["config"] = {{"n_bins", m.config.n_bins},
                   {"n_trees", m.config.n_trees},
                   {"shrinkage", m.config.shrinkage},
                   {"max_leaves", m.config.max_leaves},
                   {"min_samples_leaf", m.config.min_samples_leaf},
                   {"seed", m.config.seed}};
    nlohmann::json trees = nlohmann::json::array();
    for (const auto& tree : m.trees) {
        nlohmann::json nodes = nlohmann::json::array();
        for (const auto& nd : tree.nodes) {
            nodes.push_back({{"is_leaf", nd.is_leaf},
                             {"feature", nd.feature},
                             {"bin", nd.bin},
                             {"threshold_value", nd.threshold_value},
                             {"left", nd.left},
                             {"right", nd.right},
                             {"leaf_value", nd.leaf_value},
                             {"gain", nd.gain}});
        }
        trees.push_back({{"nodes", nodes}});
    }
    j["trees"] = trees;
    return j;
}

GbmModel gbm_from_json(const nlohmann::json& j) {
    check_version(j, "gbm");
    GbmModel m;
    m.loss = j.at("loss").get<std::string>() == "logistic" ? GbmLoss::logistic : GbmLoss::squared;
    m.base_score = j.at("base_score").get<double>();
    m.degenerate = j.value("degenerate", false);
    m.bin_upper = j.at("bin_upper").get<std::vector<std::vector<double>>>();
    m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    const auto& c = j.at("config");
    m.config.n_bins = c.at("n_bins").get<int>();
    m.config.n_trees = c.at("n_trees").get<int>();
    m.config.shrinkage = c.at("shrinkage").get<double>();
    m.config.max_leaves = c.at("max_leaves").get<int>();
    m.config.min_samples_leaf = c.at("min_samples_leaf").get<int>();
    m.config.seed = c.at("seed").get<std::uint64_t>();
    m.config.loss = m.loss;
    for (const auto& jt : j.at("trees")) {
        GbmTree tree;
        for (const auto& jn : jt.at("nodes")) {
            GbmNode nd;
            nd.is_leaf = jn.at("is_leaf").get<bool>();
            nd.feature = jn.at("feature").get<int>();
            nd.bin = jn.at("bin").get<int>();
            nd.threshold_value = jn.at("threshold_value").get<double>();
            nd.left = jn.at("left").get<int>();
            nd.right = jn.at("right").get<int>();
            nd.leaf_value = jn.at("leaf_value").get<double>();
            nd.gain = jn.at("gain").get<double>();
            tree.nodes.push_back(nd);
        }
        m.trees.push_back(std::move(tree));
    }
    return m;
}

void save_model_json(const nlohmann::json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path);
    out << j.dump(2) << "\n";
}

nlohmann::json load_model_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read " + path);
    nlohmann::json j;
    in >> j;
    return j;
}

}  // namespace shaml
