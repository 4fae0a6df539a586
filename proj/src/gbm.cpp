#include "shaml/gbm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "shaml/errors.hpp"

namespace shaml {

namespace {

constexpr double kLambda = 1e-6;  // hessian regularizer in leaf values and gains

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

std::vector<double> quantile_uppers(std::vector<double> values, int n_bins) {
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    std::vector<double> uppers;
    if (n == 0) return uppers;
    std::vector<double> distinct;
    for (double v : values)
        if (distinct.empty() || v != distinct.back()) distinct.push_back(v);
    if (distinct.size() <= static_cast<std::size_t>(n_bins)) return distinct;
    for (int b = 1; b <= n_bins; ++b) {
        const std::size_t pos =
            std::min(n - 1, static_cast<std::size_t>(static_cast<double>(b) *
                                                     static_cast<double>(n) / n_bins) -
                                1);
        const double v = values[pos];
        if (uppers.empty() || v != uppers.back()) uppers.push_back(v);
    }
    if (uppers.back() != values.back()) uppers.push_back(values.back());
    return uppers;
}

struct GrowNode {
    std::vector<std::uint32_t> rows;
    double sum_g = 0.0;
    double sum_h = 0.0;
    int tree_node = -1;
    // best candidate split
    double best_gain = 0.0;
    int best_feature = -1;
    int best_bin = -1;
    bool evaluated = false;
};

}  // namespace

int GbmModel::bin_index(std::size_t feature, double value) const {
    const auto& ups = bin_upper[feature];
    const auto it = std::lower_bound(ups.begin(), ups.end(), value);
    if (it == ups.end()) return static_cast<int>(ups.size()) - 1;
    return static_cast<int>(it - ups.begin());
}

std::vector<double> GbmModel::predict_raw(const Matrix& x) const {
    if (!trees.empty() || !bin_upper.empty()) {
        if (x.cols() != bin_upper.size())
            throw DimensionMismatch("gbm predict: feature count " + std::to_string(x.cols()) +
                                    " != " + std::to_string(bin_upper.size()));
    }
    std::vector<double> score(x.rows(), base_score);
    for (const auto& tree : trees) {
        for (std::size_t i = 0; i < x.rows(); ++i) {
            int node = 0;
            while (!tree.nodes[static_cast<std::size_t>(node)].is_leaf) {
                const auto& nd = tree.nodes[static_cast<std::size_t>(node)];
                node = x(i, static_cast<std::size_t>(nd.feature)) <= nd.threshold_value
                           ? nd.left
                           : nd.right;
            }
            score[i] += config.shrinkage * tree.nodes[static_cast<std::size_t>(node)].leaf_value;
        }
    }
    return score;
}

std::vector<double> GbmModel::predict_proba(const Matrix& x) const {
    auto s = predict_raw(x);
    for (double& v : s) v = sigmoid(v);
    return s;
}

std::vector<double> GbmModel::predict(const Matrix& x) const {
    if (loss == GbmLoss::squared) return predict_raw(x);
    auto p = predict_proba(x);
    for (double& v : p) v = v >= 0.5 ? 1.0 : 0.0;
    return p;
}

std::vector<std::pair<std::string, double>> GbmModel::feature_importance() const {
    std::vector<double> gain(bin_upper.size(), 0.0);
    for (const auto& tree : trees)
        for (const auto& nd : tree.nodes)
            if (!nd.is_leaf) gain[static_cast<std::size_t>(nd.feature)] += nd.gain;
    std::vector<std::pair<std::string, double>> out;
    for (std::size_t j = 0; j < gain.size(); ++j) {
        const std::string name =
            j < feature_names.size() ? feature_names[j] : "f" + std::to_string(j);
        out.emplace_back(name, gain[j]);
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    return out;
}

GbmModel gbm_fit(const FeatureMatrix& m, const GbmConfig& cfg) {
    const std::size_t n = m.x.rows();
    const std::size_t d = m.x.cols();
    if (n < 2) throw Degenerate("gbm_fit: need at least 2 rows");

    GbmModel model;
    model.config = cfg;
    model.loss = cfg.loss;
    model.feature_names = m.feature_names;

    if (cfg.loss == GbmLoss::logistic) {
        double pos = 0.0;
        for (double v : m.y) {
            if (v != 0.0 && v != 1.0) throw Degenerate("gbm_fit: classify needs 0/1 targets");
            pos += v;
        }
        if (pos == 0.0 || pos == static_cast<double>(n))
            throw Degenerate("gbm_fit: single-class target");
        const double p = pos / static_cast<double>(n);
        model.base_score = std::log(p / (1.0 - p));
    } else {
        double mean = 0.0;
        for (double v : m.y) mean += v;
        model.base_score = mean / static_cast<double>(n);
        bool constant = true;
        for (double v : m.y)
            if (v != m.y[0]) {
                constant = false;
                break;
            }
        if (constant) {
            model.base_score = m.y[0];
            model.degenerate = true;
            model.bin_upper.assign(d, {});
            return model;
        }
    }

    // quantile bins on the training features; thresholds at observed values
    model.bin_upper.resize(d);
    std::vector<std::vector<std::uint16_t>> bins(d, std::vector<std::uint16_t>(n));
    std::size_t max_bins = 0;
    for (std::size_t j = 0; j < d; ++j) {
        model.bin_upper[j] = quantile_uppers(m.x.column(j), cfg.n_bins);
        max_bins = std::max(max_bins, model.bin_upper[j].size());
        for (std::size_t i = 0; i < n; ++i)
            bins[j][i] = static_cast<std::uint16_t>(model.bin_index(j, m.x(i, j)));
    }

    std::vector<double> score(n, model.base_score);
    std::vector<double> g(n), h(n);

    auto compute_gradients = [&]() {
        double loss_sum = 0.0;
        if (cfg.loss == GbmLoss::logistic) {
            for (std::size_t i = 0; i < n; ++i) {
                const double p = sigmoid(score[i]);
                g[i] = p - m.y[i];
                h[i] = std::max(1e-16, p * (1.0 - p));
                loss_sum += -(m.y[i] * std::log(std::max(1e-300, p)) +
                              (1.0 - m.y[i]) * std::log(std::max(1e-300, 1.0 - p)));
            }
        } else {
            for (std::size_t i = 0; i < n; ++i) {
                const double r = score[i] - m.y[i];
                g[i] = r;
                h[i] = 1.0;
                loss_sum += 0.5 * r * r;
            }
        }
        return loss_sum / static_cast<double>(n);
    };

    std::vector<double> hist_g(max_bins), hist_h(max_bins);
    std::vector<std::uint32_t> hist_c(max_bins);

    auto evaluate_node = [&](GrowNode& node) {
        node.evaluated = true;
        node.best_gain = 0.0;
        node.best_feature = -1;
        const double parent_obj =
            node.sum_g * node.sum_g / (node.sum_h + kLambda);
        for (std::size_t j = 0; j < d; ++j) {
            const std::size_t nb = model.bin_upper[j].size();
            if (nb < 2) continue;
            std::fill(hist_g.begin(), hist_g.begin() + static_cast<std::ptrdiff_t>(nb), 0.0);
            std::fill(hist_h.begin(), hist_h.begin() + static_cast<std::ptrdiff_t>(nb), 0.0);
            std::fill(hist_c.begin(), hist_c.begin() + static_cast<std::ptrdiff_t>(nb), 0u);
            for (std::uint32_t r : node.rows) {
                const std::uint16_t b = bins[j][r];
                hist_g[b] += g[r];
                hist_h[b] += h[r];
                ++hist_c[b];
            }
            double gl = 0.0, hl = 0.0;
            std::uint32_t cl = 0;
            for (std::size_t b = 0; b + 1 < nb; ++b) {
                gl += hist_g[b];
                hl += hist_h[b];
                cl += hist_c[b];
                const std::uint32_t cr = static_cast<std::uint32_t>(node.rows.size()) - cl;
                if (cl < static_cast<std::uint32_t>(cfg.min_samples_leaf)) continue;
                if (cr < static_cast<std::uint32_t>(cfg.min_samples_leaf)) break;
                const double gr = node.sum_g - gl;
                const double hr = node.sum_h - hl;
                const double gain = 0.5 * (gl * gl / (hl + kLambda) + gr * gr / (hr + kLambda) -
                                           parent_obj);
                if (gain > node.best_gain) {
                    node.best_gain = gain;
                    node.best_feature = static_cast<int>(j);
                    node.best_bin = static_cast<int>(b);
                }
            }
        }
    };

    for (int round = 0; round < cfg.n_trees; ++round) {
        model.training_loss.push_back(compute_gradients());

        GbmTree tree;
        std::vector<GrowNode> grow;
        {
            GrowNode root;
            root.rows.resize(n);
            std::iota(root.rows.begin(), root.rows.end(), 0u);
            for (std::size_t i = 0; i < n; ++i) {
                root.sum_g += g[i];
                root.sum_h += h[i];
            }
            root.tree_node = 0;
            tree.nodes.emplace_back();
            grow.push_back(std::move(root));
        }

        int leaves = 1;
        while (leaves < cfg.max_leaves) {
            int best = -1;
            for (std::size_t k = 0; k < grow.size(); ++k) {
                if (grow[k].tree_node < 0) continue;  // already split
                if (!grow[k].evaluated) evaluate_node(grow[k]);
                if (grow[k].best_feature >= 0 &&
                    (best < 0 || grow[k].best_gain > grow[static_cast<std::size_t>(best)].best_gain))
                    best = static_cast<int>(k);
            }
            if (best < 0) break;

            GrowNode& node = grow[static_cast<std::size_t>(best)];
            const auto j = static_cast<std::size_t>(node.best_feature);
            GrowNode left, right;
            for (std::uint32_t r : node.rows) {
                if (bins[j][r] <= node.best_bin) {
                    left.rows.push_back(r);
                    left.sum_g += g[r];
                    left.sum_h += h[r];
                } else {
                    right.rows.push_back(r);
                    right.sum_g += g[r];
                    right.sum_h += h[r];
                }
            }

            auto& tn = tree.nodes[static_cast<std::size_t>(node.tree_node)];
            tn.is_leaf = false;
            tn.feature = node.best_feature;
            tn.bin = node.best_bin;
            tn.threshold_value = model.bin_upper[j][static_cast<std::size_t>(node.best_bin)];
            tn.gain = node.best_gain;
            tn.left = static_cast<int>(tree.nodes.size());
            tn.right = tn.left + 1;
            left.tree_node = tn.left;
            right.tree_node = tn.right;
            tree.nodes.emplace_back();
            tree.nodes.emplace_back();

            node.tree_node = -1;
            node.rows.clear();
            node.rows.shrink_to_fit();
            grow.push_back(std::move(left));
            grow.push_back(std::move(right));
            ++leaves;
        }

        // Newton leaf values, then update scores
        for (const auto& gn : grow) {
            if (gn.tree_node < 0) continue;
            const double leaf = -gn.sum_g / (gn.sum_h + kLambda);
            tree.nodes[static_cast<std::size_t>(gn.tree_node)].leaf_value = leaf;
            for (std::uint32_t r : gn.rows) score[r] += cfg.shrinkage * leaf;
        }
        model.trees.push_back(std::move(tree));
    }
    return model;
}

}  // namespace shaml
