#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "shaml/featureng.hpp"
#include "shaml/matrix.hpp"

namespace shaml {

enum class GbmLoss { logistic, squared };

struct GbmConfig {
    int n_bins = 255;
    int n_trees = 100;
    double shrinkage = 0.1;
    int max_leaves = 31;
    int min_samples_leaf = 20;
    GbmLoss loss = GbmLoss::logistic;
    std::uint64_t seed = 0;  // carried in manifests; training itself is deterministic
};

struct GbmNode {
    bool is_leaf = true;
    int feature = -1;
    int bin = -1;                  // split: go left when bin(x) <= bin
    double threshold_value = 0.0;  // upper edge value of that bin (raw scale)
    int left = -1;
    int right = -1;
    double leaf_value = 0.0;
    double gain = 0.0;  // loss reduction of the split
};

struct GbmTree {
    std::vector<GbmNode> nodes;  // node 0 is the root
};

// Histogram-based gradient boosting: quantile bins fitted on the training
// features (thresholds sit exactly at observed values, so any strictly
// increasing per-feature transform leaves bin assignments and trees
// unchanged), leaf-wise growth, Newton leaf values.
struct GbmModel {
    GbmConfig config;
    GbmLoss loss = GbmLoss::logistic;
    double base_score = 0.0;
    bool degenerate = false;  // constant regression target: base_score only
    std::vector<std::vector<double>> bin_upper;  // per feature, ascending
    std::vector<GbmTree> trees;
    std::vector<std::string> feature_names;
    std::vector<double> training_loss;  // per boosting round

    std::vector<double> predict_raw(const Matrix& x) const;
    // regression: raw score; classification: 0/1 labels
    std::vector<double> predict(const Matrix& x) const;
    std::vector<double> predict_proba(const Matrix& x) const;

    // total split gain per feature, sorted descending
    std::vector<std::pair<std::string, double>> feature_importance() const;

    int bin_index(std::size_t feature, double value) const;
};

GbmModel gbm_fit(const FeatureMatrix& m, const GbmConfig& cfg);

}  // namespace shaml
