#pragma once

#include <cstdint>
#include <vector>

#include "shaml/featureng.hpp"
#include "shaml/matrix.hpp"

namespace shaml {

struct LogisticConfig {
    double learning_rate = 0.01;
    int max_epochs = 2000;
    double tolerance = 1e-8;  // on the gradient norm
    std::uint64_t seed = 0;
};

struct LogisticModel {
    std::vector<double> weights;
    double bias = 0.0;
    LogisticConfig train_config;

    std::vector<double> predict_proba(const Matrix& x) const;
    std::vector<double> predict(const Matrix& x) const;
};

// Binary logistic regression, mean cross-entropy minimized by full-batch
// Adam. Throws Degenerate when the target has a single class.
LogisticModel logistic_fit(const FeatureMatrix& m, const LogisticConfig& cfg = {});

}  // namespace shaml
