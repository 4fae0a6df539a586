#pragma once

#include <cstdint>
#include <vector>

#include "shaml/featureng.hpp"
#include "shaml/matrix.hpp"

namespace shaml {

struct MlpConfig {
    std::vector<std::size_t> hidden{128, 64, 32};
    double dropout = 0.3;
    double learning_rate = 0.001;
    int epochs = 100;
    std::size_t batch_size = 128;
    std::uint64_t seed = 0;
};

// Feed-forward classifier: ReLU hidden layers, 2-logit softmax head,
// cross-entropy loss, minibatch Adam, inverted dropout in training mode only.
// Parameters live in one flat vector (weights then bias per layer).
class MlpModel {
public:
    MlpModel() = default;
    MlpModel(std::size_t input_dim, const MlpConfig& cfg);

    const std::vector<std::size_t>& layer_sizes() const { return layer_sizes_; }
    std::vector<double>& params() { return params_; }
    const std::vector<double>& params() const { return params_; }
    const MlpConfig& config() const { return config_; }

    // eval-mode forward pass (deterministic, no dropout)
    void forward_logits(const double* row, std::vector<double>& logits_out) const;
    std::vector<double> predict(const Matrix& x) const;
    std::vector<double> predict_proba(const Matrix& x) const;  // P(class 1)

    // mean cross-entropy and gradient over a batch; dropout_seed != 0 enables
    // training-mode dropout with a stream derived from it
    double loss_and_gradient(const Matrix& x, const std::vector<double>& y,
                             const std::vector<std::size_t>& rows,
                             std::vector<double>& grad_out,
                             std::uint64_t dropout_seed = 0) const;

    static MlpModel from_parts(std::vector<std::size_t> layer_sizes,
                               std::vector<double> params, MlpConfig cfg);

private:
    std::vector<std::size_t> layer_sizes_;  // input, hidden..., 2
    std::vector<double> params_;
    MlpConfig config_;

    std::size_t weight_offset(std::size_t layer) const;
    std::size_t bias_offset(std::size_t layer) const;
    friend double mlp_gradcheck_impl(const MlpModel&, const Matrix&, const std::vector<double>&,
                                     std::uint64_t, std::size_t, double);
};

struct MlpFitResult {
    MlpModel model;  // the weights achieving the best test accuracy
    double best_test_accuracy = 0.0;
    double final_test_accuracy = 0.0;
    std::vector<double> test_accuracy_history;  // one entry per epoch
};

MlpFitResult mlp_fit(const FeatureMatrix& train, const FeatureMatrix& test,
                     const MlpConfig& cfg);

// Max relative error between analytic and central-difference gradients
// (h = 1e-5) over >= n_params seeded parameter indices, dropout disabled.
// corruption is a test hook added to the analytic gradient before comparing.
double mlp_gradcheck(const MlpModel& model, const FeatureMatrix& batch, std::uint64_t seed,
                     std::size_t n_params = 200, double corruption = 0.0);

}  // namespace shaml
