#include "shaml/logistic.hpp"

#include <cmath>

#include "shaml/adam.hpp"
#include "shaml/errors.hpp"

namespace shaml {

namespace {
double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }
}  // namespace

std::vector<double> LogisticModel::predict_proba(const Matrix& x) const {
    if (x.cols() != weights.size()) throw DimensionMismatch("logistic predict_proba");
    std::vector<double> p(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) {
        double z = bias;
        for (std::size_t j = 0; j < x.cols(); ++j) z += weights[j] * x(i, j);
        p[i] = sigmoid(z);
    }
    return p;
}

std::vector<double> LogisticModel::predict(const Matrix& x) const {
    auto p = predict_proba(x);
    for (double& v : p) v = v >= 0.5 ? 1.0 : 0.0;
    return p;
}

LogisticModel logistic_fit(const FeatureMatrix& m, const LogisticConfig& cfg) {
    const std::size_t n = m.x.rows();
    const std::size_t d = m.x.cols();
    if (n == 0) throw Empty("logistic_fit: empty matrix");

    bool saw0 = false, saw1 = false;
    for (double v : m.y) {
        if (v == 0.0)
            saw0 = true;
        else if (v == 1.0)
            saw1 = true;
        else
            throw Degenerate("logistic_fit: targets must be 0/1");
    }
    if (!saw0 || !saw1) throw Degenerate("logistic_fit: single-class target");

    LogisticModel model;
    model.train_config = cfg;
    model.weights.assign(d, 0.0);
    model.bias = 0.0;

    // flat parameter vector: [weights..., bias]
    std::vector<double> params(d + 1, 0.0);
    std::vector<double> grads(d + 1, 0.0);
    AdamState state(d + 1);

    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        std::fill(grads.begin(), grads.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            double z = params[d];
            for (std::size_t j = 0; j < d; ++j) z += params[j] * m.x(i, j);
            const double err = sigmoid(z) - m.y[i];
            for (std::size_t j = 0; j < d; ++j) grads[j] += err * m.x(i, j);
            grads[d] += err;
        }
        for (double& g : grads) g /= static_cast<double>(n);

        double gnorm = 0.0;
        for (double g : grads) gnorm += g * g;
        if (std::sqrt(gnorm) < cfg.tolerance) break;

        adam_step(params, grads, state, epoch, cfg.learning_rate);
    }

    model.weights.assign(params.begin(), params.begin() + static_cast<std::ptrdiff_t>(d));
    model.bias = params[d];
    return model;
}

}  // namespace shaml
