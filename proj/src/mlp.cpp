#include "shaml/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "shaml/adam.hpp"
#include "shaml/errors.hpp"
#include "shaml/metrics.hpp"
#include "shaml/rng.hpp"

namespace shaml {

MlpModel::MlpModel(std::size_t input_dim, const MlpConfig& cfg) : config_(cfg) {
    layer_sizes_.push_back(input_dim);
    for (std::size_t h : cfg.hidden) layer_sizes_.push_back(h);
    layer_sizes_.push_back(2);

    std::size_t total = 0;
    for (std::size_t l = 0; l + 1 < layer_sizes_.size(); ++l)
        total += layer_sizes_[l] * layer_sizes_[l + 1] + layer_sizes_[l + 1];
    params_.assign(total, 0.0);

    Rng rng(cfg.seed);
    std::size_t off = 0;
    for (std::size_t l = 0; l + 1 < layer_sizes_.size(); ++l) {
        const double scale = 1.0 / std::sqrt(static_cast<double>(layer_sizes_[l]));
        const std::size_t nw = layer_sizes_[l] * layer_sizes_[l + 1];
        for (std::size_t k = 0; k < nw; ++k) params_[off + k] = rng.uniform(-scale, scale);
        off += nw + layer_sizes_[l + 1];  // biases stay 0
    }
}

std::size_t MlpModel::weight_offset(std::size_t layer) const {
    std::size_t off = 0;
    for (std::size_t l = 0; l < layer; ++l)
        off += layer_sizes_[l] * layer_sizes_[l + 1] + layer_sizes_[l + 1];
    return off;
}

std::size_t MlpModel::bias_offset(std::size_t layer) const {
    return weight_offset(layer) + layer_sizes_[layer] * layer_sizes_[layer + 1];
}

void MlpModel::forward_logits(const double* row, std::vector<double>& logits_out) const {
    std::vector<double> cur(row, row + layer_sizes_[0]);
    std::vector<double> next;
    for (std::size_t l = 0; l + 1 < layer_sizes_.size(); ++l) {
        const std::size_t in = layer_sizes_[l];
        const std::size_t out = layer_sizes_[l + 1];
        const double* w = params_.data() + weight_offset(l);
        const double* b = params_.data() + bias_offset(l);
        next.assign(out, 0.0);
        for (std::size_t o = 0; o < out; ++o) {
            double s = b[o];
            const double* wrow = w + o * in;
            for (std::size_t i = 0; i < in; ++i) s += wrow[i] * cur[i];
            next[o] = (l + 2 < layer_sizes_.size()) ? std::max(0.0, s) : s;
        }
        cur.swap(next);
    }
    logits_out = cur;
}

std::vector<double> MlpModel::predict_proba(const Matrix& x) const {
    if (x.cols() != layer_sizes_.front()) throw DimensionMismatch("mlp predict");
    std::vector<double> out(x.rows());
    std::vector<double> logits;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        forward_logits(x.data().data() + i * x.cols(), logits);
        const double m = std::max(logits[0], logits[1]);
        const double e0 = std::exp(logits[0] - m);
        const double e1 = std::exp(logits[1] - m);
        out[i] = e1 / (e0 + e1);
    }
    return out;
}

std::vector<double> MlpModel::predict(const Matrix& x) const {
    auto p = predict_proba(x);
    for (double& v : p) v = v >= 0.5 ? 1.0 : 0.0;
    return p;
}

double MlpModel::loss_and_gradient(const Matrix& x, const std::vector<double>& y,
                                   const std::vector<std::size_t>& rows,
                                   std::vector<double>& grad_out,
                                   std::uint64_t dropout_seed) const {
    const std::size_t layers = layer_sizes_.size() - 1;
    grad_out.assign(params_.size(), 0.0);

    const bool use_dropout = dropout_seed != 0 && config_.dropout > 0.0;
    Rng drop_rng(dropout_seed);
    const double keep = 1.0 - config_.dropout;

    double total_loss = 0.0;
    std::vector<std::vector<double>> act(layers + 1);
    std::vector<std::vector<double>> mask(layers);
    std::vector<std::vector<double>> delta(layers + 1);

    for (std::size_t r : rows) {
        act[0].assign(x.data().data() + r * x.cols(), x.data().data() + (r + 1) * x.cols());
        for (std::size_t l = 0; l < layers; ++l) {
            const std::size_t in = layer_sizes_[l];
            const std::size_t out = layer_sizes_[l + 1];
            const double* w = params_.data() + weight_offset(l);
            const double* b = params_.data() + bias_offset(l);
            act[l + 1].assign(out, 0.0);
            const bool hidden = l + 1 < layers;
            if (hidden) mask[l].assign(out, 1.0);
            for (std::size_t o = 0; o < out; ++o) {
                double s = b[o];
                const double* wrow = w + o * in;
                for (std::size_t i = 0; i < in; ++i) s += wrow[i] * act[l][i];
                if (hidden) {
                    s = std::max(0.0, s);
                    if (use_dropout) {
                        if (drop_rng.uniform() < config_.dropout) {
                            mask[l][o] = 0.0;
                            s = 0.0;
                        } else {
                            mask[l][o] = 1.0 / keep;
                            s /= keep;
                        }
                    }
                }
                act[l + 1][o] = s;
            }
        }

        // softmax cross-entropy on the 2 logits
        const auto& logits = act[layers];
        const double m = std::max(logits[0], logits[1]);
        const double e0 = std::exp(logits[0] - m);
        const double e1 = std::exp(logits[1] - m);
        const double z = e0 + e1;
        const double p1 = e1 / z;
        const int target = y[r] != 0.0 ? 1 : 0;
        total_loss += -std::log(std::max(1e-300, target == 1 ? p1 : 1.0 - p1));

        delta[layers] = {(1.0 - p1) - (target == 0 ? 1.0 : 0.0),
                         p1 - (target == 1 ? 1.0 : 0.0)};
        for (std::size_t l = layers; l-- > 0;) {
            const std::size_t in = layer_sizes_[l];
            const std::size_t out = layer_sizes_[l + 1];
            const double* w = params_.data() + weight_offset(l);
            double* gw = grad_out.data() + weight_offset(l);
            double* gb = grad_out.data() + bias_offset(l);
            delta[l].assign(in, 0.0);
            for (std::size_t o = 0; o < out; ++o) {
                const double d = delta[l + 1][o];
                if (d == 0.0) continue;
                gb[o] += d;
                const double* wrow = w + o * in;
                double* gwrow = gw + o * in;
                for (std::size_t i = 0; i < in; ++i) {
                    gwrow[i] += d * act[l][i];
                    delta[l][i] += d * wrow[i];
                }
            }
            if (l > 0) {
                // back through dropout and ReLU of layer l's output
                for (std::size_t i = 0; i < in; ++i) {
                    if (act[l][i] <= 0.0)
                        delta[l][i] = 0.0;  // inactive (or dropped) unit
                    else if (use_dropout)
                        delta[l][i] *= mask[l - 1][i];
                }
            }
        }
    }

    const double inv = 1.0 / static_cast<double>(rows.size());
    for (double& g : grad_out) g *= inv;
    return total_loss * inv;
}

MlpModel MlpModel::from_parts(std::vector<std::size_t> layer_sizes, std::vector<double> params,
                              MlpConfig cfg) {
    MlpModel m;
    m.layer_sizes_ = std::move(layer_sizes);
    m.params_ = std::move(params);
    m.config_ = std::move(cfg);
    std::size_t total = 0;
    for (std::size_t l = 0; l + 1 < m.layer_sizes_.size(); ++l)
        total += m.layer_sizes_[l] * m.layer_sizes_[l + 1] + m.layer_sizes_[l + 1];
    if (total != m.params_.size()) throw DimensionMismatch("mlp parameter count");
    return m;
}

MlpFitResult mlp_fit(const FeatureMatrix& train, const FeatureMatrix& test,
                     const MlpConfig& cfg) {
    if (cfg.epochs <= 0) throw DegenerateConfig("mlp_fit: epochs must be positive");
    if (cfg.batch_size == 0) throw DegenerateConfig("mlp_fit: batch size must be positive");
    const std::size_t n = train.x.rows();
    if (n == 0) throw Empty("mlp_fit: empty training set");
    for (double v : train.y)
        if (v != 0.0 && v != 1.0) throw Degenerate("mlp_fit: targets must be 0/1");

    MlpModel model(train.x.cols(), cfg);
    AdamState state(model.params().size());
    std::vector<double> grads;
    long t = 0;

    MlpFitResult result;
    result.best_test_accuracy = -1.0;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        Rng shuffle_rng(Rng::derive(cfg.seed, static_cast<std::uint64_t>(epoch)));
        shuffle_rng.shuffle(order);
        std::size_t batch_index = 0;
        for (std::size_t start = 0; start < n; start += cfg.batch_size, ++batch_index) {
            const std::size_t end = std::min(n, start + cfg.batch_size);
            const std::vector<std::size_t> rows(order.begin() + static_cast<std::ptrdiff_t>(start),
                                                order.begin() + static_cast<std::ptrdiff_t>(end));
            const std::uint64_t drop_seed =
                Rng::derive(cfg.seed, static_cast<std::uint64_t>(epoch), batch_index + 1);
            const double loss = model.loss_and_gradient(train.x, train.y, rows, grads, drop_seed);
            if (!std::isfinite(loss))
                throw NonFinite("mlp_fit: loss diverged at epoch " + std::to_string(epoch));
            adam_step(model.params(), grads, state, ++t, cfg.learning_rate);
        }
        const double acc = accuracy(model.predict(test.x), test.y);
        result.test_accuracy_history.push_back(acc);
        if (acc > result.best_test_accuracy) {
            result.best_test_accuracy = acc;
            result.model = model;
        }
        result.final_test_accuracy = acc;
    }
    return result;
}

double mlp_gradcheck(const MlpModel& model, const FeatureMatrix& batch, std::uint64_t seed,
                     std::size_t n_params, double corruption) {
    if (batch.x.rows() == 0 || batch.x.rows() > 8)
        throw DegenerateConfig("mlp_gradcheck: batch must have 1..8 rows");
    std::vector<std::size_t> rows(batch.x.rows());
    std::iota(rows.begin(), rows.end(), std::size_t{0});

    std::vector<double> analytic;
    model.loss_and_gradient(batch.x, batch.y, rows, analytic, /*dropout_seed=*/0);

    MlpModel probe = model;  // mutated locally for finite differences
    Rng rng(seed);
    const double h = 1e-5;
    double max_rel = 0.0;
    const std::size_t total = probe.params().size();
    const std::size_t count = std::min(n_params, total);
    std::vector<double> scratch;
    for (std::size_t k = 0; k < count; ++k) {
        const auto idx = static_cast<std::size_t>(rng.below(total));
        const double orig = probe.params()[idx];
        probe.params()[idx] = orig + h;
        const double lp = probe.loss_and_gradient(batch.x, batch.y, rows, scratch, 0);
        probe.params()[idx] = orig - h;
        const double lm = probe.loss_and_gradient(batch.x, batch.y, rows, scratch, 0);
        probe.params()[idx] = orig;
        const double numeric = (lp - lm) / (2.0 * h);
        const double a = analytic[idx] + corruption;
        const double rel = std::fabs(a - numeric) / std::max(1e-6, std::fabs(a) + std::fabs(numeric));
        max_rel = std::max(max_rel, rel);
    }
    return max_rel;
}

}  // namespace shaml
