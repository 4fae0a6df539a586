#include <cmath>
#include <vector>

#include <doctest.h>

#include "shaml/curvedata.hpp"
#include "shaml/errors.hpp"
#include "shaml/featureng.hpp"
#include "shaml/logistic.hpp"
#include "shaml/metrics.hpp"
#include "shaml/mlp.hpp"
#include "shaml/rng.hpp"
#include "shaml/serialize.hpp"

using namespace shaml;

namespace {

FeatureMatrix xor_data(std::size_t copies) {
    const double pts[4][3] = {{0, 0, 0}, {0, 1, 1}, {1, 0, 1}, {1, 1, 0}};
    FeatureMatrix m;
    m.x = Matrix(4 * copies, 2);
    m.y.resize(4 * copies);
    m.feature_names = {"a", "b"};
    for (std::size_t c = 0; c < copies; ++c)
        for (std::size_t k = 0; k < 4; ++k) {
            const std::size_t i = 4 * c + k;
            m.x(i, 0) = pts[k][0];
            m.x(i, 1) = pts[k][1];
            m.y[i] = pts[k][2];
        }
    return m;
}

FeatureMatrix random_batch(std::size_t rows, std::size_t d, std::uint64_t seed) {
    Rng rng(seed);
    FeatureMatrix m;
    m.x = Matrix(rows, d);
    m.y.resize(rows);
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < d; ++j) m.x(i, j) = rng.normal();
        m.y[i] = static_cast<double>(rng.below(2));
    }
    return m;
}

}  // namespace

TEST_CASE("mlp learns XOR within 100 epochs") {
    auto train = xor_data(100);
    auto test = xor_data(1);
    MlpConfig cfg;
    cfg.hidden = {16, 8};
    cfg.dropout = 0.0;
    cfg.epochs = 100;
    cfg.batch_size = 32;
    cfg.seed = 1;
    auto fit = mlp_fit(train, test, cfg);
    CHECK(fit.best_test_accuracy == 1.0);
    CHECK(fit.test_accuracy_history.size() == 100);
    // returned model reproduces the best accuracy exactly
    CHECK(accuracy(fit.model.predict(test.x), test.y) == 1.0);
}

TEST_CASE("zero-epoch config is rejected") {
    auto m = xor_data(2);
    MlpConfig cfg;
    cfg.epochs = 0;
    CHECK_THROWS_AS(mlp_fit(m, m, cfg), DegenerateConfig);
}

TEST_CASE("mlp matches logistic on log BSD 4-vs-9") {
    auto ds = synthesize_dataset(1500, {{4, 1.0}, {9, 1.0}}, 8);
    auto [train_ds, test_ds] = train_test_split(ds, {0.2, 8});
    auto spec = FeatureSpec::bsd(true);
    auto train = log_transform(build_matrix(train_ds, spec, Target::class_label), spec);
    auto test = log_transform(build_matrix(test_ds, spec, Target::class_label), spec);
    auto scaled = fit_apply_scaler(train, test);

    MlpConfig cfg;
    cfg.hidden = {32, 16};
    cfg.dropout = 0.1;
    cfg.epochs = 40;
    cfg.seed = 8;
    auto fit = mlp_fit(scaled.train, scaled.test, cfg);
    CHECK(fit.best_test_accuracy >= 0.99);
    CHECK(fit.best_test_accuracy >= fit.final_test_accuracy - 1e-12);
}

TEST_CASE("gradient check against central differences") {
    auto batch = random_batch(8, 5, 3);
    MlpConfig cfg;
    cfg.hidden = {16, 8};
    cfg.seed = 3;
    MlpModel model(5, cfg);
    const double err = mlp_gradcheck(model, batch, 7, 200);
    CHECK(err < 1e-4);
    // deterministic
    CHECK(mlp_gradcheck(model, batch, 7, 200) == err);
    // a corrupted analytic gradient must be caught
    CHECK(mlp_gradcheck(model, batch, 7, 200, 0.05) > 1e-2);
}

TEST_CASE("eval-mode forward pass is deterministic and dropout-free") {
    auto batch = random_batch(4, 3, 5);
    MlpConfig cfg;
    cfg.hidden = {8};
    cfg.dropout = 0.5;
    cfg.seed = 5;
    MlpModel model(3, cfg);
    auto a = model.predict_proba(batch.x);
    auto b = model.predict_proba(batch.x);
    CHECK(a == b);
    for (double p : a) {
        CHECK(p > 0.0);
        CHECK(p < 1.0);
    }
}

TEST_CASE("training is reproducible for a fixed seed") {
    auto train = xor_data(50);
    auto test = xor_data(1);
    MlpConfig cfg;
    cfg.hidden = {8};
    cfg.epochs = 10;
    cfg.dropout = 0.3;
    cfg.seed = 11;
    auto a = mlp_fit(train, test, cfg);
    auto b = mlp_fit(train, test, cfg);
    CHECK(a.model.params() == b.model.params());
    CHECK(a.test_accuracy_history == b.test_accuracy_history);
}

TEST_CASE("mlp json round trip preserves predictions bitwise") {
    auto batch = random_batch(6, 4, 9);
    MlpConfig cfg;
    cfg.hidden = {8, 4};
    cfg.seed = 9;
    MlpModel model(4, cfg);
    auto back = mlp_from_json(to_json(model));
    CHECK(back.predict_proba(batch.x) == model.predict_proba(batch.x));
    CHECK(back.layer_sizes() == model.layer_sizes());
}
