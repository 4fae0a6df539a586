#include <cmath>
#include <vector>

#include <doctest.h>

#include "shaml/adam.hpp"
#include "shaml/curvedata.hpp"
#include "shaml/errors.hpp"
#include "shaml/featureng.hpp"
#include "shaml/logistic.hpp"
#include "shaml/metrics.hpp"
#include "shaml/serialize.hpp"

using namespace shaml;

namespace {

FeatureMatrix separable_1d(std::size_t per_class, double scale = 1.0) {
    FeatureMatrix m;
    m.x = Matrix(2 * per_class, 1);
    m.y.resize(2 * per_class);
    m.feature_names = {"f"};
    for (std::size_t i = 0; i < per_class; ++i) {
        m.x(i, 0) = -scale;
        m.y[i] = 0.0;
        m.x(per_class + i, 0) = scale;
        m.y[per_class + i] = 1.0;
    }
    return m;
}

}  // namespace

TEST_CASE("adam first-step formula") {
    std::vector<double> p = {0.0};
    std::vector<double> g = {1.0};
    AdamState st(1);
    adam_step(p, g, st, 1, 0.001);
    CHECK(std::fabs(p[0] - (-0.000999999990)) < 1e-12);
}

TEST_CASE("adam zero gradient with zero state leaves parameters unchanged") {
    std::vector<double> p = {0.5, -0.25};
    std::vector<double> g = {0.0, 0.0};
    AdamState st(2);
    adam_step(p, g, st, 1, 0.001);
    CHECK(p[0] == 0.5);
    CHECK(p[1] == -0.25);
}

TEST_CASE("adam treats equal gradients symmetrically") {
    std::vector<double> p = {1.0, 1.0};
    std::vector<double> g = {0.3, 0.3};
    AdamState st(2);
    adam_step(p, g, st, 1, 0.01);
    CHECK(p[0] == p[1]);
}

TEST_CASE("logistic fits separable 1-D data perfectly") {
    auto m = separable_1d(50);
    auto model = logistic_fit(m);
    CHECK(accuracy(model.predict(m.x), m.y) == 1.0);
    for (double p : model.predict_proba(m.x)) {
        CHECK(p > 0.0);
        CHECK(p < 1.0);
    }
}

TEST_CASE("logistic rejects a single-class target") {
    FeatureMatrix m = separable_1d(10);
    std::fill(m.y.begin(), m.y.end(), 1.0);
    CHECK_THROWS_AS(logistic_fit(m), Degenerate);
}

TEST_CASE("logistic reaches 100% on log BSD features for 4-vs-9") {
    auto ds = synthesize_dataset(2000, {{4, 1.0}, {9, 1.0}}, 42);
    auto [train_ds, test_ds] = train_test_split(ds, {0.2, 42});
    auto spec = FeatureSpec::bsd(true);
    auto train = log_transform(build_matrix(train_ds, spec, Target::class_label), spec);
    auto test = log_transform(build_matrix(test_ds, spec, Target::class_label), spec);
    auto scaled = fit_apply_scaler(train, test);
    auto model = logistic_fit(scaled.train);
    CHECK(accuracy(model.predict(scaled.test.x), scaled.test.y) == 1.0);
}

TEST_CASE("accuracy is invariant under affine feature rescaling on separable data") {
    auto base = separable_1d(30, 1.0);
    auto scaled = separable_1d(30, 10.0);
    auto m1 = logistic_fit(base);
    auto m2 = logistic_fit(scaled);
    CHECK(accuracy(m1.predict(base.x), base.y) ==
          accuracy(m2.predict(scaled.x), scaled.y));
}

TEST_CASE("logistic model json round trip preserves predictions") {
    auto m = separable_1d(20);
    auto model = logistic_fit(m);
    auto back = logistic_from_json(to_json(model));
    CHECK(back.weights == model.weights);
    CHECK(back.bias == model.bias);
    CHECK(back.predict_proba(m.x) == model.predict_proba(m.x));
}
