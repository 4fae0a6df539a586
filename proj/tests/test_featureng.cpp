#include <cmath>
#include <vector>

#include <doctest.h>

#include "shaml/curvedata.hpp"
#include "shaml/errors.hpp"
#include "shaml/featureng.hpp"

using namespace shaml;

namespace {

CurveRecord make_record(const std::string& label, long long sha) {
    CurveRecord rec;
    rec.label = label;
    rec.conductor = 37;
    rec.rank = 0;
    rec.torsion_order = 2;
    rec.real_period = 0.5;
    rec.regulator = 1.0;
    rec.tamagawa_product = 3;
    rec.special_value = static_cast<double>(sha) * 0.5 * 1.0 * 3.0 / 4.0;
    rec.sha_order = sha;
    return rec;
}

}  // namespace

TEST_CASE("build_matrix produces the five raw BSD columns") {
    Dataset ds;
    ds.records = {make_record("a", 4), make_record("b", 9)};
    auto m = build_matrix(ds, FeatureSpec::bsd(), Target::class_label);
    CHECK(m.x.rows() == 2);
    CHECK(m.x.cols() == 5);
    CHECK(m.feature_names == kBsdFeatures);
    CHECK(m.x(0, 1) == 2.0);             // torsion
    CHECK(m.x(0, 2) == 0.5);             // real period
    CHECK(m.y == std::vector<double>{0.0, 1.0});  // class indices of sorted {4, 9}
}

TEST_CASE("include_ap widens the matrix to 105 columns") {
    auto ds = synthesize_dataset(10, {{4, 1.0}}, 3, {.with_ap = true});
    FeatureSpec spec = FeatureSpec::bsd();
    spec.include_ap = true;
    auto m = build_matrix(ds, spec, Target::class_label);
    CHECK(m.x.cols() == 105);
    CHECK(m.feature_names.size() == 105);
    CHECK(m.feature_names[5] == "ap_2");
    CHECK(m.feature_names[104] == "ap_541");
}

TEST_CASE("include_ap without a_p data raises MissingApColumns") {
    Dataset ds;
    ds.records = {make_record("a", 4)};
    FeatureSpec spec = FeatureSpec::bsd();
    spec.include_ap = true;
    CHECK_THROWS_AS(build_matrix(ds, spec, Target::class_label), MissingApColumns);
}

TEST_CASE("sqrt_sha target") {
    Dataset ds;
    ds.records = {make_record("a", 9)};
    auto m = build_matrix(ds, FeatureSpec::bsd(), Target::sqrt_sha);
    CHECK(m.y[0] == doctest::Approx(3.0));
}

TEST_CASE("missing feature names the record") {
    Dataset ds;
    ds.records = {make_record("a", 4)};
    ds.records[0].regulator.reset();
    CHECK_THROWS_WITH_AS(build_matrix(ds, FeatureSpec::bsd(), Target::class_label),
                         doctest::Contains("a"), MissingFeature);
}

TEST_CASE("log_transform basics") {
    Matrix x(3, 2);
    for (std::size_t i = 0; i < 3; ++i) x(i, 0) = 1.0;
    x(0, 1) = 0;
    x(1, 1) = 1;
    x(2, 1) = 3;
    FeatureMatrix m;
    m.x = x;
    m.y = {0, 0, 0};
    m.feature_names = {"real_period", "rank"};
    auto spec = FeatureSpec::named({"real_period", "rank"}, true);
    auto out = log_transform(m, spec);
    CHECK(out.x(0, 0) == 0.0);  // log 1
    CHECK(out.x(0, 1) == 0.0);  // log1p(0)
    CHECK(out.x(1, 1) == doctest::Approx(std::log(2.0)));
    CHECK(out.x(2, 1) == doctest::Approx(std::log(4.0)));
}

TEST_CASE("log_transform rejects non-positive entries") {
    FeatureMatrix m;
    m.x = Matrix(1, 1);
    m.x(0, 0) = -2.0;
    m.y = {0};
    m.feature_names = {"real_period"};
    auto spec = FeatureSpec::named({"real_period"}, true);
    CHECK_THROWS_AS(log_transform(m, spec), NonPositiveEntry);
}

TEST_CASE("log features satisfy the BSD identity row by row") {
    auto ds = synthesize_dataset(50, {{4, 1.0}, {9, 1.0}}, 17);
    auto spec = FeatureSpec::bsd(true);
    auto m = log_transform(build_matrix(ds, spec, Target::sqrt_sha), spec);
    for (std::size_t i = 0; i < m.x.rows(); ++i) {
        // log|Sha| = logL* + 2 log tors - log omega - log reg - log prod c_p
        const double lhs = 2.0 * std::log(m.y[i]);
        const double rhs = m.x(i, 0) + 2.0 * m.x(i, 1) - m.x(i, 2) - m.x(i, 3) - m.x(i, 4);
        CHECK(std::fabs(lhs - rhs) < 1e-10);
    }
}

TEST_CASE("scaler standardizes train and reuses train statistics on test") {
    FeatureMatrix train, test;
    train.x = Matrix(2, 1);
    train.x(0, 0) = 1.0;
    train.x(1, 0) = 3.0;
    train.y = {0, 1};
    train.feature_names = {"f"};
    test.x = Matrix(1, 1);
    test.x(0, 0) = 5.0;
    test.y = {1};
    test.feature_names = {"f"};
    auto scaled = fit_apply_scaler(train, test);
    CHECK(scaled.train.x(0, 0) == doctest::Approx(-1.0));  // population std = 1
    CHECK(scaled.train.x(1, 0) == doctest::Approx(1.0));
    CHECK(scaled.test.x(0, 0) == doctest::Approx(3.0));
    CHECK(scaled.scaler.mean[0] == doctest::Approx(2.0));
    CHECK(scaled.scaler.std[0] == doctest::Approx(1.0));
}

TEST_CASE("constant columns pass through flagged") {
    FeatureMatrix train;
    train.x = Matrix(3, 1);
    for (std::size_t i = 0; i < 3; ++i) train.x(i, 0) = 7.0;
    train.y = {0, 1, 0};
    train.feature_names = {"regulator"};
    auto scaled = fit_apply_scaler(train, train);
    CHECK(scaled.scaler.constant[0]);
    CHECK(scaled.train.x(1, 0) == 7.0);
}

TEST_CASE("scaled train columns have mean 0 and std 1") {
    auto ds = synthesize_dataset(200, {{1, 1.0}, {4, 1.0}}, 31);
    auto m = build_matrix(ds, FeatureSpec::bsd(), Target::class_label);
    auto scaled = fit_apply_scaler(m, m);
    for (std::size_t j = 0; j < 5; ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < m.x.rows(); ++i) mean += scaled.train.x(i, j);
        mean /= static_cast<double>(m.x.rows());
        double var = 0.0;
        for (std::size_t i = 0; i < m.x.rows(); ++i) {
            const double d = scaled.train.x(i, j) - mean;
            var += d * d;
        }
        var /= static_cast<double>(m.x.rows());
        CHECK(std::fabs(mean) < 1e-9);
        CHECK(std::fabs(std::sqrt(var) - 1.0) < 1e-9);
    }
}

TEST_CASE("drop_feature removes exactly one named column") {
    Dataset ds;
    ds.records = {make_record("a", 4), make_record("b", 9)};
    auto m = build_matrix(ds, FeatureSpec::bsd(), Target::class_label);
    auto dropped = drop_feature(m, "regulator");
    CHECK(dropped.x.cols() == 4);
    CHECK(dropped.feature_names ==
          std::vector<std::string>{"special_value", "torsion_order", "real_period",
                                   "tamagawa_product"});
    CHECK_THROWS_AS(drop_feature(dropped, "regulator"), UnknownFeature);
    // five distinct 4-column views
    for (const auto& name : kBsdFeatures) {
        auto d = drop_feature(m, name);
        CHECK(d.x.cols() == 4);
        for (const auto& kept : d.feature_names) CHECK(kept != name);
    }
}

TEST_CASE("log_transform commutes with row permutation") {
    auto ds = synthesize_dataset(20, {{4, 1.0}}, 5);
    auto spec = FeatureSpec::bsd(true);
    auto m = log_transform(build_matrix(ds, spec, Target::class_label), spec);
    Dataset rev = ds;
    std::reverse(rev.records.begin(), rev.records.end());
    auto m2 = log_transform(build_matrix(rev, spec, Target::class_label), spec);
    for (std::size_t i = 0; i < 20; ++i)
        for (std::size_t j = 0; j < 5; ++j) CHECK(m.x(i, j) == m2.x(19 - i, j));
}

TEST_CASE("feature spec json round trip") {
    FeatureSpec spec = FeatureSpec::bsd(true);
    spec.include_ap = true;
    spec.standardize = true;
    auto back = FeatureSpec::from_json(spec.to_json());
    CHECK(back.features == spec.features);
    CHECK(back.log_transform == spec.log_transform);
    CHECK(back.standardize == spec.standardize);
    CHECK(back.include_ap == spec.include_ap);
}
