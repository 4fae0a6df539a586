#include <cmath>
#include <vector>

#include <doctest.h>

#include "shaml/curvedata.hpp"
#include "shaml/errors.hpp"
#include "shaml/featureng.hpp"
#include "shaml/numcore.hpp"
#include "shaml/rng.hpp"

using namespace shaml;

TEST_CASE("ols recovers y = 2x + 1 exactly") {
    Matrix x(3, 1);
    x(0, 0) = 0.0;
    x(1, 0) = 1.0;
    x(2, 0) = 2.0;
    std::vector<double> y = {1.0, 3.0, 5.0};
    auto res = ols_fit(x, y);
    CHECK(res.coefficients.size() == 1);
    CHECK(res.coefficients[0] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(res.intercept == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(res.residual_norm == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("ols recovers the BSD log-linear relation on synthetic data") {
    auto ds = synthesize_dataset(500, {{1, 1.0}, {4, 1.0}, {9, 1.0}, {16, 1.0}}, 7);
    FeatureSpec spec = FeatureSpec::bsd(true);
    FeatureMatrix m = build_matrix(ds, spec, Target::sqrt_sha);
    m = log_transform(m, spec);
    std::vector<double> log_sha(m.y.size());
    for (std::size_t i = 0; i < m.y.size(); ++i) log_sha[i] = 2.0 * std::log(m.y[i]);
    auto res = ols_fit(m.x, log_sha);
    const std::vector<double> expected = {1.0, 2.0, -1.0, -1.0, -1.0};
    REQUIRE(res.coefficients.size() == 5);
    for (std::size_t j = 0; j < 5; ++j)
        CHECK(std::fabs(res.coefficients[j] - expected[j]) < 1e-6);
    CHECK(std::fabs(res.intercept) < 1e-6);
}

TEST_CASE("ols rejects a duplicated column") {
    Matrix x(5, 2);
    Rng rng(1);
    for (std::size_t i = 0; i < 5; ++i) {
        x(i, 0) = rng.uniform();
        x(i, 1) = x(i, 0);
    }
    std::vector<double> y = {1, 2, 3, 4, 5};
    CHECK_THROWS_AS(ols_fit(x, y), RankDeficient);
}

TEST_CASE("ols residual orthogonal to the design columns") {
    Rng rng(3);
    Matrix x(40, 3);
    std::vector<double> y(40);
    for (std::size_t i = 0; i < 40; ++i) {
        for (std::size_t j = 0; j < 3; ++j) x(i, j) = rng.normal();
        y[i] = rng.normal();
    }
    auto res = ols_fit(x, y);
    for (std::size_t j = 0; j < 3; ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i < 40; ++i) {
            double pred = res.intercept;
            for (std::size_t k = 0; k < 3; ++k) pred += res.coefficients[k] * x(i, k);
            acc += (y[i] - pred) * x(i, j);
        }
        CHECK(std::fabs(acc) < 1e-8);
    }
}

TEST_CASE("correlation of identical columns is 1") {
    Matrix x(4, 2);
    for (std::size_t i = 0; i < 4; ++i) x(i, 0) = x(i, 1) = static_cast<double>(i);
    auto res = correlation(x);
    CHECK(res.corr(0, 1) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(res.corr(0, 0) == 1.0);
    CHECK_FALSE(res.zero_variance[0]);
}

TEST_CASE("correlation of balanced sign patterns is 0") {
    // hand-enumerated 4-row fixture: columns hit every (+-1, +-1) combination once
    Matrix x(4, 2);
    x(0, 0) = 1;  x(0, 1) = 1;
    x(1, 0) = 1;  x(1, 1) = -1;
    x(2, 0) = -1; x(2, 1) = 1;
    x(3, 0) = -1; x(3, 1) = -1;
    auto res = correlation(x);
    CHECK(res.corr(0, 1) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("constant column is flagged with zero correlation entries") {
    Matrix x(4, 2);
    for (std::size_t i = 0; i < 4; ++i) {
        x(i, 0) = static_cast<double>(i);
        x(i, 1) = 7.0;
    }
    auto res = correlation(x);
    CHECK(res.zero_variance[1]);
    CHECK_FALSE(res.zero_variance[0]);
    CHECK(res.corr(0, 1) == 0.0);
    CHECK(res.corr(1, 1) == 1.0);
}

TEST_CASE("symmetric_eigen on the identity") {
    auto res = symmetric_eigen(Matrix::identity(3));
    REQUIRE(res.values.size() == 3);
    for (double v : res.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("symmetric_eigen on diag(3,1)") {
    Matrix a(2, 2);
    a(0, 0) = 3.0;
    a(1, 1) = 1.0;
    auto res = symmetric_eigen(a);
    CHECK(res.values[0] == doctest::Approx(3.0));
    CHECK(res.values[1] == doctest::Approx(1.0));
    CHECK(std::fabs(std::fabs(res.vectors(0, 0)) - 1.0) < 1e-10);
    CHECK(std::fabs(std::fabs(res.vectors(1, 1)) - 1.0) < 1e-10);
}

TEST_CASE("symmetric_eigen reconstructs a random symmetric matrix") {
    Rng rng(11);
    Matrix a(5, 5);
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j <= i; ++j) a(i, j) = a(j, i) = rng.normal();
    auto res = symmetric_eigen(a);
    CHECK(res.converged);
    // a = V diag(lambda) V^T
    double trace = 0.0, sum = 0.0;
    for (std::size_t i = 0; i < 5; ++i) trace += a(i, i);
    for (double v : res.values) sum += v;
    CHECK(std::fabs(trace - sum) < 1e-8);
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 5; ++j) {
            double rec = 0.0;
            for (std::size_t k = 0; k < 5; ++k)
                rec += res.vectors(i, k) * res.values[k] * res.vectors(j, k);
            CHECK(std::fabs(rec - a(i, j)) < 1e-8);
        }
    // orthonormal eigenvectors
    for (std::size_t c1 = 0; c1 < 5; ++c1)
        for (std::size_t c2 = 0; c2 < 5; ++c2) {
            double d = 0.0;
            for (std::size_t i = 0; i < 5; ++i) d += res.vectors(i, c1) * res.vectors(i, c2);
            CHECK(std::fabs(d - (c1 == c2 ? 1.0 : 0.0)) < 1e-8);
        }
}

TEST_CASE("symmetric_eigen rejects an asymmetric matrix") {
    Matrix a(2, 2);
    a(0, 1) = 1.0;
    a(1, 0) = 2.0;
    CHECK_THROWS_AS(symmetric_eigen(a), NotSymmetric);
}

TEST_CASE("pca on points along y = x") {
    Matrix x(6, 2);
    for (std::size_t i = 0; i < 6; ++i) {
        const double v = static_cast<double>(i) - 2.5;
        x(i, 0) = v;
        x(i, 1) = v;
    }
    auto res = pca(x, 1);
    const double s = 1.0 / std::sqrt(2.0);
    CHECK(res.components(0, 0) == doctest::Approx(s).epsilon(1e-9));
    CHECK(res.components(1, 0) == doctest::Approx(s).epsilon(1e-9));
    CHECK(res.explained_variance_ratio[0] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("pca on an isotropic cloud splits variance evenly") {
    Rng rng(5);
    Matrix x(4000, 2);
    for (std::size_t i = 0; i < 4000; ++i) {
        x(i, 0) = rng.normal();
        x(i, 1) = rng.normal();
    }
    auto res = pca(x, 2);
    CHECK(std::fabs(res.explained_variance_ratio[0] - 0.5) < 0.02);
    CHECK(std::fabs(res.explained_variance_ratio[1] - 0.5) < 0.02);
}

TEST_CASE("pca ratios sum to 1, components orthonormal, projections match eigenvalues") {
    Rng rng(9);
    Matrix x(300, 4);
    for (std::size_t i = 0; i < 300; ++i)
        for (std::size_t j = 0; j < 4; ++j)
            x(i, j) = rng.normal() * static_cast<double>(j + 1);
    auto res = pca(x, 4);
    double sum = 0.0;
    for (double r : res.explained_variance_ratio) {
        CHECK(r >= 0.0);
        sum += r;
    }
    CHECK(std::fabs(sum - 1.0) < 1e-9);
    for (std::size_t k = 1; k < 4; ++k)
        CHECK(res.explained_variance_ratio[k - 1] >= res.explained_variance_ratio[k]);
    for (std::size_t c1 = 0; c1 < 4; ++c1)
        for (std::size_t c2 = 0; c2 < 4; ++c2) {
            double d = 0.0;
            for (std::size_t i = 0; i < 4; ++i) d += res.components(i, c1) * res.components(i, c2);
            CHECK(std::fabs(d - (c1 == c2 ? 1.0 : 0.0)) < 1e-8);
        }
    // variance of each projected component equals the eigenvalue
    for (std::size_t k = 0; k < 4; ++k) {
        double mean = 0.0;
        for (std::size_t i = 0; i < 300; ++i) mean += res.projections(i, k);
        mean /= 300.0;
        double var = 0.0;
        for (std::size_t i = 0; i < 300; ++i) {
            const double d = res.projections(i, k) - mean;
            var += d * d;
        }
        var /= 300.0;
        CHECK(std::fabs(var - res.eigenvalues[k]) < 1e-8);
    }
    // sign convention: largest-|loading| entry positive
    for (std::size_t k = 0; k < 4; ++k) {
        std::size_t arg = 0;
        for (std::size_t i = 1; i < 4; ++i)
            if (std::fabs(res.components(i, k)) > std::fabs(res.components(arg, k))) arg = i;
        CHECK(res.components(arg, k) > 0.0);
    }
}

TEST_CASE("pca is invariant under row permutation") {
    Rng rng(21);
    Matrix x(50, 3);
    for (std::size_t i = 0; i < 50; ++i)
        for (std::size_t j = 0; j < 3; ++j) x(i, j) = rng.normal() * (j == 0 ? 3.0 : 1.0);
    Matrix x2(50, 3);
    for (std::size_t i = 0; i < 50; ++i)
        for (std::size_t j = 0; j < 3; ++j) x2(i, j) = x(49 - i, j);
    auto a = pca(x, 2);
    auto b = pca(x2, 2);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t k = 0; k < 2; ++k)
            CHECK(std::fabs(a.components(i, k) - b.components(i, k)) < 1e-9);
}
