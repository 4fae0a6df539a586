#include "shaml/numcore.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "shaml/errors.hpp"

namespace shaml {

namespace {

std::vector<double> column_means(const Matrix& x) {
    std::vector<double> mu(x.cols(), 0.0);
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j < x.cols(); ++j) mu[j] += x(i, j);
    for (double& m : mu) m /= static_cast<double>(x.rows());
    return mu;
}

}  // namespace

OlsResult ols_fit(const Matrix& x, const std::vector<double>& y) {
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();
    if (y.size() != n) throw DimensionMismatch("ols_fit: y length");
    if (n < d + 1) throw RankDeficient("ols_fit: fewer rows than parameters");

    // augmented design [X | 1]
    const std::size_t p = d + 1;
    Matrix a(n, p);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) a(i, j) = x(i, j);
        a(i, d) = 1.0;
    }

    // Householder QR with column pivoting; b carried along
    std::vector<double> b = y;
    std::vector<std::size_t> perm(p);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::vector<double> colnorm(p, 0.0);
    for (std::size_t j = 0; j < p; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += a(i, j) * a(i, j);
        colnorm[j] = s;
    }

    double r00 = 0.0;
    double rmin = 0.0;
    for (std::size_t k = 0; k < p; ++k) {
        // pivot: remaining column with largest norm
        std::size_t pivot = k;
        for (std::size_t j = k + 1; j < p; ++j)
            if (colnorm[j] > colnorm[pivot]) pivot = j;
        if (pivot != k) {
            for (std::size_t i = 0; i < n; ++i) std::swap(a(i, k), a(i, pivot));
            std::swap(colnorm[k], colnorm[pivot]);
            std::swap(perm[k], perm[pivot]);
        }

        double alpha = 0.0;
        for (std::size_t i = k; i < n; ++i) alpha += a(i, k) * a(i, k);
        alpha = std::sqrt(alpha);
        if (a(k, k) > 0) alpha = -alpha;

        const double rkk = std::fabs(alpha);
        if (k == 0) r00 = rkk;
        rmin = rkk;
        if (rkk < 1e-10 * std::max(1.0, r00)) {
            throw RankDeficient("ols_fit: design matrix rank deficient, |R_kk|/|R_00| = " +
                                std::to_string(r00 > 0 ? rkk / r00 : 0.0));
        }

        std::vector<double> v(n - k, 0.0);
        v[0] = a(k, k) - alpha;
        for (std::size_t i = k + 1; i < n; ++i) v[i - k] = a(i, k);
        double vnorm2 = 0.0;
        for (double t : v) vnorm2 += t * t;
        if (vnorm2 > 0) {
            for (std::size_t j = k; j < p; ++j) {
                double s = 0.0;
                for (std::size_t i = k; i < n; ++i) s += v[i - k] * a(i, j);
                const double f = 2.0 * s / vnorm2;
                for (std::size_t i = k; i < n; ++i) a(i, j) -= f * v[i - k];
            }
            double s = 0.0;
            for (std::size_t i = k; i < n; ++i) s += v[i - k] * b[i];
            const double f = 2.0 * s / vnorm2;
            for (std::size_t i = k; i < n; ++i) b[i] -= f * v[i - k];
        }
        for (std::size_t j = k + 1; j < p; ++j) colnorm[j] -= a(k, j) * a(k, j);
    }

    // back substitution on R (p x p upper triangular)
    std::vector<double> z(p, 0.0);
    for (std::size_t kk = p; kk-- > 0;) {
        double s = b[kk];
        for (std::size_t j = kk + 1; j < p; ++j) s -= a(kk, j) * z[j];
        z[kk] = s / a(kk, kk);
    }

    OlsResult res;
    res.coefficients.assign(d, 0.0);
    for (std::size_t j = 0; j < p; ++j) {
        if (perm[j] == d)
            res.intercept = z[j];
        else
            res.coefficients[perm[j]] = z[j];
    }
    double rn = 0.0;
    for (std::size_t i = p; i < n; ++i) rn += b[i] * b[i];
    res.residual_norm = std::sqrt(rn);
    res.condition_estimate = rmin > 0 ? r00 / rmin : std::numeric_limits<double>::infinity();
    return res;
}

Matrix covariance(const Matrix& x) {
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();
    if (n < 2) throw DimensionMismatch("covariance: need n >= 2");
    const auto mu = column_means(x);
    Matrix c(d, d);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t a = 0; a < d; ++a) {
            const double da = x(i, a) - mu[a];
            for (std::size_t b = a; b < d; ++b) c(a, b) += da * (x(i, b) - mu[b]);
        }
    }
    for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = a; b < d; ++b) {
            c(a, b) /= static_cast<double>(n);
            c(b, a) = c(a, b);
        }
    return c;
}

CorrelationResult correlation(const Matrix& x) {
    Matrix c = covariance(x);
    const std::size_t d = c.rows();
    CorrelationResult out;
    out.zero_variance.assign(d, false);
    std::vector<double> sd(d);
    for (std::size_t j = 0; j < d; ++j) {
        sd[j] = std::sqrt(c(j, j));
        if (sd[j] == 0.0) out.zero_variance[j] = true;
    }
    Matrix r(d, d);
    for (std::size_t a = 0; a < d; ++a) {
        for (std::size_t b = 0; b < d; ++b) {
            if (a == b) {
                r(a, b) = 1.0;
            } else if (out.zero_variance[a] || out.zero_variance[b]) {
                r(a, b) = 0.0;
            } else {
                r(a, b) = std::clamp(c(a, b) / (sd[a] * sd[b]), -1.0, 1.0);
            }
        }
    }
    out.corr = std::move(r);
    return out;
}

EigenResult symmetric_eigen(const Matrix& a) {
    const std::size_t d = a.rows();
    if (a.cols() != d) throw NotSymmetric("matrix not square");
    double scale = 0.0;
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) scale = std::max(scale, std::fabs(a(i, j)));
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i + 1; j < d; ++j)
            if (std::fabs(a(i, j) - a(j, i)) > 1e-10 * std::max(1.0, scale))
                throw NotSymmetric("asymmetry exceeds 1e-10");

    Matrix m = a;
    Matrix v = Matrix::identity(d);

    auto offnorm = [&]() {
        double s = 0.0;
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = i + 1; j < d; ++j) s += 2.0 * m(i, j) * m(i, j);
        return std::sqrt(s);
    };

    const double tol = 1e-12 * std::max(1.0, scale);
    bool converged = false;
    for (int sweep = 0; sweep < 100; ++sweep) {
        if (offnorm() < tol) {
            converged = true;
            break;
        }
        for (std::size_t p = 0; p < d; ++p) {
            for (std::size_t q = p + 1; q < d; ++q) {
                const double apq = m(p, q);
                if (apq == 0.0) continue;
                const double app = m(p, p);
                const double aqq = m(q, q);
                const double theta = (aqq - app) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < d; ++k) {
                    const double mkp = m(k, p);
                    const double mkq = m(k, q);
                    m(k, p) = c * mkp - s * mkq;
                    m(k, q) = s * mkp + c * mkq;
                }
                for (std::size_t k = 0; k < d; ++k) {
                    const double mpk = m(p, k);
                    const double mqk = m(q, k);
                    m(p, k) = c * mpk - s * mqk;
                    m(q, k) = s * mpk + c * mqk;
                }
                for (std::size_t k = 0; k < d; ++k) {
                    const double vkp = v(k, p);
                    const double vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }
    if (!converged && offnorm() < tol) converged = true;

    std::vector<std::size_t> order(d);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return m(i, i) > m(j, j); });

    EigenResult res;
    res.converged = converged;
    res.values.resize(d);
    res.vectors = Matrix(d, d);
    for (std::size_t j = 0; j < d; ++j) {
        res.values[j] = m(order[j], order[j]);
        for (std::size_t i = 0; i < d; ++i) res.vectors(i, j) = v(i, order[j]);
    }
    return res;
}

PcaResult pca(const Matrix& x, std::size_t k) {
    const std::size_t d = x.cols();
    if (k > d) throw DimensionMismatch("pca: k > d");
    const Matrix cov = covariance(x);
    EigenResult eig = symmetric_eigen(cov);

    // fixed sign convention: largest-|loading| entry of each PC is positive
    for (std::size_t j = 0; j < d; ++j) {
        std::size_t imax = 0;
        for (std::size_t i = 1; i < d; ++i)
            if (std::fabs(eig.vectors(i, j)) > std::fabs(eig.vectors(imax, j))) imax = i;
        if (eig.vectors(imax, j) < 0)
            for (std::size_t i = 0; i < d; ++i) eig.vectors(i, j) = -eig.vectors(i, j);
    }

    PcaResult res;
    res.components = eig.vectors;
    res.eigenvalues = eig.values;
    double total = 0.0;
    for (double& lam : res.eigenvalues) {
        if (lam < 0 && lam > -1e-12) lam = 0.0;  // numerical noise
        total += lam;
    }
    res.explained_variance_ratio.resize(d);
    for (std::size_t j = 0; j < d; ++j)
        res.explained_variance_ratio[j] = total > 0 ? res.eigenvalues[j] / total : 0.0;

    const auto mu = column_means(x);
    res.projections = Matrix(x.rows(), k);
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j < k; ++j) {
            double s = 0.0;
            for (std::size_t f = 0; f < d; ++f) s += (x(i, f) - mu[f]) * res.components(f, j);
            res.projections(i, j) = s;
        }
    return res;
}

}  // namespace shaml
