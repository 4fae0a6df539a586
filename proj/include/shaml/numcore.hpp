#pragma once

#include <vector>

#include "shaml/matrix.hpp"

namespace shaml {

struct OlsResult {
    std::vector<double> coefficients;
    double intercept = 0.0;
    double residual_norm = 0.0;
    double condition_estimate = 0.0;
};

// Least squares with an implicit intercept column, solved by Householder QR
// with column pivoting. Throws RankDeficient when the (augmented) design
// matrix is numerically rank deficient.
OlsResult ols_fit(const Matrix& x, const std::vector<double>& y);

// Population (1/n) covariance of the columns of x. n >= 2 required.
Matrix covariance(const Matrix& x);

struct CorrelationResult {
    Matrix corr;
    std::vector<bool> zero_variance;  // per column; flagged entries are 0
};

CorrelationResult correlation(const Matrix& x);

struct EigenResult {
    std::vector<double> values;  // descending
    Matrix vectors;              // columns are eigenvectors, matching values
    bool converged = true;
};

// Cyclic Jacobi for symmetric matrices. Iterates until the off-diagonal
// Frobenius norm drops below 1e-12 (relative to the matrix norm) or 100
// sweeps; returns best effort with converged=false in the latter case.
EigenResult symmetric_eigen(const Matrix& a);

struct PcaResult {
    Matrix components;                            // d x d, columns are PCs
    std::vector<double> explained_variance_ratio; // length d, descending
    std::vector<double> eigenvalues;              // length d, descending
    Matrix projections;                           // n x k
};

// PCA via eigendecomposition of the population covariance. Sign convention:
// within each component the entry of largest magnitude is positive.
PcaResult pca(const Matrix& x, std::size_t k);

}  // namespace shaml
