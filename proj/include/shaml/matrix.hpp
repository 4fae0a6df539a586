#pragma once

#include <cstddef>
#include <vector>

namespace shaml {

// Dense row-major matrix of doubles. Deliberately minimal; everything the
// toolkit needs (products, transpose, column views) and nothing more.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    std::vector<double> column(std::size_t j) const;
    std::vector<double> row(std::size_t i) const;
    void set_column(std::size_t j, const std::vector<double>& v);

    Matrix transposed() const;
    bool all_finite() const;

    static Matrix identity(std::size_t n);

    friend Matrix operator*(const Matrix& a, const Matrix& b);
    friend bool operator==(const Matrix& a, const Matrix& b) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// y = a * x  (x of length a.cols())
std::vector<double> matvec(const Matrix& a, const std::vector<double>& x);

double dot(const std::vector<double>& a, const std::vector<double>& b);
double norm2(const std::vector<double>& a);

}  // namespace shaml
