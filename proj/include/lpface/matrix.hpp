#pragma once

#include <cstddef>
#include <vector>

#include "lpface/errors.hpp"

namespace lpface {

/// Dense row-major matrix of doubles. Small and unclever on purpose: the
/// heavy inputs here are a few hundred columns at most.
class Matrix {
public:
    Matrix() = default;

    Matrix(int rows, int cols, double value = 0.0)
        : rows_(rows), cols_(cols),
          data_(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), value) {
        if (rows < 0 || cols < 0) {
            throw InvalidInput("matrix dimensions must be non-negative");
        }
    }

    static Matrix identity(int n) {
        Matrix m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    bool empty() const { return data_.empty(); }

    double& operator()(int i, int j) { return data_[idx(i, j)]; }
    double operator()(int i, int j) const { return data_[idx(i, j)]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::size_t size() const { return data_.size(); }

    bool operator==(const Matrix& other) const = default;

private:
    std::size_t idx(int i, int j) const {
        return static_cast<std::size_t>(i) * static_cast<std::size_t>(cols_) +
               static_cast<std::size_t>(j);
    }

    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> data_;
};

Matrix multiply(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);
std::vector<double> multiply(const Matrix& a, const std::vector<double>& x);

/// sqrt of the sum of squared entries.
double frobenius_norm(const Matrix& a);

}  // namespace lpface
