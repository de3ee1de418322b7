// Copyright (c) 2026 The laln authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

namespace laln {

// Dense row-major matrix of 64-bit floats. Value semantics throughout; all
// operations below are pure functions and deterministic (fixed summation
// order), so results are bit-reproducible on a given platform.
class Matrix {
 public:
    Matrix() = default;
    Matrix(int rows, int cols);  // zero-initialized

    static Matrix zeros(int rows, int cols) { return Matrix(rows, cols); }
    static Matrix identity(int n);
    static Matrix filled(int rows, int cols, double value);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(int i, int j) { return data_[static_cast<std::size_t>(i) * cols_ + j]; }
    double operator()(int i, int j) const { return data_[static_cast<std::size_t>(i) * cols_ + j]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    bool same_shape(const Matrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }
    std::string shape_str() const;

    bool all_finite() const;
    double frobenius_norm() const;
    double max_abs() const;

 private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> data_;
};

// Economy-form SVD, W = U * diag(sigma) * V^T with p = min(rows, cols)
// columns in U and V and sigma sorted non-increasing.
struct SvdResult {
    Matrix U;                   // m x p
    std::vector<double> sigma;  // p, non-negative, non-increasing
    Matrix V;                   // n x p
};

// Leading k_eff = min(k, p) singular-vector columns of an SvdResult.
struct TopK {
    Matrix Uk;  // m x k_eff
    Matrix Vk;  // n x k_eff
    int k_eff = 0;
};

// C = A * B. Each output entry is a single dot product accumulated in
// ascending inner index, so the summation order is fixed.
Matrix matmul(const Matrix& a, const Matrix& b);

Matrix transpose(const Matrix& a);

// Elementwise value helpers (shape-checked).
Matrix add(const Matrix& a, const Matrix& b);
Matrix sub(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& a, double c);
Matrix hadamard(const Matrix& a, const Matrix& b);

// One-sided Jacobi SVD. Deterministic; throws on non-finite input and on
// failure to converge within the sweep cap (100). Columns of U carry a fixed
// sign convention (largest-magnitude entry positive) so repeated calls and
// nearby inputs produce consistent frames.
SvdResult svd(const Matrix& w);

// Leading singular vectors; k must be >= 1, values past p are clamped.
TopK top_k(const SvdResult& s, int k);

}  // namespace laln
