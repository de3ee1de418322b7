// Copyright (c) 2026 The laln authors
// SPDX-License-Identifier: Apache-2.0

#include "laln/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace laln {

Matrix::Matrix(int rows, int cols) : rows_(rows), cols_(cols) {
    if (rows <= 0 || cols <= 0) {
        throw std::invalid_argument("Matrix: dimensions must be positive, got " +
                                    std::to_string(rows) + "x" + std::to_string(cols));
    }
    data_.assign(static_cast<std::size_t>(rows) * cols, 0.0);
}

Matrix Matrix::identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::filled(int rows, int cols, double value) {
    Matrix m(rows, cols);
    std::fill(m.data_.begin(), m.data_.end(), value);
    return m;
}

std::string Matrix::shape_str() const {
    return std::to_string(rows_) + "x" + std::to_string(cols_);
}

bool Matrix::all_finite() const {
    for (double v : data_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

double Matrix::frobenius_norm() const {
    double s = 0.0;
    for (double v : data_) s += v * v;
    return std::sqrt(s);
}

double Matrix::max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        throw std::invalid_argument("matmul: inner dimensions mismatch: " + a.shape_str() +
                                    " * " + b.shape_str());
    }
    const int m = a.rows(), p = a.cols(), n = b.cols();
    Matrix c(m, n);
    const double* ad = a.data();
    const double* bd = b.data();
    double* cd = c.data();
    // i-k-j order: every c[i][j] still accumulates in ascending k, identical
    // to the naive i-j-k loop, but the inner loop runs over contiguous rows.
    for (int i = 0; i < m; ++i) {
        const double* arow = ad + static_cast<std::size_t>(i) * p;
        double* crow = cd + static_cast<std::size_t>(i) * n;
        for (int k = 0; k < p; ++k) {
            const double aik = arow[k];
            const double* brow = bd + static_cast<std::size_t>(k) * n;
            for (int j = 0; j < n; ++j) crow[j] += aik * brow[j];
        }
    }
    return c;
}

Matrix transpose(const Matrix& a) {
    Matrix t(a.cols(), a.rows());
    for (int i = 0; i < a.rows(); ++i) {
        for (int j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
    }
    return t;
}

namespace {

void check_same_shape(const Matrix& a, const Matrix& b, const char* op) {
    if (!a.same_shape(b)) {
        throw std::invalid_argument(std::string(op) + ": shape mismatch: " + a.shape_str() +
                                    " vs " + b.shape_str());
    }
}

}  // namespace

Matrix add(const Matrix& a, const Matrix& b) {
    check_same_shape(a, b, "add");
    Matrix c = a;
    double* cd = c.data();
    const double* bd = b.data();
    for (std::size_t i = 0; i < c.size(); ++i) cd[i] += bd[i];
    return c;
}

Matrix sub(const Matrix& a, const Matrix& b) {
    check_same_shape(a, b, "sub");
    Matrix c = a;
    double* cd = c.data();
    const double* bd = b.data();
    for (std::size_t i = 0; i < c.size(); ++i) cd[i] -= bd[i];
    return c;
}

Matrix scale(const Matrix& a, double c) {
    Matrix r = a;
    double* rd = r.data();
    for (std::size_t i = 0; i < r.size(); ++i) rd[i] *= c;
    return r;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
    check_same_shape(a, b, "hadamard");
    Matrix c = a;
    double* cd = c.data();
    const double* bd = b.data();
    for (std::size_t i = 0; i < c.size(); ++i) cd[i] *= bd[i];
    return c;
}

namespace {

constexpr int kMaxJacobiSweeps = 100;
constexpr double kJacobiTol = 1e-14;

// One-sided Jacobi on the columns of a (rows >= cols). Rotations are
// accumulated into v; on return the columns of a are sigma_j * u_j.
void jacobi_orthogonalize(Matrix& a, Matrix& v, const std::string& shape) {
    const int m = a.rows(), n = a.cols();
    bool converged = (n == 1);
    for (int sweep = 0; sweep < kMaxJacobiSweeps && !converged; ++sweep) {
        converged = true;
        for (int i = 0; i < n - 1; ++i) {
            for (int j = i + 1; j < n; ++j) {
                double alpha = 0.0, beta = 0.0, gamma = 0.0;
                for (int r = 0; r < m; ++r) {
                    const double ai = a(r, i), aj = a(r, j);
                    alpha += ai * ai;
                    beta += aj * aj;
                    gamma += ai * aj;
                }
                if (gamma == 0.0) continue;
                if (std::abs(gamma) <= kJacobiTol * std::sqrt(alpha * beta)) continue;
                converged = false;
                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (int r = 0; r < m; ++r) {
                    const double ai = a(r, i), aj = a(r, j);
                    a(r, i) = c * ai - s * aj;
                    a(r, j) = s * ai + c * aj;
                }
                for (int r = 0; r < n; ++r) {
                    const double vi = v(r, i), vj = v(r, j);
                    v(r, i) = c * vi - s * vj;
                    v(r, j) = s * vi + c * vj;
                }
            }
        }
    }
    if (!converged) {
        throw std::runtime_error("svd: failed to converge within " +
                                 std::to_string(kMaxJacobiSweeps) + " sweeps for " + shape);
    }
}

// Fill column `col` of u with a unit vector orthogonal to columns [0, col).
// Candidates are scanned in a fixed order so the result is deterministic.
void complete_basis_column(Matrix& u, int col) {
    const int m = u.rows();
    std::vector<double> w(m);
    for (int cand = 0; cand < m; ++cand) {
        std::fill(w.begin(), w.end(), 0.0);
        w[cand] = 1.0;
        for (int k = 0; k < col; ++k) {
            double proj = 0.0;
            for (int r = 0; r < m; ++r) proj += u(r, k) * w[r];
            for (int r = 0; r < m; ++r) w[r] -= proj * u(r, k);
        }
        double norm = 0.0;
        for (double x : w) norm += x * x;
        norm = std::sqrt(norm);
        if (norm > 0.5) {
            for (int r = 0; r < m; ++r) u(r, col) = w[r] / norm;
            return;
        }
    }
    throw std::runtime_error("svd: basis completion failed");  // unreachable for col < m
}

}  // namespace

SvdResult svd(const Matrix& w) {
    if (w.empty()) throw std::invalid_argument("svd: empty matrix");
    if (!w.all_finite()) {
        throw std::invalid_argument("svd: non-finite entries in " + w.shape_str() + " input");
    }
    if (w.rows() < w.cols()) {
        SvdResult s = svd(transpose(w));
        return SvdResult{std::move(s.V), std::move(s.sigma), std::move(s.U)};
    }

    const int m = w.rows(), n = w.cols();
    Matrix a = w;
    Matrix v = Matrix::identity(n);
    jacobi_orthogonalize(a, v, w.shape_str());

    std::vector<double> norms(n);
    for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int r = 0; r < m; ++r) s += a(r, j) * a(r, j);
        norms[j] = std::sqrt(s);
    }

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int x, int y) { return norms[x] > norms[y]; });

    SvdResult out;
    out.U = Matrix(m, n);
    out.V = Matrix(n, n);
    out.sigma.resize(n);
    for (int j = 0; j < n; ++j) {
        const int src = order[j];
        const double sj = norms[src];
        out.sigma[j] = sj;
        if (sj >= std::numeric_limits<double>::min()) {
            for (int r = 0; r < m; ++r) out.U(r, j) = a(r, src) / sj;
        } else {
            complete_basis_column(out.U, j);
        }
        for (int r = 0; r < n; ++r) out.V(r, j) = v(r, src);
    }

    // Sign convention: largest-magnitude entry of each left singular vector is
    // positive. Keeps frames stable under small input perturbations.
    for (int j = 0; j < n; ++j) {
        int arg = 0;
        double best = std::abs(out.U(0, j));
        for (int r = 1; r < m; ++r) {
            const double v_abs = std::abs(out.U(r, j));
            if (v_abs > best) {
                best = v_abs;
                arg = r;
            }
        }
        if (out.U(arg, j) < 0.0) {
            for (int r = 0; r < m; ++r) out.U(r, j) = -out.U(r, j);
            for (int r = 0; r < n; ++r) out.V(r, j) = -out.V(r, j);
        }
    }
    return out;
}

TopK top_k(const SvdResult& s, int k) {
    if (k < 1) throw std::invalid_argument("top_k: k must be >= 1, got " + std::to_string(k));
    const int p = static_cast<int>(s.sigma.size());
    const int k_eff = std::min(k, p);
    TopK t;
    t.k_eff = k_eff;
    t.Uk = Matrix(s.U.rows(), k_eff);
    t.Vk = Matrix(s.V.rows(), k_eff);
    for (int r = 0; r < s.U.rows(); ++r) {
        for (int j = 0; j < k_eff; ++j) t.Uk(r, j) = s.U(r, j);
    }
    for (int r = 0; r < s.V.rows(); ++r) {
        for (int j = 0; j < k_eff; ++j) t.Vk(r, j) = s.V(r, j);
    }
    return t;
}

}  // namespace laln
