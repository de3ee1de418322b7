// Copyright (c) 2026 The laln authors
// SPDX-License-Identifier: Apache-2.0
//
// Shared test utilities and independent oracles. Everything here is kept
// deliberately naive so it can serve as a reference for the optimized
// implementations under test.

#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "laln/autodiff.hpp"
#include "laln/linalg.hpp"
#include "laln/rng.hpp"

namespace laln::test {

inline Matrix rand_matrix(Rng& rng, int rows, int cols, double lo = -1.0, double hi = 1.0) {
    Matrix m(rows, cols);
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) m(i, j) = rng.uniform(lo, hi);
    }
    return m;
}

inline Matrix from_rows(const std::vector<std::vector<double>>& rows) {
    Matrix m(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
    for (int i = 0; i < m.rows(); ++i) {
        for (int j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
    }
    return m;
}

// Textbook triple loop, i-j-k order.
inline Matrix naive_matmul(const Matrix& a, const Matrix& b) {
    Matrix c(a.rows(), b.cols());
    for (int i = 0; i < a.rows(); ++i) {
        for (int j = 0; j < b.cols(); ++j) {
            double s = 0.0;
            for (int k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
            c(i, j) = s;
        }
    }
    return c;
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
    double m = 0.0;
    for (int i = 0; i < a.rows(); ++i) {
        for (int j = 0; j < a.cols(); ++j) m = std::max(m, std::abs(a(i, j) - b(i, j)));
    }
    return m;
}

inline bool bit_identical(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a.data()[i] != b.data()[i]) return false;
    }
    return true;
}

// Spectral norm via power iteration on W^T W.
inline double power_iteration_sigma1(const Matrix& w, int steps = 200, unsigned seed = 99) {
    Rng rng(seed);
    Matrix v = rand_matrix(rng, w.cols(), 1);
    const Matrix wt = transpose(w);
    double sigma = 0.0;
    for (int s = 0; s < steps; ++s) {
        Matrix u = matmul(w, v);
        Matrix z = matmul(wt, u);
        double norm = z.frobenius_norm();
        if (norm == 0.0) return 0.0;
        for (std::size_t i = 0; i < z.size(); ++i) z.data()[i] /= norm;
        v = z;
        Matrix wv = matmul(w, v);
        sigma = wv.frobenius_norm();
    }
    return sigma;
}

// Random matrix with orthonormal columns (Gram-Schmidt on Gaussian draws).
inline Matrix random_orthonormal(Rng& rng, int rows, int cols) {
    Matrix q(rows, cols);
    for (int j = 0; j < cols; ++j) {
        std::vector<double> v(rows);
        for (int i = 0; i < rows; ++i) v[i] = rng.gaussian();
        for (int k = 0; k < j; ++k) {
            double proj = 0.0;
            for (int i = 0; i < rows; ++i) proj += q(i, k) * v[i];
            for (int i = 0; i < rows; ++i) v[i] -= proj * q(i, k);
        }
        double norm = 0.0;
        for (double x : v) norm += x * x;
        norm = std::sqrt(norm);
        for (int i = 0; i < rows; ++i) q(i, j) = v[i] / norm;
    }
    return q;
}

// Builds W = U diag(sigma) V^T with a prescribed spectrum.
inline Matrix matrix_with_spectrum(Rng& rng, int rows, int cols,
                                   const std::vector<double>& sigma) {
    const int p = std::min(rows, cols);
    Matrix u = random_orthonormal(rng, rows, p);
    Matrix v = random_orthonormal(rng, cols, p);
    Matrix us(rows, p);
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < p; ++j) us(i, j) = u(i, j) * sigma[j];
    }
    return matmul(us, transpose(v));
}

inline double orthogonality_residual(const Matrix& q) {
    Matrix qtq = matmul(transpose(q), q);
    for (int i = 0; i < qtq.rows(); ++i) qtq(i, i) -= 1.0;
    return qtq.frobenius_norm();
}

inline double reconstruction_residual(const Matrix& w, const SvdResult& s) {
    Matrix us = s.U;
    for (int i = 0; i < us.rows(); ++i) {
        for (int j = 0; j < us.cols(); ++j) us(i, j) *= s.sigma[j];
    }
    Matrix rec = matmul(us, transpose(s.V));
    return sub(rec, w).frobenius_norm();
}

// Central finite differences of a scalar-valued closure with respect to every
// entry of `x`. The closure must re-read x on each call.
inline Matrix fd_gradient(const std::function<double()>& f, Matrix& x, double h = 1e-5) {
    Matrix g(x.rows(), x.cols());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double saved = x.data()[i];
        x.data()[i] = saved + h;
        const double fp = f();
        x.data()[i] = saved - h;
        const double fm = f();
        x.data()[i] = saved;
        g.data()[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

struct GradMismatch {
    bool ok = true;
    int entry = -1;
    double analytic = 0.0;
    double fd = 0.0;
};

inline GradMismatch compare_gradients(const Matrix& analytic, const Matrix& fd,
                                      double rel = 1e-5, double abs_tol = 1e-8) {
    GradMismatch r;
    for (std::size_t i = 0; i < analytic.size(); ++i) {
        const double a = analytic.data()[i];
        const double b = fd.data()[i];
        const double tol = abs_tol + rel * std::max(std::abs(a), std::abs(b));
        if (std::abs(a - b) > tol) {
            r.ok = false;
            r.entry = static_cast<int>(i);
            r.analytic = a;
            r.fd = b;
            return r;
        }
    }
    return r;
}

// Runs one analytic backward pass and a finite-difference sweep over every
// listed parameter. `build` records the graph and returns the loss node.
inline void gradcheck(std::vector<Param*> params, const std::function<int(Tape&)>& build,
                      double rel = 1e-5, double abs_tol = 1e-8, double h = 1e-5) {
    for (Param* p : params) p->zero_grad();
    Tape tape;
    const int loss = build(tape);
    tape.backward(loss);

    auto eval = [&]() {
        Tape t;
        return t.value(build(t))(0, 0);
    };
    for (Param* p : params) {
        Matrix fd = fd_gradient(eval, p->value, h);
        GradMismatch m = compare_gradients(p->grad, fd, rel, abs_tol);
        if (!m.ok) {
            throw std::runtime_error("gradcheck failed for " + p->name + " entry " +
                                     std::to_string(m.entry) + ": analytic " +
                                     std::to_string(m.analytic) + " vs fd " +
                                     std::to_string(m.fd));
        }
    }
}

}  // namespace laln::test
