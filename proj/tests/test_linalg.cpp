// Copyright (c) 2026 The laln authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>

#include "support.hpp"

using namespace laln;
using namespace laln::test;

TEST_CASE("matmul: identity passthrough") {
    Rng rng(1);
    Matrix m = rand_matrix(rng, 2, 2);
    Matrix r = matmul(Matrix::identity(2), m);
    CHECK(bit_identical(r, m));
}

TEST_CASE("matmul: hand-computed product") {
    Matrix a = from_rows({{1, 2}, {3, 4}});
    Matrix b = from_rows({{0}, {1}});
    Matrix c = matmul(a, b);
    CHECK(c(0, 0) == 2.0);
    CHECK(c(1, 0) == 4.0);
}

TEST_CASE("matmul: matches naive triple loop") {
    Rng rng(7);
    Matrix a = rand_matrix(rng, 7, 5);
    Matrix b = rand_matrix(rng, 5, 3);
    CHECK(max_abs_diff(matmul(a, b), naive_matmul(a, b)) < 1e-12);
}

TEST_CASE("matmul: dimension mismatch names both shapes") {
    Matrix a(3, 4);
    Matrix b(5, 2);
    try {
        matmul(a, b);
        FAIL("expected throw");
    } catch (const std::invalid_argument& e) {
        const std::string msg = e.what();
        CHECK(msg.find("3x4") != std::string::npos);
        CHECK(msg.find("5x2") != std::string::npos);
    }
}

TEST_CASE("transpose: small cases and involution") {
    Matrix one(1, 1);
    one(0, 0) = 4.5;
    CHECK(bit_identical(transpose(one), one));

    Matrix row = from_rows({{1, 2, 3}});
    Matrix col = transpose(row);
    CHECK(col.rows() == 3);
    CHECK(col.cols() == 1);
    CHECK(col(1, 0) == 2.0);

    Rng rng(3);
    Matrix m = rand_matrix(rng, 4, 6);
    CHECK(bit_identical(transpose(transpose(m)), m));
}

TEST_CASE("svd: diagonal matrix") {
    Matrix w(2, 2);
    w(0, 0) = 3.0;
    w(1, 1) = 1.0;
    SvdResult s = svd(w);
    CHECK(s.sigma[0] == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(s.sigma[1] == doctest::Approx(1.0).epsilon(1e-12));
    // U and V are signed identities.
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            CHECK(std::abs(s.U(i, j)) == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-12));
            CHECK(std::abs(s.V(i, j)) == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("svd: zero matrix keeps invariants") {
    Matrix w(3, 2);
    SvdResult s = svd(w);
    CHECK(s.sigma[0] == 0.0);
    CHECK(s.sigma[1] == 0.0);
    CHECK(orthogonality_residual(s.U) <= 2e-10);
    CHECK(orthogonality_residual(s.V) <= 2e-10);
    CHECK(reconstruction_residual(w, s) <= 1e-9);
}

TEST_CASE("svd: random 8x5 invariants") {
    Rng rng(11);
    Matrix w = rand_matrix(rng, 8, 5);
    SvdResult s = svd(w);
    CHECK(orthogonality_residual(s.U) <= 2e-10);
    CHECK(orthogonality_residual(s.V) <= 2e-10);
    CHECK(reconstruction_residual(w, s) <= 1e-9 * std::max(1.0, w.frobenius_norm()));
    for (std::size_t i = 0; i + 1 < s.sigma.size(); ++i) CHECK(s.sigma[i] >= s.sigma[i + 1]);
}

TEST_CASE("svd: property sweep over random shapes up to 16x16") {
    Rng rng(2026);
    for (int iter = 0; iter < 120; ++iter) {
        const int m = rng.uniform_int(1, 16);
        const int n = rng.uniform_int(1, 16);
        Matrix w = rand_matrix(rng, m, n, -2.0, 2.0);
        SvdResult s = svd(w);
        CAPTURE(iter);
        CAPTURE(m);
        CAPTURE(n);
        CHECK(orthogonality_residual(s.U) <= 2e-10);
        CHECK(orthogonality_residual(s.V) <= 2e-10);
        CHECK(reconstruction_residual(w, s) <= 1e-9 * std::max(1.0, w.frobenius_norm()));
        for (std::size_t i = 0; i + 1 < s.sigma.size(); ++i) {
            CHECK(s.sigma[i] >= s.sigma[i + 1]);
        }
        for (double sv : s.sigma) CHECK(sv >= 0.0);
    }
}

TEST_CASE("svd: deterministic for a fixed input") {
    Rng rng(5);
    Matrix w = rand_matrix(rng, 6, 4);
    SvdResult a = svd(w);
    SvdResult b = svd(w);
    CHECK(bit_identical(a.U, b.U));
    CHECK(bit_identical(a.V, b.V));
    for (std::size_t i = 0; i < a.sigma.size(); ++i) CHECK(a.sigma[i] == b.sigma[i]);
}

TEST_CASE("svd: rejects non-finite input") {
    Matrix w(2, 2);
    w(0, 1) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(svd(w), std::invalid_argument);
}

TEST_CASE("svd: sigma1 matches power iteration") {
    Rng rng(13);
    Matrix w = matrix_with_spectrum(rng, 9, 6, {3.0, 2.0, 1.2, 0.8, 0.5, 0.3});
    SvdResult s = svd(w);
    const double pi = power_iteration_sigma1(w, 200);
    CHECK(std::abs(s.sigma[0] - pi) <= 1e-6 * s.sigma[0]);
}

TEST_CASE("top_k: leading columns and clamping") {
    Matrix w(2, 2);
    w(0, 0) = 3.0;
    w(1, 1) = 1.0;
    SvdResult s = svd(w);
    TopK t1 = top_k(s, 1);
    CHECK(t1.k_eff == 1);
    CHECK(t1.Uk.cols() == 1);
    CHECK(std::abs(t1.Uk(0, 0)) == doctest::Approx(1.0).epsilon(1e-12));

    Rng rng(4);
    SvdResult s4 = svd(rand_matrix(rng, 4, 4));
    CHECK(top_k(s4, 99).k_eff == 4);
    CHECK_THROWS_AS(top_k(s4, 0), std::invalid_argument);

    SvdResult s32 = svd(rand_matrix(rng, 32, 32, -0.5, 0.5));
    TopK t16 = top_k(s32, 16);
    CHECK(t16.k_eff == 16);
    CHECK(t16.Uk.cols() == 16);
    CHECK(t16.Vk.cols() == 16);
}

TEST_CASE("top_k: k_eff law over random shapes") {
    Rng rng(21);
    for (int iter = 0; iter < 30; ++iter) {
        const int m = rng.uniform_int(1, 12);
        const int n = rng.uniform_int(1, 12);
        const int k = rng.uniform_int(1, 20);
        SvdResult s = svd(rand_matrix(rng, m, n));
        CHECK(top_k(s, k).k_eff == std::min(k, std::min(m, n)));
    }
}
