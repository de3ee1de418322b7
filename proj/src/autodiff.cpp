// Copyright (c) 2026 The laln authors
// SPDX-License-Identifier: Apache-2.0

#include "laln/autodiff.hpp"

#include <cmath>
#include <stdexcept>

namespace laln {

const char* op_name(OpKind k) {
    switch (k) {
        case OpKind::kLeaf: return "leaf";
        case OpKind::kConst: return "const";
        case OpKind::kMatmul: return "matmul";
        case OpKind::kAdd: return "add";
        case OpKind::kBiasAdd: return "bias-add";
        case OpKind::kScale: return "scale";
        case OpKind::kScaleCols: return "scale-cols";
        case OpKind::kGelu: return "gelu";
        case OpKind::kLayerNorm: return "layer-norm";
        case OpKind::kSoftmaxRows: return "softmax-rows";
        case OpKind::kAttention: return "attention";
        case OpKind::kTranspose: return "transpose";
        case OpKind::kReshape: return "reshape";
        case OpKind::kPermute: return "permute";
        case OpKind::kSlice: return "slice";
        case OpKind::kConcatRows: return "concat-rows";
        case OpKind::kConcatCols: return "concat-cols";
        case OpKind::kHadamard: return "hadamard";
        case OpKind::kDiag: return "diag";
        case OpKind::kMean: return "mean";
        case OpKind::kL1Loss: return "l1-loss";
        case OpKind::kSvdU: return "svd-topk-u";
        case OpKind::kSvdV: return "svd-topk-v";
    }
    return "?";
}

namespace {

constexpr double kLayerNormEps = 1e-5;

[[noreturn]] void shape_error(OpKind kind, const std::string& detail) {
    throw std::invalid_argument(std::string(op_name(kind)) + ": " + detail);
}

double gelu_value(double x) {
    return 0.5 * x * (1.0 + std::erf(x * 0.7071067811865475244));
}

double gelu_derivative(double x) {
    constexpr double kInvSqrt2Pi = 0.3989422804014326779;
    return 0.5 * (1.0 + std::erf(x * 0.7071067811865475244)) +
           x * kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

Matrix softmax_rows_value(const Matrix& x) {
    Matrix y(x.rows(), x.cols());
    for (int i = 0; i < x.rows(); ++i) {
        double mx = x(i, 0);
        for (int j = 1; j < x.cols(); ++j) mx = std::max(mx, x(i, j));
        double sum = 0.0;
        for (int j = 0; j < x.cols(); ++j) {
            const double e = std::exp(x(i, j) - mx);
            y(i, j) = e;
            sum += e;
        }
        for (int j = 0; j < x.cols(); ++j) y(i, j) /= sum;
    }
    return y;
}

Matrix softmax_rows_vjp(const Matrix& y, const Matrix& gy) {
    Matrix gx(y.rows(), y.cols());
    for (int i = 0; i < y.rows(); ++i) {
        double dot = 0.0;
        for (int j = 0; j < y.cols(); ++j) dot += gy(i, j) * y(i, j);
        for (int j = 0; j < y.cols(); ++j) gx(i, j) = y(i, j) * (gy(i, j) - dot);
    }
    return gx;
}

Matrix block(const Matrix& src, int r0, int rows, int c0, int cols) {
    Matrix out(rows, cols);
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) out(i, j) = src(r0 + i, c0 + j);
    }
    return out;
}

void add_block(Matrix& dst, const Matrix& g, int r0, int c0) {
    for (int i = 0; i < g.rows(); ++i) {
        for (int j = 0; j < g.cols(); ++j) dst(r0 + i, c0 + j) += g(i, j);
    }
}

}  // namespace

int Tape::push(Node n) {
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size()) - 1;
}

int Tape::leaf(Param& p) {
    Node n;
    n.kind = OpKind::kLeaf;
    n.value = p.value;
    n.param = &p;
    return push(std::move(n));
}

int Tape::constant(Matrix value) {
    Node n;
    n.kind = OpKind::kConst;
    n.value = std::move(value);
    return push(std::move(n));
}

int Tape::matmul(int a, int b) {
    Node n;
    n.kind = OpKind::kMatmul;
    n.in = {a, b};
    n.value = laln::matmul(at(a).value, at(b).value);  // throws with shapes on mismatch
    return push(std::move(n));
}

int Tape::add(int a, int b) {
    if (!at(a).value.same_shape(at(b).value)) {
        shape_error(OpKind::kAdd, "shape mismatch: " + at(a).value.shape_str() + " vs " +
                                      at(b).value.shape_str());
    }
    Node n;
    n.kind = OpKind::kAdd;
    n.in = {a, b};
    n.value = laln::add(at(a).value, at(b).value);
    return push(std::move(n));
}

int Tape::bias_add(int x, int bias) {
    const Matrix& xv = at(x).value;
    const Matrix& bv = at(bias).value;
    if (bv.rows() != 1 || bv.cols() != xv.cols()) {
        shape_error(OpKind::kBiasAdd, "bias " + bv.shape_str() + " does not broadcast over " +
                                          xv.shape_str());
    }
    Node n;
    n.kind = OpKind::kBiasAdd;
    n.in = {x, bias};
    n.value = xv;
    for (int i = 0; i < n.value.rows(); ++i) {
        for (int j = 0; j < n.value.cols(); ++j) n.value(i, j) += bv(0, j);
    }
    return push(std::move(n));
}

int Tape::scale(int a, double c) {
    Node n;
    n.kind = OpKind::kScale;
    n.in = {a};
    n.scalar = c;
    n.value = laln::scale(at(a).value, c);
    return push(std::move(n));
}

int Tape::scale_cols(int a, std::vector<double> signs) {
    const Matrix& av = at(a).value;
    if (static_cast<int>(signs.size()) != av.cols()) {
        shape_error(OpKind::kScaleCols, "got " + std::to_string(signs.size()) +
                                            " constants for " + av.shape_str());
    }
    Node n;
    n.kind = OpKind::kScaleCols;
    n.in = {a};
    n.value = av;
    for (int i = 0; i < av.rows(); ++i) {
        for (int j = 0; j < av.cols(); ++j) n.value(i, j) *= signs[j];
    }
    n.col_consts = std::move(signs);
    return push(std::move(n));
}

int Tape::gelu(int a) {
    Node n;
    n.kind = OpKind::kGelu;
    n.in = {a};
    const Matrix& av = at(a).value;
    n.value = Matrix(av.rows(), av.cols());
    for (std::size_t i = 0; i < av.size(); ++i) n.value.data()[i] = gelu_value(av.data()[i]);
    return push(std::move(n));
}

int Tape::layer_norm(int x, int gamma, int beta) {
    const Matrix& xv = at(x).value;
    const Matrix& gv = at(gamma).value;
    const Matrix& bv = at(beta).value;
    if (gv.rows() != 1 || bv.rows() != 1 || gv.cols() != xv.cols() || bv.cols() != xv.cols()) {
        shape_error(OpKind::kLayerNorm, "scale/offset must be 1x" + std::to_string(xv.cols()) +
                                            ", got " + gv.shape_str() + " and " + bv.shape_str());
    }
    const int d = xv.cols();
    Node n;
    n.kind = OpKind::kLayerNorm;
    n.in = {x, gamma, beta};
    n.value = Matrix(xv.rows(), d);
    Matrix xhat(xv.rows(), d);
    Matrix inv_std(xv.rows(), 1);
    for (int i = 0; i < xv.rows(); ++i) {
        double mu = 0.0;
        for (int j = 0; j < d; ++j) mu += xv(i, j);
        mu /= d;
        double var = 0.0;
        for (int j = 0; j < d; ++j) {
            const double c = xv(i, j) - mu;
            var += c * c;
        }
        var /= d;
        const double inv = 1.0 / std::sqrt(var + kLayerNormEps);
        inv_std(i, 0) = inv;
        for (int j = 0; j < d; ++j) {
            const double h = (xv(i, j) - mu) * inv;
            xhat(i, j) = h;
            n.value(i, j) = gv(0, j) * h + bv(0, j);
        }
    }
    n.stash.push_back(std::move(xhat));
    n.stash.push_back(std::move(inv_std));
    return push(std::move(n));
}

int Tape::softmax_rows(int a) {
    Node n;
    n.kind = OpKind::kSoftmaxRows;
    n.in = {a};
    n.value = softmax_rows_value(at(a).value);
    return push(std::move(n));
}

int Tape::attention(int q, int k, int v, int heads, int batch) {
    const Matrix& qv = at(q).value;
    const Matrix& kv = at(k).value;
    const Matrix& vv = at(v).value;
    if (!qv.same_shape(kv) || !qv.same_shape(vv)) {
        shape_error(OpKind::kAttention, "q/k/v shapes differ: " + qv.shape_str() + ", " +
                                            kv.shape_str() + ", " + vv.shape_str());
    }
    if (heads < 1 || batch < 1 || qv.rows() % batch != 0 || qv.cols() % heads != 0) {
        shape_error(OpKind::kAttention, "rows " + std::to_string(qv.rows()) +
                                            " / batch " + std::to_string(batch) + " or cols " +
                                            std::to_string(qv.cols()) + " / heads " +
                                            std::to_string(heads) + " do not divide");
    }
    const int tokens = qv.rows() / batch;
    const int dh = qv.cols() / heads;
    const double att_scale = 1.0 / std::sqrt(static_cast<double>(dh));

    Node n;
    n.kind = OpKind::kAttention;
    n.in = {q, k, v};
    n.i0 = heads;
    n.i1 = batch;
    n.value = Matrix(qv.rows(), qv.cols());
    n.stash.reserve(static_cast<std::size_t>(batch) * heads);
    for (int item = 0; item < batch; ++item) {
        const int r0 = item * tokens;
        for (int h = 0; h < heads; ++h) {
            const int c0 = h * dh;
            Matrix qb = block(qv, r0, tokens, c0, dh);
            Matrix kb = block(kv, r0, tokens, c0, dh);
            Matrix vb = block(vv, r0, tokens, c0, dh);
            Matrix scores = laln::scale(laln::matmul(qb, laln::transpose(kb)), att_scale);
            Matrix probs = softmax_rows_value(scores);
            Matrix out = laln::matmul(probs, vb);
            add_block(n.value, out, r0, c0);
            n.stash.push_back(std::move(probs));
        }
    }
    return push(std::move(n));
}

int Tape::transpose(int a) {
    Node n;
    n.kind = OpKind::kTranspose;
    n.in = {a};
    n.value = laln::transpose(at(a).value);
    return push(std::move(n));
}

int Tape::reshape(int a, int rows, int cols) {
    const Matrix& av = at(a).value;
    if (static_cast<std::size_t>(rows) * cols != av.size()) {
        shape_error(OpKind::kReshape, av.shape_str() + " cannot reshape to " +
                                          std::to_string(rows) + "x" + std::to_string(cols));
    }
    Node n;
    n.kind = OpKind::kReshape;
    n.in = {a};
    n.value = Matrix(rows, cols);
    std::copy(av.data(), av.data() + av.size(), n.value.data());
    return push(std::move(n));
}

int Tape::permute(int a, std::shared_ptr<const std::vector<int>> map, int rows, int cols) {
    const Matrix& av = at(a).value;
    if (!map || map->size() != static_cast<std::size_t>(rows) * cols) {
        shape_error(OpKind::kPermute, "index map size does not match " + std::to_string(rows) +
                                          "x" + std::to_string(cols));
    }
    Node n;
    n.kind = OpKind::kPermute;
    n.in = {a};
    n.value = Matrix(rows, cols);
    const auto& idx = *map;
    for (std::size_t i = 0; i < idx.size(); ++i) n.value.data()[i] = av.data()[idx[i]];
    n.perm = std::move(map);
    return push(std::move(n));
}

int Tape::slice(int a, int r0, int r1, int c0, int c1) {
    const Matrix& av = at(a).value;
    if (r0 < 0 || c0 < 0 || r1 > av.rows() || c1 > av.cols() || r0 >= r1 || c0 >= c1) {
        shape_error(OpKind::kSlice, "range [" + std::to_string(r0) + "," + std::to_string(r1) +
                                        ")x[" + std::to_string(c0) + "," + std::to_string(c1) +
                                        ") out of " + av.shape_str());
    }
    Node n;
    n.kind = OpKind::kSlice;
    n.in = {a};
    n.i0 = r0;
    n.i1 = r1;
    n.i2 = c0;
    n.i3 = c1;
    n.value = block(av, r0, r1 - r0, c0, c1 - c0);
    return push(std::move(n));
}

int Tape::concat_rows(const std::vector<int>& parts) {
    if (parts.empty()) shape_error(OpKind::kConcatRows, "no inputs");
    int rows = 0;
    const int cols = at(parts[0]).value.cols();
    for (int p : parts) {
        if (at(p).value.cols() != cols) {
            shape_error(OpKind::kConcatRows, "column counts differ");
        }
        rows += at(p).value.rows();
    }
    Node n;
    n.kind = OpKind::kConcatRows;
    n.in = parts;
    n.value = Matrix(rows, cols);
    int r = 0;
    for (int p : parts) {
        add_block(n.value, at(p).value, r, 0);
        r += at(p).value.rows();
    }
    return push(std::move(n));
}

int Tape::concat_cols(const std::vector<int>& parts) {
    if (parts.empty()) shape_error(OpKind::kConcatCols, "no inputs");
    int cols = 0;
    const int rows = at(parts[0]).value.rows();
    for (int p : parts) {
        if (at(p).value.rows() != rows) {
            shape_error(OpKind::kConcatCols, "row counts differ");
        }
        cols += at(p).value.cols();
    }
    Node n;
    n.kind = OpKind::kConcatCols;
    n.in = parts;
    n.value = Matrix(rows, cols);
    int c = 0;
    for (int p : parts) {
        add_block(n.value, at(p).value, 0, c);
        c += at(p).value.cols();
    }
    return push(std::move(n));
}

int Tape::hadamard(int a, int b) {
    Node n;
    n.kind = OpKind::kHadamard;
    n.in = {a, b};
    n.value = laln::hadamard(at(a).value, at(b).value);
    return push(std::move(n));
}

int Tape::diag(int a) {
    const Matrix& av = at(a).value;
    if (av.rows() != av.cols()) {
        shape_error(OpKind::kDiag, "matrix must be square, got " + av.shape_str());
    }
    Node n;
    n.kind = OpKind::kDiag;
    n.in = {a};
    n.value = Matrix(1, av.cols());
    for (int j = 0; j < av.cols(); ++j) n.value(0, j) = av(j, j);
    return push(std::move(n));
}

int Tape::mean(int a) {
    Node n;
    n.kind = OpKind::kMean;
    n.in = {a};
    const Matrix& av = at(a).value;
    double s = 0.0;
    for (std::size_t i = 0; i < av.size(); ++i) s += av.data()[i];
    n.value = Matrix(1, 1);
    n.value(0, 0) = s / static_cast<double>(av.size());
    return push(std::move(n));
}

int Tape::l1_loss(int a, int b) {
    const Matrix& av = at(a).value;
    const Matrix& bv = at(b).value;
    if (!av.same_shape(bv)) {
        shape_error(OpKind::kL1Loss, "shape mismatch: " + av.shape_str() + " vs " +
                                         bv.shape_str());
    }
    Node n;
    n.kind = OpKind::kL1Loss;
    n.in = {a, b};
    double s = 0.0;
    for (std::size_t i = 0; i < av.size(); ++i) s += std::abs(av.data()[i] - bv.data()[i]);
    n.value = Matrix(1, 1);
    n.value(0, 0) = s / static_cast<double>(av.size());
    return push(std::move(n));
}

std::pair<int, int> Tape::svd_topk(int w, int k) {
    if (k < 1) {
        throw std::invalid_argument("svd-topk: k must be >= 1, got " + std::to_string(k));
    }
    auto factor = std::make_shared<SvdResult>(laln::svd(at(w).value));
    TopK t = laln::top_k(*factor, k);

    Node nu;
    nu.kind = OpKind::kSvdU;
    nu.in = {w};
    nu.value = std::move(t.Uk);
    nu.i0 = t.k_eff;
    nu.svd = factor;
    const int u_id = push(std::move(nu));

    Node nv;
    nv.kind = OpKind::kSvdV;
    nv.in = {w};
    nv.value = std::move(t.Vk);
    nv.i0 = t.k_eff;
    nv.svd = factor;
    const int v_id = push(std::move(nv));
    return {u_id, v_id};
}

void Tape::accumulate(int node, const Matrix& g) {
    Node& n = nodes_[node];
    if (n.grad.empty()) {
        n.grad = g;
    } else {
        double* d = n.grad.data();
        const double* s = g.data();
        for (std::size_t i = 0; i < n.grad.size(); ++i) d[i] += s[i];
    }
}

Matrix svd_topk_backward(const SvdResult& s, const Matrix& cot, int k_eff, bool u_side) {
    const int m = s.U.rows();
    const int n = s.V.rows();
    const int p = static_cast<int>(s.sigma.size());
    const double sigma0 = s.sigma.empty() ? 0.0 : s.sigma[0];
    if (sigma0 == 0.0) return Matrix(m, n);

    const double eps_gap = 1e-10 * sigma0 * sigma0;
    const double rank_tol = 1e-12 * sigma0;
    std::vector<double> sigma_plus(p);
    for (int i = 0; i < p; ++i) sigma_plus[i] = s.sigma[i] > rank_tol ? 1.0 / s.sigma[i] : 0.0;

    const Matrix& side = u_side ? s.U : s.V;
    const int side_rows = u_side ? m : n;

    // Zero-pad the top-k cotangent to all p columns.
    Matrix bar(side_rows, p);
    for (int i = 0; i < side_rows; ++i) {
        for (int j = 0; j < k_eff; ++j) bar(i, j) = cot(i, j);
    }

    Matrix proj = matmul(transpose(side), bar);  // p x p

    // F o proj with F_ij = 1 / (sigma_j^2 - sigma_i^2), gap-regularized.
    Matrix coupled(p, p);
    for (int i = 0; i < p; ++i) {
        for (int j = 0; j < p; ++j) {
            if (i == j) continue;
            double d = s.sigma[j] * s.sigma[j] - s.sigma[i] * s.sigma[i];
            if (std::abs(d) < eps_gap) d = (d < 0.0) ? -eps_gap : eps_gap;
            coupled(i, j) = proj(i, j) / d;
        }
    }

    Matrix sym(p, p);  // (J + J^T), scaled by sigma on the matching side
    for (int i = 0; i < p; ++i) {
        for (int j = 0; j < p; ++j) {
            const double v = coupled(i, j) + coupled(j, i);
            sym(i, j) = u_side ? v * s.sigma[j] : s.sigma[i] * v;
        }
    }
    Matrix core = matmul(s.U, matmul(sym, transpose(s.V)));

    // Orthogonal-complement term: (I - side side^T) bar, column-scaled by sigma^+.
    Matrix resid = sub(bar, matmul(side, proj));
    for (int i = 0; i < side_rows; ++i) {
        for (int j = 0; j < p; ++j) resid(i, j) *= sigma_plus[j];
    }
    Matrix tail = u_side ? matmul(resid, transpose(s.V)) : matmul(s.U, transpose(resid));
    return add(core, tail);
}

void Tape::backward_node(int id) {
    Node& n = nodes_[id];
    const Matrix& g = n.grad;
    switch (n.kind) {
        case OpKind::kLeaf: {
            if (n.param != nullptr && n.param->trainable) {
                double* d = n.param->grad.data();
                const double* src = g.data();
                for (std::size_t i = 0; i < g.size(); ++i) d[i] += src[i];
            }
            break;
        }
        case OpKind::kConst:
            break;
        case OpKind::kMatmul: {
            const Matrix& a = nodes_[n.in[0]].value;
            const Matrix& b = nodes_[n.in[1]].value;
            accumulate(n.in[0], laln::matmul(g, laln::transpose(b)));
            accumulate(n.in[1], laln::matmul(laln::transpose(a), g));
            break;
        }
        case OpKind::kAdd: {
            accumulate(n.in[0], g);
            accumulate(n.in[1], g);
            break;
        }
        case OpKind::kBiasAdd: {
            accumulate(n.in[0], g);
            Matrix gb(1, g.cols());
            for (int i = 0; i < g.rows(); ++i) {
                for (int j = 0; j < g.cols(); ++j) gb(0, j) += g(i, j);
            }
            accumulate(n.in[1], gb);
            break;
        }
        case OpKind::kScale: {
            accumulate(n.in[0], laln::scale(g, n.scalar));
            break;
        }
        case OpKind::kScaleCols: {
            Matrix gx = g;
            for (int i = 0; i < gx.rows(); ++i) {
                for (int j = 0; j < gx.cols(); ++j) gx(i, j) *= n.col_consts[j];
            }
            accumulate(n.in[0], gx);
            break;
        }
        case OpKind::kGelu: {
            const Matrix& x = nodes_[n.in[0]].value;
            Matrix gx(x.rows(), x.cols());
            for (std::size_t i = 0; i < x.size(); ++i) {
                gx.data()[i] = g.data()[i] * gelu_derivative(x.data()[i]);
            }
            accumulate(n.in[0], gx);
            break;
        }
        case OpKind::kLayerNorm: {
            const Matrix& xhat = n.stash[0];
            const Matrix& inv_std = n.stash[1];
            const Matrix& gv = nodes_[n.in[1]].value;
            const int d = xhat.cols();
            Matrix gx(xhat.rows(), d);
            Matrix ggamma(1, d);
            Matrix gbeta(1, d);
            for (int i = 0; i < xhat.rows(); ++i) {
                double sum1 = 0.0, sum2 = 0.0;
                for (int j = 0; j < d; ++j) {
                    const double gh = g(i, j) * gv(0, j);
                    sum1 += gh;
                    sum2 += gh * xhat(i, j);
                }
                const double inv = inv_std(i, 0);
                for (int j = 0; j < d; ++j) {
                    const double gh = g(i, j) * gv(0, j);
                    gx(i, j) = inv * (gh - sum1 / d - xhat(i, j) * sum2 / d);
                    ggamma(0, j) += g(i, j) * xhat(i, j);
                    gbeta(0, j) += g(i, j);
                }
            }
            accumulate(n.in[0], gx);
            accumulate(n.in[1], ggamma);
            accumulate(n.in[2], gbeta);
            break;
        }
        case OpKind::kSoftmaxRows: {
            accumulate(n.in[0], softmax_rows_vjp(n.value, g));
            break;
        }
        case OpKind::kAttention: {
            const Matrix& qv = nodes_[n.in[0]].value;
            const Matrix& kv = nodes_[n.in[1]].value;
            const Matrix& vv = nodes_[n.in[2]].value;
            const int heads = n.i0, batch = n.i1;
            const int tokens = qv.rows() / batch;
            const int dh = qv.cols() / heads;
            const double att_scale = 1.0 / std::sqrt(static_cast<double>(dh));
            Matrix gq(qv.rows(), qv.cols());
            Matrix gk(qv.rows(), qv.cols());
            Matrix gv(qv.rows(), qv.cols());
            for (int item = 0; item < batch; ++item) {
                const int r0 = item * tokens;
                for (int h = 0; h < heads; ++h) {
                    const int c0 = h * dh;
                    const Matrix& probs = n.stash[static_cast<std::size_t>(item) * heads + h];
                    Matrix qb = block(qv, r0, tokens, c0, dh);
                    Matrix kb = block(kv, r0, tokens, c0, dh);
                    Matrix vb = block(vv, r0, tokens, c0, dh);
                    Matrix go = block(g, r0, tokens, c0, dh);
                    Matrix gvb = laln::matmul(laln::transpose(probs), go);
                    Matrix gp = laln::matmul(go, laln::transpose(vb));
                    Matrix gs = laln::scale(softmax_rows_vjp(probs, gp), att_scale);
                    Matrix gqb = laln::matmul(gs, kb);
                    Matrix gkb = laln::matmul(laln::transpose(gs), qb);
                    add_block(gq, gqb, r0, c0);
                    add_block(gk, gkb, r0, c0);
                    add_block(gv, gvb, r0, c0);
                }
            }
            accumulate(n.in[0], gq);
            accumulate(n.in[1], gk);
            accumulate(n.in[2], gv);
            break;
        }
        case OpKind::kTranspose: {
            accumulate(n.in[0], laln::transpose(g));
            break;
        }
        case OpKind::kReshape: {
            const Matrix& x = nodes_[n.in[0]].value;
            Matrix gx(x.rows(), x.cols());
            std::copy(g.data(), g.data() + g.size(), gx.data());
            accumulate(n.in[0], gx);
            break;
        }
        case OpKind::kPermute: {
            const Matrix& x = nodes_[n.in[0]].value;
            Matrix gx(x.rows(), x.cols());
            const auto& idx = *n.perm;
            for (std::size_t i = 0; i < idx.size(); ++i) gx.data()[idx[i]] += g.data()[i];
            accumulate(n.in[0], gx);
            break;
        }
        case OpKind::kSlice: {
            const Matrix& x = nodes_[n.in[0]].value;
            Matrix gx(x.rows(), x.cols());
            add_block(gx, g, n.i0, n.i2);
            accumulate(n.in[0], gx);
            break;
        }
        case OpKind::kConcatRows: {
            int r = 0;
            for (int p : n.in) {
                const Matrix& pv = nodes_[p].value;
                accumulate(p, block(g, r, pv.rows(), 0, pv.cols()));
                r += pv.rows();
            }
            break;
        }
        case OpKind::kConcatCols: {
            int c = 0;
            for (int p : n.in) {
                const Matrix& pv = nodes_[p].value;
                accumulate(p, block(g, 0, pv.rows(), c, pv.cols()));
                c += pv.cols();
            }
            break;
        }
        case OpKind::kHadamard: {
            accumulate(n.in[0], laln::hadamard(g, nodes_[n.in[1]].value));
            accumulate(n.in[1], laln::hadamard(g, nodes_[n.in[0]].value));
            break;
        }
        case OpKind::kDiag: {
            const Matrix& x = nodes_[n.in[0]].value;
            Matrix gx(x.rows(), x.cols());
            for (int j = 0; j < x.cols(); ++j) gx(j, j) = g(0, j);
            accumulate(n.in[0], gx);
            break;
        }
        case OpKind::kMean: {
            const Matrix& x = nodes_[n.in[0]].value;
            const double c = g(0, 0) / static_cast<double>(x.size());
            accumulate(n.in[0], Matrix::filled(x.rows(), x.cols(), c));
            break;
        }
        case OpKind::kL1Loss: {
            const Matrix& a = nodes_[n.in[0]].value;
            const Matrix& b = nodes_[n.in[1]].value;
            const double c = g(0, 0) / static_cast<double>(a.size());
            Matrix ga(a.rows(), a.cols());
            for (std::size_t i = 0; i < a.size(); ++i) {
                const double d = a.data()[i] - b.data()[i];
                // subgradient at the kink is 0
                ga.data()[i] = d > 0.0 ? c : (d < 0.0 ? -c : 0.0);
            }
            accumulate(n.in[0], ga);
            accumulate(n.in[1], laln::scale(ga, -1.0));
            break;
        }
        case OpKind::kSvdU:
        case OpKind::kSvdV: {
            accumulate(n.in[0],
                       svd_topk_backward(*n.svd, g, n.i0, n.kind == OpKind::kSvdU));
            break;
        }
    }
}

void Tape::backward(int loss) {
    const Matrix& lv = nodes_[loss].value;
    if (lv.rows() != 1 || lv.cols() != 1) {
        throw std::invalid_argument("backward: loss node must be 1x1, got " + lv.shape_str());
    }
    for (Node& n : nodes_) n.grad = Matrix();
    nodes_[loss].grad = Matrix::filled(1, 1, 1.0);
    for (int id = loss; id >= 0; --id) {
        if (nodes_[id].grad.empty()) continue;
        backward_node(id);
    }
}

}  // namespace laln
