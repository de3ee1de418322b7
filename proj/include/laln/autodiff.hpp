// Copyright (c) 2026 The laln authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "laln/linalg.hpp"

namespace laln {

// A named tensor with an accumulated gradient. Frozen params (trainable ==
// false) never receive gradient or optimizer updates.
struct Param {
    Matrix value;
    Matrix grad;
    bool trainable = true;
    std::string name;

    Param() = default;
    Param(Matrix v, bool train, std::string n)
        : value(std::move(v)), grad(value.rows(), value.cols()), trainable(train),
          name(std::move(n)) {}

    void zero_grad() {
        std::fill(grad.data(), grad.data() + grad.size(), 0.0);
    }
};

enum class OpKind : std::uint8_t {
    kLeaf,
    kConst,
    kMatmul,
    kAdd,
    kBiasAdd,
    kScale,
    kScaleCols,
    kGelu,
    kLayerNorm,
    kSoftmaxRows,
    kAttention,
    kTranspose,
    kReshape,
    kPermute,
    kSlice,
    kConcatRows,
    kConcatCols,
    kHadamard,
    kDiag,
    kMean,
    kL1Loss,
    kSvdU,
    kSvdV,
};

const char* op_name(OpKind k);

// Eager reverse-mode tape. Node values are computed at record time (so
// recording code may inspect them, e.g. for sign decisions); backward()
// accumulates cotangents in reverse topological order and adds leaf
// cotangents into Param::grad. One tape per training step, single-threaded.
class Tape {
 public:
    int leaf(Param& p);
    int constant(Matrix value);

    int matmul(int a, int b);
    int add(int a, int b);
    int bias_add(int x, int bias);  // bias broadcast over rows
    int scale(int a, double c);
    // Column i multiplied by the constant signs[i]; the constants are not
    // differentiated through.
    int scale_cols(int a, std::vector<double> signs);
    int gelu(int a);
    int layer_norm(int x, int gamma, int beta);
    int softmax_rows(int a);
    // Multi-head scaled dot-product self-attention over `batch` stacked
    // token blocks of (rows/batch) tokens each.
    int attention(int q, int k, int v, int heads, int batch);
    int transpose(int a);
    int reshape(int a, int rows, int cols);
    // Bijective reindex: out.data[i] = in.data[map[i]].
    int permute(int a, std::shared_ptr<const std::vector<int>> map, int rows, int cols);
    int slice(int a, int r0, int r1, int c0, int c1);  // half-open ranges
    int concat_rows(const std::vector<int>& parts);
    int concat_cols(const std::vector<int>& parts);
    int hadamard(int a, int b);
    int diag(int a);  // square matrix -> 1 x n diagonal
    int mean(int a);  // -> 1 x 1
    int l1_loss(int a, int b);  // mean absolute difference -> 1 x 1

    // Forward: economy SVD of the node value followed by a top-k slice.
    // Returns the (Uk, Vk) node pair; both share one SVD factorization and
    // their backward passes add the two halves of the SVD cotangent.
    std::pair<int, int> svd_topk(int w, int k);

    const Matrix& value(int node) const { return nodes_[node].value; }
    // Cotangent of a node after backward(); empty matrix if none reached it.
    const Matrix& cotangent(int node) const { return nodes_[node].grad; }

    // Seeds the scalar loss node with 1 and accumulates Param::grad (+=) for
    // every reachable trainable leaf. May be called more than once per tape
    // to compose losses.
    void backward(int loss);

    int node_count() const { return static_cast<int>(nodes_.size()); }

 private:
    struct Node {
        OpKind kind;
        std::vector<int> in;
        Matrix value;
        Matrix grad;
        double scalar = 0.0;
        int i0 = 0, i1 = 0, i2 = 0, i3 = 0;
        std::vector<double> col_consts;
        std::shared_ptr<const std::vector<int>> perm;
        std::shared_ptr<const SvdResult> svd;
        std::vector<Matrix> stash;
        Param* param = nullptr;
    };

    int push(Node n);
    Node& at(int id) { return nodes_[id]; }
    void accumulate(int node, const Matrix& g);
    void backward_node(int id);

    std::vector<Node> nodes_;
};

// The gradient of the SVD top-k node with respect to its input, given the
// cotangent of Uk (u_side = true) or Vk. Exposed for direct testing.
Matrix svd_topk_backward(const SvdResult& s, const Matrix& cot, int k_eff, bool u_side);

}  // namespace laln
