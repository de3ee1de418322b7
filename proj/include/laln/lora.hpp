// Copyright (c) 2026 The laln authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "laln/autodiff.hpp"
#include "laln/linalg.hpp"

namespace laln {

// Low-rank update factors for one dense layer: delta-W = A * B with
// A (m x r) and B (r x n). B starts at zero so a freshly adapted layer
// computes exactly what the base layer does.
struct LoraAdapter {
    Param A;
    Param B;
    int rank = 0;
};

enum class LayerKind { kAttn, kMlp };
enum class Region { kEncoder, kDecoder };

// A dense layer with frozen base weights and an optional LoRA adapter.
// While an adapter is attached only its factors are trainable.
struct AdaptedLinear {
    std::string name;  // e.g. "enc.0.attn.qkv"
    Param W;           // m x n
    Param bias;        // 1 x n
    std::optional<LoraAdapter> adapter;
    LayerKind kind = LayerKind::kAttn;
    Region region = Region::kEncoder;

    int m() const { return W.value.rows(); }
    int n() const { return W.value.cols(); }
};

// Which layers receive adapters: region flags x layer-kind flags.
struct PlacementSpec {
    bool encoder = true;
    bool decoder = true;
    bool attention = true;
    bool mlp = true;

    void validate() const;  // at least one region and one kind
    std::string to_string() const;            // "enc+dec+attn+mlp"
    static PlacementSpec parse(const std::string& text);
    bool matches(Region region, LayerKind kind) const;
};

// A ~ N(0, 0.02^2) from the seeded generator, B = 0. Requires
// 1 <= r <= min(m, n).
LoraAdapter init_adapter(int m, int n, int r, std::uint64_t seed);

// Records x*W (+ bias) and, when an adapter is attached, adds the factored
// low-rank path (x*A)*B without ever materializing delta-W.
int lora_forward(Tape& tape, AdaptedLinear& layer, int x);

// W + A*B as a plain value; the layer is not modified.
Matrix merge(const AdaptedLinear& layer);

}  // namespace laln
