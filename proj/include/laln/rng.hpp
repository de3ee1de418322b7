// Copyright (c) 2026 The laln authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace laln {

// splitmix64 finalizer; used to derive independent seed streams.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag, std::uint64_t index) {
    return mix64(mix64(base ^ (tag * 0xd1342543de82ef95ULL)) + index);
}

// Stream tags. Evaluation seeds are independent of the run seed so metrics
// stay paired across runs and modes.
namespace seed_tag {
inline constexpr std::uint64_t kModelInit = 0x01;
inline constexpr std::uint64_t kAdapterInit = 0x02;
inline constexpr std::uint64_t kTrainData = 0x03;
inline constexpr std::uint64_t kTaskPick = 0x04;
inline constexpr std::uint64_t kCleanImage = 0x05;
inline constexpr std::uint64_t kDegrade = 0x06;
inline constexpr std::uint64_t kEvalData = 0xE7A1;
}  // namespace seed_tag

// Deterministic generator. Transforms are written out explicitly instead of
// using std::*_distribution, whose streams are implementation-defined.
class Rng {
 public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    // uniform in [0, 1)
    double uniform() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // inclusive bounds
    int uniform_int(int lo, int hi) {
        const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<int>(gen_() % span);
    }

    double gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        constexpr double kTwoPi = 6.283185307179586476925286766559;
        spare_ = radius * std::sin(kTwoPi * u2);
        has_spare_ = true;
        return radius * std::cos(kTwoPi * u2);
    }

    double gaussian(double mean, double stddev) { return mean + stddev * gaussian(); }

 private:
    std::mt19937_64 gen_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace laln
