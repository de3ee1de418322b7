// Copyright (c) 2026 The laln authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "laln/linalg.hpp"
#include "laln/rng.hpp"

namespace laln {

// Images are 32x32 RGB in [0,1], stored as a 32x96 Matrix: row y, column
// x*3 + channel. Flattened row-major this matches the b x 3072 batch layout
// used by the model.
using Image = Matrix;

inline constexpr int kImageSize = 32;
inline constexpr int kChannels = 3;
inline constexpr int kImageFlat = kImageSize * kImageSize * kChannels;

enum class TaskKind { kFog, kRain, kSnow, kRaindrop };

const std::vector<TaskKind>& all_tasks();
const char* task_name(TaskKind kind);
TaskKind parse_task(const std::string& name);  // throws invalid_argument on unknown names

inline double& pixel(Image& img, int y, int x, int c) { return img(y, x * kChannels + c); }
inline double pixel(const Image& img, int y, int x, int c) { return img(y, x * kChannels + c); }

struct PairedSample {
    Image clean;
    Image degraded;
};

// Procedural clean image: smooth two-color gradient plus 3-6 anti-aliased
// rectangles and disks. Deterministic per seed, values clamped to [0,1].
Image gen_clean(std::uint64_t seed);

// Explicit-parameter degradation kernels; the sampling wrapper below draws
// parameters from the documented ranges.
Image add_fog(const Image& clean, double transmission);  // I' = t*I + (1-t)*0.8

struct RainStreak {
    double cx, cy;        // center, pixel coords
    double length;        // px
    double angle_deg;     // from the horizontal axis
    double intensity;
};
Image add_rain(const Image& clean, std::span<const RainStreak> streaks);

struct SnowBlob {
    double cx, cy;
    double radius;     // px; Gaussian falloff sigma = radius/2
    double intensity;
};
Image add_snow(const Image& clean, std::span<const SnowBlob> blobs);

struct RaindropSpot {
    double cx, cy;
    double radius;  // px; inside: 5x5 box blur, darkened by 0.85, soft 1 px edge
};
Image add_raindrops(const Image& clean, std::span<const RaindropSpot> spots);

// Samples degradation parameters from the per-kind ranges:
//   fog      transmission ~ U[0.3, 0.7]
//   rain     8-20 streaks, angle U[60,80] deg, intensity U[0.3,0.6], width 1 px
//   snow     10-30 blobs, radius U[1,2] px, intensity U[0.6,1.0]
//   raindrop 3-8 spots, radius U[3,6] px
Image degrade(const Image& clean, TaskKind kind, std::uint64_t seed);

// Clean + degraded pair for a sample seed; clean and degradation draw from
// independent derived streams.
PairedSample make_sample(TaskKind kind, std::uint64_t seed);

// Peak signal-to-noise ratio in dB for unit dynamic range, capped at 100
// when the MSE drops below 1e-10.
double psnr(const Image& a, const Image& b);

// SSIM with an 8x8 sliding window (stride 1), uniform weights, population
// moments, C1 = 0.01^2, C2 = 0.03^2; computed per channel then averaged.
double ssim(const Image& a, const Image& b);

// Batch packing: one flattened image per row.
Matrix pack_batch(std::span<const Image> images);
Image unpack_row(const Matrix& batch, int row);

// 8-bit RGB PNG export (values are treated as sRGB and clamped to [0,1]).
void write_png(const std::string& path, const Image& img);
// Grid export: images laid out row-major, `cols` per row, 1 px separator.
void write_png_grid(const std::string& path, std::span<const Image> images, int cols);

}  // namespace laln
