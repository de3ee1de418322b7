// Copyright (c) 2026 The laln authors
// SPDX-License-Identifier: Apache-2.0

#include "laln/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace laln {

const std::vector<TaskKind>& all_tasks() {
    static const std::vector<TaskKind> kinds = {TaskKind::kFog, TaskKind::kRain,
                                                TaskKind::kSnow, TaskKind::kRaindrop};
    return kinds;
}

const char* task_name(TaskKind kind) {
    switch (kind) {
        case TaskKind::kFog: return "fog";
        case TaskKind::kRain: return "rain";
        case TaskKind::kSnow: return "snow";
        case TaskKind::kRaindrop: return "raindrop";
    }
    return "?";
}

TaskKind parse_task(const std::string& name) {
    for (TaskKind k : all_tasks()) {
        if (name == task_name(k)) return k;
    }
    throw std::invalid_argument("unknown task kind: '" + name + "' (expected fog, rain, snow "
                                "or raindrop)");
}

namespace {

constexpr double kFogAirlight = 0.8;
constexpr double kRaindropDarken = 0.85;

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

void clamp_image(Image& img) {
    for (std::size_t i = 0; i < img.size(); ++i) img.data()[i] = clamp01(img.data()[i]);
}

// Axis-aligned coverage of the unit pixel footprint [p-0.5, p+0.5] by the
// interval [lo, hi].
double interval_coverage(double p, double lo, double hi) {
    return std::clamp(std::min(p + 0.5, hi) - std::max(p - 0.5, lo), 0.0, 1.0);
}

struct Shape {
    bool is_disk;
    double cx, cy;
    double rx, ry;  // radius / half extents
    double color[3];
};

double shape_alpha(const Shape& s, int x, int y) {
    if (s.is_disk) {
        const double d = std::hypot(x - s.cx, y - s.cy);
        return std::clamp(s.rx + 0.5 - d, 0.0, 1.0);
    }
    return interval_coverage(x, s.cx - s.rx, s.cx + s.rx) *
           interval_coverage(y, s.cy - s.ry, s.cy + s.ry);
}

}  // namespace

Image gen_clean(std::uint64_t seed) {
    Rng rng(seed);
    double c0[3], c1[3];
    for (double& v : c0) v = rng.uniform();
    for (double& v : c1) v = rng.uniform();
    const double theta = rng.uniform(0.0, 6.283185307179586);
    const double dx = std::cos(theta), dy = std::sin(theta);

    // Projection range over the image corners, for normalizing the gradient.
    double lo = 0.0, hi = 0.0;
    bool first = true;
    for (int cy : {0, kImageSize - 1}) {
        for (int cx : {0, kImageSize - 1}) {
            const double p = cx * dx + cy * dy;
            lo = first ? p : std::min(lo, p);
            hi = first ? p : std::max(hi, p);
            first = false;
        }
    }
    const double span = (hi - lo) > 1e-12 ? (hi - lo) : 1.0;

    Image img(kImageSize, kImageSize * kChannels);
    for (int y = 0; y < kImageSize; ++y) {
        for (int x = 0; x < kImageSize; ++x) {
            const double s = (x * dx + y * dy - lo) / span;
            for (int c = 0; c < kChannels; ++c) {
                pixel(img, y, x, c) = (1.0 - s) * c0[c] + s * c1[c];
            }
        }
    }

    const int n_shapes = rng.uniform_int(3, 6);
    for (int i = 0; i < n_shapes; ++i) {
        Shape s;
        s.is_disk = rng.uniform() < 0.5;
        s.cx = rng.uniform(2.0, kImageSize - 3.0);
        s.cy = rng.uniform(2.0, kImageSize - 3.0);
        s.rx = rng.uniform(3.0, 10.0);
        s.ry = s.is_disk ? s.rx : rng.uniform(3.0, 10.0);
        for (double& v : s.color) v = rng.uniform();
        for (int y = 0; y < kImageSize; ++y) {
            for (int x = 0; x < kImageSize; ++x) {
                const double a = shape_alpha(s, x, y);
                if (a <= 0.0) continue;
                for (int c = 0; c < kChannels; ++c) {
                    pixel(img, y, x, c) = (1.0 - a) * pixel(img, y, x, c) + a * s.color[c];
                }
            }
        }
    }
    clamp_image(img);
    return img;
}

Image add_fog(const Image& clean, double transmission) {
    Image out = clean;
    for (std::size_t i = 0; i < out.size(); ++i) {
        out.data()[i] = transmission * out.data()[i] + (1.0 - transmission) * kFogAirlight;
    }
    clamp_image(out);
    return out;
}

Image add_rain(const Image& clean, std::span<const RainStreak> streaks) {
    Image out = clean;
    for (const RainStreak& st : streaks) {
        const double rad = st.angle_deg * 0.017453292519943295;
        const double ux = std::cos(rad), uy = std::sin(rad);
        const double half = st.length / 2.0;
        for (int y = 0; y < kImageSize; ++y) {
            for (int x = 0; x < kImageSize; ++x) {
                // Distance from the pixel center to the segment.
                const double px = x - st.cx, py = y - st.cy;
                const double along = std::clamp(px * ux + py * uy, -half, half);
                const double d = std::hypot(px - along * ux, py - along * uy);
                const double cov = std::clamp(1.0 - d, 0.0, 1.0);  // width 1 px
                if (cov <= 0.0) continue;
                for (int c = 0; c < kChannels; ++c) {
                    pixel(out, y, x, c) += st.intensity * cov;
                }
            }
        }
    }
    clamp_image(out);
    return out;
}

Image add_snow(const Image& clean, std::span<const SnowBlob> blobs) {
    Image out = clean;
    for (const SnowBlob& b : blobs) {
        const double sigma = b.radius / 2.0;
        const double cutoff = 3.0 * sigma;
        const int x0 = std::max(0, static_cast<int>(std::floor(b.cx - cutoff)));
        const int x1 = std::min(kImageSize - 1, static_cast<int>(std::ceil(b.cx + cutoff)));
        const int y0 = std::max(0, static_cast<int>(std::floor(b.cy - cutoff)));
        const int y1 = std::min(kImageSize - 1, static_cast<int>(std::ceil(b.cy + cutoff)));
        for (int y = y0; y <= y1; ++y) {
            for (int x = x0; x <= x1; ++x) {
                const double d2 = (x - b.cx) * (x - b.cx) + (y - b.cy) * (y - b.cy);
                const double w = std::exp(-d2 / (2.0 * sigma * sigma));
                if (w < 1e-4) continue;
                for (int c = 0; c < kChannels; ++c) {
                    pixel(out, y, x, c) += b.intensity * w;
                }
            }
        }
    }
    clamp_image(out);
    return out;
}

namespace {

Image box_blur5(const Image& img) {
    Image out(kImageSize, kImageSize * kChannels);
    for (int y = 0; y < kImageSize; ++y) {
        for (int x = 0; x < kImageSize; ++x) {
            for (int c = 0; c < kChannels; ++c) {
                double sum = 0.0;
                for (int dy = -2; dy <= 2; ++dy) {
                    for (int dx = -2; dx <= 2; ++dx) {
                        const int yy = std::clamp(y + dy, 0, kImageSize - 1);
                        const int xx = std::clamp(x + dx, 0, kImageSize - 1);
                        sum += pixel(img, yy, xx, c);
                    }
                }
                pixel(out, y, x, c) = sum / 25.0;
            }
        }
    }
    return out;
}

}  // namespace

Image add_raindrops(const Image& clean, std::span<const RaindropSpot> spots) {
    Image blurred = box_blur5(clean);
    Image out = clean;
    for (int y = 0; y < kImageSize; ++y) {
        for (int x = 0; x < kImageSize; ++x) {
            double alpha = 0.0;
            for (const RaindropSpot& s : spots) {
                const double d = std::hypot(x - s.cx, y - s.cy);
                alpha = std::max(alpha, std::clamp(s.radius + 0.5 - d, 0.0, 1.0));
            }
            if (alpha <= 0.0) continue;
            for (int c = 0; c < kChannels; ++c) {
                const double inside = kRaindropDarken * pixel(blurred, y, x, c);
                pixel(out, y, x, c) =
                    (1.0 - alpha) * pixel(out, y, x, c) + alpha * inside;
            }
        }
    }
    clamp_image(out);
    return out;
}

Image degrade(const Image& clean, TaskKind kind, std::uint64_t seed) {
    Rng rng(seed);
    switch (kind) {
        case TaskKind::kFog:
            return add_fog(clean, rng.uniform(0.3, 0.7));
        case TaskKind::kRain: {
            const int n = rng.uniform_int(8, 20);
            std::vector<RainStreak> streaks(n);
            for (RainStreak& s : streaks) {
                s.cx = rng.uniform(0.0, kImageSize - 1.0);
                s.cy = rng.uniform(0.0, kImageSize - 1.0);
                s.length = rng.uniform(10.0, 24.0);
                s.angle_deg = rng.uniform(60.0, 80.0);
                s.intensity = rng.uniform(0.3, 0.6);
            }
            return add_rain(clean, streaks);
        }
        case TaskKind::kSnow: {
            const int n = rng.uniform_int(10, 30);
            std::vector<SnowBlob> blobs(n);
            for (SnowBlob& b : blobs) {
                b.cx = rng.uniform(0.0, kImageSize - 1.0);
                b.cy = rng.uniform(0.0, kImageSize - 1.0);
                b.radius = rng.uniform(1.0, 2.0);
                b.intensity = rng.uniform(0.6, 1.0);
            }
            return add_snow(clean, blobs);
        }
        case TaskKind::kRaindrop: {
            const int n = rng.uniform_int(3, 8);
            std::vector<RaindropSpot> spots(n);
            for (RaindropSpot& s : spots) {
                s.cx = rng.uniform(3.0, kImageSize - 4.0);
                s.cy = rng.uniform(3.0, kImageSize - 4.0);
                s.radius = rng.uniform(3.0, 6.0);
            }
            return add_raindrops(clean, spots);
        }
    }
    throw std::invalid_argument("degrade: unknown task kind");
}

PairedSample make_sample(TaskKind kind, std::uint64_t seed) {
    PairedSample s;
    s.clean = gen_clean(derive_seed(seed, seed_tag::kCleanImage, 0));
    s.degraded = degrade(s.clean, kind, derive_seed(seed, seed_tag::kDegrade, 0));
    return s;
}

double psnr(const Image& a, const Image& b) {
    if (!a.same_shape(b)) {
        throw std::invalid_argument("psnr: shape mismatch: " + a.shape_str() + " vs " +
                                    b.shape_str());
    }
    double mse = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a.data()[i] - b.data()[i];
        mse += d * d;
    }
    mse /= static_cast<double>(a.size());
    if (mse < 1e-10) return 100.0;
    return 10.0 * std::log10(1.0 / mse);
}

double ssim(const Image& a, const Image& b) {
    if (!a.same_shape(b)) {
        throw std::invalid_argument("ssim: shape mismatch: " + a.shape_str() + " vs " +
                                    b.shape_str());
    }
    constexpr int kWin = 8;
    constexpr double kC1 = 0.01 * 0.01;
    constexpr double kC2 = 0.03 * 0.03;
    const int size = a.rows();
    if (size < kWin || a.cols() / kChannels < kWin) {
        throw std::invalid_argument("ssim: image smaller than the 8x8 window");
    }
    const int width = a.cols() / kChannels;
    double channel_sum = 0.0;
    for (int c = 0; c < kChannels; ++c) {
        double win_sum = 0.0;
        int windows = 0;
        for (int y0 = 0; y0 + kWin <= size; ++y0) {
            for (int x0 = 0; x0 + kWin <= width; ++x0) {
                double ma = 0.0, mb = 0.0;
                for (int y = y0; y < y0 + kWin; ++y) {
                    for (int x = x0; x < x0 + kWin; ++x) {
                        ma += pixel(a, y, x, c);
                        mb += pixel(b, y, x, c);
                    }
                }
                const double n = kWin * kWin;
                ma /= n;
                mb /= n;
                double va = 0.0, vb = 0.0, cov = 0.0;
                for (int y = y0; y < y0 + kWin; ++y) {
                    for (int x = x0; x < x0 + kWin; ++x) {
                        const double da = pixel(a, y, x, c) - ma;
                        const double db = pixel(b, y, x, c) - mb;
                        va += da * da;
                        vb += db * db;
                        cov += da * db;
                    }
                }
                va /= n;
                vb /= n;
                cov /= n;
                const double num = (2.0 * ma * mb + kC1) * (2.0 * cov + kC2);
                const double den = (ma * ma + mb * mb + kC1) * (va + vb + kC2);
                win_sum += num / den;
                ++windows;
            }
        }
        channel_sum += win_sum / windows;
    }
    return channel_sum / kChannels;
}

Matrix pack_batch(std::span<const Image> images) {
    if (images.empty()) throw std::invalid_argument("pack_batch: no images");
    Matrix batch(static_cast<int>(images.size()), kImageFlat);
    for (std::size_t i = 0; i < images.size(); ++i) {
        std::copy(images[i].data(), images[i].data() + kImageFlat,
                  batch.data() + i * kImageFlat);
    }
    return batch;
}

Image unpack_row(const Matrix& batch, int row) {
    Image img(kImageSize, kImageSize * kChannels);
    std::copy(batch.data() + static_cast<std::size_t>(row) * kImageFlat,
              batch.data() + static_cast<std::size_t>(row + 1) * kImageFlat, img.data());
    return img;
}

}  // namespace laln
