// Copyright (c) 2026 The laln authors
// SPDX-License-Identifier: Apache-2.0
//
// Minimal RGB8 PNG writer on top of zlib.

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <vector>

#include "laln/tasks.hpp"

namespace laln {

namespace {

void put_u32_be(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

void write_chunk(std::vector<std::uint8_t>& out, const char type[4],
                 const std::vector<std::uint8_t>& data) {
    put_u32_be(out, static_cast<std::uint32_t>(data.size()));
    const std::size_t crc_start = out.size();
    out.insert(out.end(), type, type + 4);
    out.insert(out.end(), data.begin(), data.end());
    const auto crc = static_cast<std::uint32_t>(
        crc32(0L, out.data() + crc_start, static_cast<uInt>(out.size() - crc_start)));
    put_u32_be(out, crc);
}

void write_png_rgb8(const std::string& path, const std::vector<std::uint8_t>& rgb, int width,
                    int height) {
    std::vector<std::uint8_t> raw;
    raw.reserve(static_cast<std::size_t>(height) * (width * 3 + 1));
    for (int y = 0; y < height; ++y) {
        raw.push_back(0);  // filter: none
        const auto* row = rgb.data() + static_cast<std::size_t>(y) * width * 3;
        raw.insert(raw.end(), row, row + width * 3);
    }

    uLongf comp_len = compressBound(static_cast<uLong>(raw.size()));
    std::vector<std::uint8_t> comp(comp_len);
    if (compress2(comp.data(), &comp_len, raw.data(), static_cast<uLong>(raw.size()), 9) !=
        Z_OK) {
        throw std::runtime_error("write_png: zlib compression failed for " + path);
    }
    comp.resize(comp_len);

    std::vector<std::uint8_t> out = {137, 80, 78, 71, 13, 10, 26, 10};
    std::vector<std::uint8_t> ihdr;
    put_u32_be(ihdr, static_cast<std::uint32_t>(width));
    put_u32_be(ihdr, static_cast<std::uint32_t>(height));
    ihdr.push_back(8);  // bit depth
    ihdr.push_back(2);  // color type: truecolor
    ihdr.push_back(0);
    ihdr.push_back(0);
    ihdr.push_back(0);
    write_chunk(out, "IHDR", ihdr);
    write_chunk(out, "IDAT", comp);
    write_chunk(out, "IEND", {});

    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("write_png: cannot open " + path);
    f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
    if (!f) throw std::runtime_error("write_png: short write to " + path);
}

std::uint8_t to_byte(double v) {
    return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

}  // namespace

void write_png(const std::string& path, const Image& img) {
    std::vector<std::uint8_t> rgb(static_cast<std::size_t>(kImageSize) * kImageSize * 3);
    std::size_t idx = 0;
    for (int y = 0; y < kImageSize; ++y) {
        for (int x = 0; x < kImageSize; ++x) {
            for (int c = 0; c < kChannels; ++c) rgb[idx++] = to_byte(pixel(img, y, x, c));
        }
    }
    write_png_rgb8(path, rgb, kImageSize, kImageSize);
}

void write_png_grid(const std::string& path, std::span<const Image> images, int cols) {
    if (images.empty() || cols < 1) {
        throw std::invalid_argument("write_png_grid: need at least one image and column");
    }
    const int n = static_cast<int>(images.size());
    const int rows = (n + cols - 1) / cols;
    const int cell = kImageSize + 1;
    const int width = cols * cell - 1;
    const int height = rows * cell - 1;
    std::vector<std::uint8_t> rgb(static_cast<std::size_t>(width) * height * 3, 255);
    for (int i = 0; i < n; ++i) {
        const int gx = (i % cols) * cell;
        const int gy = (i / cols) * cell;
        for (int y = 0; y < kImageSize; ++y) {
            for (int x = 0; x < kImageSize; ++x) {
                const std::size_t base =
                    (static_cast<std::size_t>(gy + y) * width + gx + x) * 3;
                for (int c = 0; c < kChannels; ++c) {
                    rgb[base + c] = to_byte(pixel(images[i], y, x, c));
                }
            }
        }
    }
    write_png_rgb8(path, rgb, width, height);
}

}  // namespace laln
