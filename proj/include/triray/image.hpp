// Copyright 2026 The triray Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <vector>

namespace triray {

// Row-major, interleaved channels, values nominally in [0, 1].
struct Image {
    int width = 0;
    int height = 0;
    int channels = 0;
    std::vector<double> data;

    Image() = default;
    Image(int w, int h, int c, double fill = 0.0)
        : width(w), height(h), channels(c),
          data(static_cast<size_t>(w) * h * c, fill) {}

    double& at(int x, int y, int c) {
        return data[(static_cast<size_t>(y) * width + x) * channels + c];
    }
    double at(int x, int y, int c) const {
        return data[(static_cast<size_t>(y) * width + x) * channels + c];
    }
    size_t pixel_count() const { return static_cast<size_t>(width) * height; }
    bool same_shape(const Image& o) const {
        return width == o.width && height == o.height && channels == o.channels;
    }
};

// Reads an 8- or 16-bit PNG (gray, gray+alpha, palette, RGB, or RGBA) into a
// 3- or 4-channel image scaled to [0, 1].
Image load_png(const std::filesystem::path& path);

// Writes the first 3 channels as 8-bit RGB, rounding to nearest and clamping.
void save_png_rgb8(const Image& img, const std::filesystem::path& path);

// Writes a single channel as 16-bit grayscale; values are clamped to [0, 1]
// and scaled to the full 16-bit range.
void save_png_gray16(const Image& img, const std::filesystem::path& path, int channel = 0);

}  // namespace triray
