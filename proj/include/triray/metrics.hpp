// Copyright 2026 The triray Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "triray/image.hpp"

namespace triray {

// 10*log10(max_val^2 / MSE) over all channels, capped at 99 dB (the cap also
// covers MSE == 0). Throws on shape mismatch.
double psnr(const Image& pred, const Image& gt, double max_val = 1.0);

// Structural similarity with the standard 11x11 Gaussian window (sigma 1.5,
// K1 = 0.01, K2 = 0.03, dynamic range 1), computed per channel over all fully
// interior windows and averaged over windows and channels. Throws if the
// image is smaller than the window.
double ssim(const Image& pred, const Image& gt);

struct MetricReport {
    std::vector<double> psnr_per_view;
    std::vector<double> ssim_per_view;
    double psnr_mean = 0.0;
    double ssim_mean = 0.0;
};

MetricReport evaluate_views(const std::vector<Image>& pred, const std::vector<Image>& gt);

std::string report_csv(const MetricReport& report);
std::string report_table(const MetricReport& report);

}  // namespace triray
