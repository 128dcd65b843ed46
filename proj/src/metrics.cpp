// Copyright 2026 The triray Authors
// SPDX-License-Identifier: Apache-2.0
#include "triray/metrics.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace triray {

double psnr(const Image& pred, const Image& gt, double max_val) {
    if (!pred.same_shape(gt)) throw std::invalid_argument("psnr: shape mismatch");
    if (pred.data.empty()) throw std::invalid_argument("psnr: empty image");
    double acc = 0.0;
    for (size_t i = 0; i < pred.data.size(); ++i) {
        const double d = pred.data[i] - gt.data[i];
        acc += d * d;
    }
    const double mse = acc / static_cast<double>(pred.data.size());
    if (mse == 0.0) return 99.0;
    return std::min(99.0, 10.0 * std::log10(max_val * max_val / mse));
}

namespace {

constexpr int kWindow = 11;
constexpr double kSigma = 1.5;
constexpr double kK1 = 0.01;
constexpr double kK2 = 0.03;

const std::vector<double>& gaussian_kernel() {
    static const std::vector<double> kernel = [] {
        std::vector<double> k(kWindow);
        double sum = 0.0;
        for (int i = 0; i < kWindow; ++i) {
            const double x = i - (kWindow - 1) / 2.0;
            k[static_cast<size_t>(i)] = std::exp(-x * x / (2.0 * kSigma * kSigma));
            sum += k[static_cast<size_t>(i)];
        }
        for (auto& v : k) v /= sum;
        return k;
    }();
    return kernel;
}

// Separable valid-mode Gaussian filter of a w x h scalar map.
std::vector<double> gauss_valid(const std::vector<double>& src, int w, int h, int* out_w,
                                int* out_h) {
    const auto& k = gaussian_kernel();
    const int vw = w - kWindow + 1;
    std::vector<double> tmp(static_cast<size_t>(vw) * h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < vw; ++x) {
            double acc = 0.0;
            for (int i = 0; i < kWindow; ++i)
                acc += k[static_cast<size_t>(i)] * src[static_cast<size_t>(y) * w + x + i];
            tmp[static_cast<size_t>(y) * vw + x] = acc;
        }
    const int vh = h - kWindow + 1;
    std::vector<double> out(static_cast<size_t>(vw) * vh);
    for (int y = 0; y < vh; ++y)
        for (int x = 0; x < vw; ++x) {
            double acc = 0.0;
            for (int i = 0; i < kWindow; ++i)
                acc += k[static_cast<size_t>(i)] * tmp[static_cast<size_t>(y + i) * vw + x];
            out[static_cast<size_t>(y) * vw + x] = acc;
        }
    *out_w = vw;
    *out_h = vh;
    return out;
}

double ssim_channel(const Image& a, const Image& b, int ch) {
    const int w = a.width, h = a.height;
    const size_t n = static_cast<size_t>(w) * h;
    std::vector<double> x(n), y(n), xx(n), yy(n), xy(n);
    for (int j = 0; j < h; ++j)
        for (int i = 0; i < w; ++i) {
            const size_t idx = static_cast<size_t>(j) * w + i;
            const double xv = a.at(i, j, ch);
            const double yv = b.at(i, j, ch);
            x[idx] = xv;
            y[idx] = yv;
            xx[idx] = xv * xv;
            yy[idx] = yv * yv;
            xy[idx] = xv * yv;
        }
    int vw, vh;
    const auto mx = gauss_valid(x, w, h, &vw, &vh);
    const auto my = gauss_valid(y, w, h, &vw, &vh);
    const auto mxx = gauss_valid(xx, w, h, &vw, &vh);
    const auto myy = gauss_valid(yy, w, h, &vw, &vh);
    const auto mxy = gauss_valid(xy, w, h, &vw, &vh);

    const double c1 = kK1 * kK1;
    const double c2 = kK2 * kK2;
    double acc = 0.0;
    for (size_t i = 0; i < mx.size(); ++i) {
        const double mu_x = mx[i];
        const double mu_y = my[i];
        const double var_x = mxx[i] - mu_x * mu_x;
        const double var_y = myy[i] - mu_y * mu_y;
        const double cov = mxy[i] - mu_x * mu_y;
        acc += ((2.0 * mu_x * mu_y + c1) * (2.0 * cov + c2)) /
               ((mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2));
    }
    return acc / static_cast<double>(mx.size());
}

}  // namespace

double ssim(const Image& pred, const Image& gt) {
    if (!pred.same_shape(gt)) throw std::invalid_argument("ssim: shape mismatch");
    if (pred.width < kWindow || pred.height < kWindow)
        throw std::invalid_argument("ssim: image smaller than the 11x11 window");
    double acc = 0.0;
    for (int c = 0; c < pred.channels; ++c) acc += ssim_channel(pred, gt, c);
    return acc / pred.channels;
}

MetricReport evaluate_views(const std::vector<Image>& pred, const std::vector<Image>& gt) {
    if (pred.size() != gt.size()) throw std::invalid_argument("evaluate_views: size mismatch");
    MetricReport r;
    for (size_t i = 0; i < pred.size(); ++i) {
        r.psnr_per_view.push_back(psnr(pred[i], gt[i]));
        r.ssim_per_view.push_back(ssim(pred[i], gt[i]));
        r.psnr_mean += r.psnr_per_view.back();
        r.ssim_mean += r.ssim_per_view.back();
    }
    if (!pred.empty()) {
        r.psnr_mean /= static_cast<double>(pred.size());
        r.ssim_mean /= static_cast<double>(pred.size());
    }
    return r;
}

std::string report_csv(const MetricReport& r) {
    std::ostringstream out;
    out << std::setprecision(10);
    out << "view,psnr,ssim\n";
    for (size_t i = 0; i < r.psnr_per_view.size(); ++i)
        out << i << "," << r.psnr_per_view[i] << "," << r.ssim_per_view[i] << "\n";
    out << "mean," << r.psnr_mean << "," << r.ssim_mean << "\n";
    return out.str();
}

std::string report_table(const MetricReport& r) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(3);
    out << "view    PSNR(dB)    SSIM\n";
    for (size_t i = 0; i < r.psnr_per_view.size(); ++i)
        out << std::setw(4) << i << std::setw(12) << r.psnr_per_view[i] << std::setw(8)
            << r.ssim_per_view[i] << "\n";
    out << "mean" << std::setw(12) << r.psnr_mean << std::setw(8) << r.ssim_mean << "\n";
    return out.str();
}

}  // namespace triray
