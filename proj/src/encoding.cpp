// Copyright 2026 The triray Authors
// SPDX-License-Identifier: Apache-2.0
#include "triray/encoding.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace triray {

std::vector<double> freq_mask(const FreqMaskParams& params) {
    if (params.l_freq < 1) throw std::invalid_argument("freq_mask: l_freq must be >= 1");
    if (params.t_total < 1) throw std::invalid_argument("freq_mask: t_total must be >= 1");
    if (params.t_iter < 0 || params.t_iter > params.t_total)
        throw std::invalid_argument("freq_mask: need 0 <= t <= T");
    const int m = 3 * params.l_freq;
    // Visible-frequency pointer. The ramp advances one whole frequency (3
    // channels) at a time; quantizing the pass-band edge to the frequency
    // grid is what makes every entry non-decreasing in t.
    const double q = static_cast<double>(params.t_iter) * params.l_freq / params.t_total;
    const double n_full = std::floor(q);
    const double frac = q - n_full;
    const double edge = 3.0 * n_full;
    std::vector<double> mask(static_cast<size_t>(m));
    for (int i = 1; i <= m; ++i) {
        double v = 0.0;
        if (i <= edge + 3.0)
            v = 1.0;
        else if (i <= edge + 6.0)
            v = frac;
        mask[static_cast<size_t>(i - 1)] = v;
    }
    return mask;
}

std::vector<double> ipe_mask(double sigma_f_sq, int l_freq) {
    if (sigma_f_sq < 0.0) throw std::invalid_argument("ipe_mask: sigma_f_sq must be >= 0");
    if (l_freq < 1) throw std::invalid_argument("ipe_mask: l_freq must be >= 1");
    std::vector<double> mask(static_cast<size_t>(2 * l_freq));
    for (int k = 0; k < l_freq; ++k) {
        const double v = std::exp(-std::exp2(2.0 * k - 1.0) * sigma_f_sq);
        mask[static_cast<size_t>(2 * k)] = v;
        mask[static_cast<size_t>(2 * k + 1)] = v;
    }
    return mask;
}

double annealed_sigma_f_sq(double x_step) {
    if (x_step < 0.0) throw std::invalid_argument("annealed_sigma_f_sq: x must be >= 0");
    return std::exp2(-x_step);
}

std::vector<double> ipe_encode_axis(double mu, double sigma_f_sq, int l_freq) {
    const std::vector<double> mask = ipe_mask(sigma_f_sq, l_freq);
    std::vector<double> enc(static_cast<size_t>(2 * l_freq));
    for (int k = 0; k < l_freq; ++k) {
        const double arg = std::exp2(static_cast<double>(k)) * mu;
        enc[static_cast<size_t>(2 * k)] = std::sin(arg) * mask[static_cast<size_t>(2 * k)];
        enc[static_cast<size_t>(2 * k + 1)] = std::cos(arg) * mask[static_cast<size_t>(2 * k + 1)];
    }
    return enc;
}

std::vector<double> ipe_encode(const IsotropicGaussian& g, int l_freq) {
    std::vector<double> out;
    out.reserve(static_cast<size_t>(6 * l_freq));
    for (int axis = 0; axis < 3; ++axis) {
        const std::vector<double> block = ipe_encode_axis(g.mu[axis], g.sigma_f_sq, l_freq);
        out.insert(out.end(), block.begin(), block.end());
    }
    return out;
}

namespace {

// P_l^m(x) with Condon-Shortley phase, standard three-term recurrence.
double assoc_legendre(int l, int m, double x) {
    double pmm = 1.0;
    if (m > 0) {
        const double somx2 = std::sqrt((1.0 - x) * (1.0 + x));
        double fact = 1.0;
        for (int i = 1; i <= m; ++i) {
            pmm *= -fact * somx2;
            fact += 2.0;
        }
    }
    if (l == m) return pmm;
    double pmmp1 = x * (2.0 * m + 1.0) * pmm;
    if (l == m + 1) return pmmp1;
    double pll = 0.0;
    for (int ll = m + 2; ll <= l; ++ll) {
        pll = ((2.0 * ll - 1.0) * x * pmmp1 - (ll + m - 1.0) * pmm) / (ll - m);
        pmm = pmmp1;
        pmmp1 = pll;
    }
    return pll;
}

double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

// sqrt((2l+1)/(4pi) * (l-|m|)!/(l+|m|)!)
double sh_norm(int l, int m) {
    const int am = std::abs(m);
    return std::sqrt((2.0 * l + 1.0) / (4.0 * std::numbers::pi) *
                     factorial(l - am) / factorial(l + am));
}

}  // namespace

std::vector<double> sh_encode(const Vec3& dir, int max_degree, const SHTruncation& trunc) {
    if (max_degree < 0) throw std::invalid_argument("sh_encode: max_degree must be >= 0");
    if (trunc.n_trunc < 0 || trunc.n_trunc > trunc.max_degree + 1 ||
        trunc.max_degree != max_degree)
        throw std::invalid_argument("sh_encode: inconsistent truncation");
    if (std::abs(dir.norm() - 1.0) > 1e-6)
        throw std::invalid_argument("sh_encode: direction must be unit length");

    const double cos_theta = dir.z;
    const double phi = std::atan2(dir.y, dir.x);
    const int n_comp = (max_degree + 1) * (max_degree + 1);
    const int n_pass = trunc.n_trunc * trunc.n_trunc;

    std::vector<double> out(static_cast<size_t>(n_comp), 0.0);
    int idx = 0;
    for (int l = 0; l <= max_degree; ++l) {
        for (int m = -l; m <= l; ++m, ++idx) {
            if (idx >= n_pass) continue;  // masked to exactly zero
            const double p = assoc_legendre(l, std::abs(m), cos_theta);
            const double k = sh_norm(l, m);
            double v;
            if (m == 0)
                v = k * p;
            else if (m > 0)
                v = std::numbers::sqrt2 * k * std::cos(m * phi) * p;
            else
                v = std::numbers::sqrt2 * k * std::sin(-m * phi) * p;
            out[static_cast<size_t>(idx)] = v;
        }
    }
    return out;
}

int duality_cutoff_index(double sigma_f_sq, int l_freq, double threshold) {
    if (!(threshold > 0.0 && threshold < 1.0))
        throw std::invalid_argument("duality_cutoff_index: threshold must be in (0,1)");
    const std::vector<double> mask = ipe_mask(sigma_f_sq, l_freq);
    for (int k = l_freq - 1; k >= 0; --k) {
        if (mask[static_cast<size_t>(2 * k)] >= threshold) return k;
    }
    return -1;
}

}  // namespace triray
