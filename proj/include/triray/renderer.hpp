// Copyright 2026 The triray Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "triray/anneal.hpp"
#include "triray/encoding.hpp"
#include "triray/geometry.hpp"
#include "triray/image.hpp"
#include "triray/threading.hpp"
#include "triray/triplane.hpp"

namespace triray {

struct RenderParams {
    int n_samples = 128;
    bool stratified = true;
    double background[3] = {1.0, 1.0, 1.0};
    int sh_trunc = 2;  // spherical-harmonic degrees kept for the view encoding

    void validate() const {
        if (n_samples < 1) throw std::invalid_argument("render: n_samples must be >= 1");
        if (sh_trunc < 0) throw std::invalid_argument("render: sh_trunc must be >= 0");
    }
};

template <class S>
struct RenderOutput {
    S rgb[3] = {S(0), S(0), S(0)};
    S depth = S(0);    // opacity-weighted expected termination distance
    S opacity = S(0);  // 1 - final transmittance
    std::vector<S> weights;
};

inline constexpr double kDepthEps = 1e-10;

// Volume-rendering quadrature over one ray. t strictly increasing, densities
// >= 0; the last segment extends to t_far. alpha_k = 1 - exp(-sigma_k*delta_k),
// w_k = T_k*alpha_k, rgb = sum w_k c_k + (1-opacity)*background.
template <class S>
RenderOutput<S> composite(std::span<const double> t, std::span<const S> sigma,
                          std::span<const S> rgb, double t_far, const double background[3]) {
    const size_t n = t.size();
    if (sigma.size() != n || rgb.size() != 3 * n)
        throw std::invalid_argument("composite: mismatched sample arrays");
    for (size_t k = 0; k + 1 < n; ++k)
        if (!(t[k] < t[k + 1])) throw std::invalid_argument("composite: samples must be sorted");
    for (size_t k = 0; k < n; ++k)
        if (!(sigma[k] >= S(0))) throw std::invalid_argument("composite: densities must be >= 0");

    RenderOutput<S> out;
    out.weights.assign(n, S(0));
    S trans = S(1);
    S depth_acc = S(0);
    for (size_t k = 0; k < n; ++k) {
        const double delta = (k + 1 < n ? t[k + 1] : t_far) - t[k];
        const S att = std::exp(-sigma[k] * static_cast<S>(delta));
        const S alpha = S(1) - att;
        const S w = trans * alpha;
        out.weights[k] = w;
        for (int c = 0; c < 3; ++c) out.rgb[c] += w * rgb[3 * k + c];
        depth_acc += w * static_cast<S>(t[k]);
        trans *= att;
    }
    out.opacity = S(1) - trans;
    for (int c = 0; c < 3; ++c)
        out.rgb[c] += (S(1) - out.opacity) * static_cast<S>(background[c]);
    out.depth = depth_acc / std::max(out.opacity, static_cast<S>(kDepthEps));
    return out;
}

// Adjoint of the rgb output of composite. Writes per-sample gradients of the
// densities and colors; the depth and opacity outputs are not differentiated.
//
// With A_k = alpha_k c_k + (1-alpha_k) A_{k+1} (A past the end = background),
// the pixel color is A_0 and d rgb / d alpha_k = T_k (c_k - A_{k+1}), which
// avoids dividing by (1 - alpha) near saturation.
template <class S>
void composite_backward(std::span<const double> t, std::span<const S> sigma,
                        std::span<const S> rgb, double t_far, const double background[3],
                        const S d_out_rgb[3], S* d_sigma, S* d_rgb) {
    const size_t n = t.size();
    // Suffix colors A_{k+1}, computed back-to-front.
    std::vector<S> suffix(3 * (n + 1));
    for (int c = 0; c < 3; ++c) suffix[3 * n + c] = static_cast<S>(background[c]);
    std::vector<S> att(n);
    for (size_t k = 0; k < n; ++k) {
        const double delta = (k + 1 < n ? t[k + 1] : t_far) - t[k];
        att[k] = std::exp(-sigma[k] * static_cast<S>(delta));
    }
    for (size_t k = n; k-- > 0;) {
        const S alpha = S(1) - att[k];
        for (int c = 0; c < 3; ++c)
            suffix[3 * k + c] = alpha * rgb[3 * k + c] + att[k] * suffix[3 * (k + 1) + c];
    }
    S trans = S(1);
    for (size_t k = 0; k < n; ++k) {
        const double delta = (k + 1 < n ? t[k + 1] : t_far) - t[k];
        const S alpha = S(1) - att[k];
        const S w = trans * alpha;
        S d_alpha = S(0);
        for (int c = 0; c < 3; ++c) {
            d_rgb[3 * k + c] = d_out_rgb[c] * w;
            d_alpha += d_out_rgb[c] * trans * (rgb[3 * k + c] - suffix[3 * (k + 1) + c]);
        }
        d_sigma[k] = d_alpha * static_cast<S>(delta) * att[k];
        trans *= att[k];
    }
}

// Per-ray forward records for the training backward pass.
template <class S>
struct RayTape {
    int n = 0;
    std::vector<double> t, tau, level;
    std::vector<Vec3> pos;
    std::vector<S> feat;   // n * 3C
    std::vector<S> h1;     // n * H
    std::vector<S> h2;     // n * H
    std::vector<S> d_pre;  // n
    std::vector<S> sigma;  // n
    std::vector<S> rgb;    // n * 3
    std::vector<S> sh;     // sh_dim, per ray

    void resize(int n_samples, const ParamLayout& l) {
        n = n_samples;
        const auto ns = static_cast<size_t>(n_samples);
        t.resize(ns);
        tau.resize(ns);
        level.resize(ns);
        pos.resize(ns);
        feat.resize(ns * static_cast<size_t>(l.in_dim));
        h1.resize(ns * static_cast<size_t>(l.hidden));
        h2.resize(ns * static_cast<size_t>(l.hidden));
        d_pre.resize(ns);
        sigma.resize(ns);
        rgb.resize(ns * 3);
        sh.resize(static_cast<size_t>(l.sh_dim));
    }
};

// Pipeline for one pixel: ray generation, stratified cone sampling, footprint
// annealing, level-selected tri-plane lookup, MLP decode with the truncated
// view encoding, and compositing. Deterministic for a fixed seed. When tape
// is non-null the per-sample records needed for the backward pass are kept.
template <class S>
RenderOutput<S> render_pixel(const TriPlaneField<S>& field, const Camera& camera, int px,
                             int py, int64_t i_iter, const AnnealSchedule& sched,
                             const RenderParams& params, uint64_t rng_seed,
                             RayTape<S>* tape = nullptr) {
    const Ray ray = generate_ray(camera, px, py);
    const auto samples =
        sample_cone(ray, camera, params.n_samples, params.stratified, rng_seed);

    const auto sh_vec = sh_encode(ray.dir.normalized(), field.cfg.sh_max_degree,
                                  SHTruncation{params.sh_trunc, field.cfg.sh_max_degree});
    const int n = static_cast<int>(samples.size());
    const auto& l = field.layout;
    RayTape<S> local;
    RayTape<S>& tp = tape ? *tape : local;
    tp.resize(n, l);
    for (int i = 0; i < l.sh_dim; ++i) tp.sh[static_cast<size_t>(i)] = static_cast<S>(sh_vec[static_cast<size_t>(i)]);

    const double base_r = field.base_radius();
    for (int k = 0; k < n; ++k) {
        const auto& s = samples[static_cast<size_t>(k)];
#ifndef TRIRAY_DISABLE_ANNEAL
        const double footprint = annealed_radius(i_iter, s.tau, sched);
#else
        const double footprint = s.tau;
        (void)i_iter;
        (void)sched;
#endif
        const double level = clamp_level(query_level(footprint, base_r), field.cfg.n_levels);
        const auto ks = static_cast<size_t>(k);
        tp.t[ks] = s.t;
        tp.tau[ks] = s.tau;
        tp.level[ks] = level;
        tp.pos[ks] = s.center;
        S* feat = tp.feat.data() + ks * static_cast<size_t>(l.in_dim);
        query_features(field, s.center, level, feat);
        decode_forward(field, feat, tp.sh.data(), tp.h1.data() + ks * static_cast<size_t>(l.hidden),
                       tp.h2.data() + ks * static_cast<size_t>(l.hidden), &tp.d_pre[ks],
                       &tp.sigma[ks], tp.rgb.data() + ks * 3);
    }
    return composite<S>(tp.t, std::span<const S>(tp.sigma), std::span<const S>(tp.rgb),
                        camera.far, params.background);
}

struct RenderedImage {
    Image rgb;      // 3 channels
    Image depth;    // 1 channel, raw expected distance
    Image opacity;  // 1 channel
};

// Renders every pixel with a per-pixel derived seed; the result is
// independent of the worker count.
template <class S>
RenderedImage render_image(const TriPlaneField<S>& field, const Camera& camera,
                           int64_t i_iter, const AnnealSchedule& sched,
                           const RenderParams& params, uint64_t rng_seed, int threads = 1) {
    RenderedImage out;
    out.rgb = Image(camera.width, camera.height, 3);
    out.depth = Image(camera.width, camera.height, 1);
    out.opacity = Image(camera.width, camera.height, 1);
    const int64_t n_pixels = static_cast<int64_t>(camera.width) * camera.height;
    const int n_chunks = std::max(1, std::min<int>(64, camera.height));
    run_chunked(n_pixels, n_chunks, threads, [&](int, int64_t begin, int64_t end) {
        for (int64_t i = begin; i < end; ++i) {
            const int px = static_cast<int>(i % camera.width);
            const int py = static_cast<int>(i / camera.width);
            const uint64_t seed = hash_mix(rng_seed, static_cast<uint64_t>(i));
            const auto res =
                render_pixel(field, camera, px, py, i_iter, sched, params, seed);
            for (int c = 0; c < 3; ++c)
                out.rgb.at(px, py, c) = static_cast<double>(res.rgb[c]);
            out.depth.at(px, py, 0) = static_cast<double>(res.depth);
            out.opacity.at(px, py, 0) = static_cast<double>(res.opacity);
        }
    });
    return out;
}

}  // namespace triray
