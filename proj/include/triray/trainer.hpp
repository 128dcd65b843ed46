// Copyright 2026 The triray Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "triray/anneal.hpp"
#include "triray/dataio.hpp"
#include "triray/metrics.hpp"
#include "triray/renderer.hpp"
#include "triray/rng.hpp"
#include "triray/threading.hpp"
#include "triray/triplane.hpp"

namespace triray {

enum class Precision { F32, F64 };

struct TrainConfig {
    int iterations = 2500;
    double lr = 2e-3;
    double weight_decay = 1e-5;
    int rays_per_batch = 1024;
    uint64_t seed = 0;
    Precision precision = Precision::F32;
    AnnealSchedule anneal;
    int val_interval = 0;   // 0 disables validation renders during training
    int val_max_views = 1;
    int threads = 0;        // 0 -> hardware concurrency
    int grad_chunks = 16;   // fixed reduction granularity, independent of threads
    // Rebuild the mip pyramids from level 0 every N iterations. 1 keeps the
    // derived levels exactly consistent with the parameters (the default);
    // larger values trade that consistency for speed (stale pyramids).
    int pyramid_refresh_every = 1;

    void validate() const {
        if (iterations < 0) throw std::invalid_argument("train: iterations must be >= 0");
        if (!(lr > 0.0)) throw std::invalid_argument("train: lr must be > 0");
        if (weight_decay < 0.0) throw std::invalid_argument("train: weight_decay must be >= 0");
        if (rays_per_batch < 1) throw std::invalid_argument("train: rays_per_batch must be >= 1");
        if (grad_chunks < 1) throw std::invalid_argument("train: grad_chunks must be >= 1");
        if (pyramid_refresh_every < 1)
            throw std::invalid_argument("train: pyramid_refresh_every must be >= 1");
        anneal.validate();
    }
};

// Mean squared error over all entries of two equally shaped rgb batches.
inline double loss_mse(std::span<const double> pred, std::span<const double> gt) {
    if (pred.size() != gt.size() || pred.empty())
        throw std::invalid_argument("loss_mse: shape mismatch");
    double acc = 0.0;
    for (size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - gt[i];
        acc += d * d;
    }
    return acc / static_cast<double>(pred.size());
}

struct AdamWParams {
    double lr = 2e-3;
    double weight_decay = 1e-5;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-15;
};

// Decoupled-decay adaptive-moment step: parameters are first scaled by
// (1 - lr*wd), then moved by the bias-corrected moment update. t counts steps
// starting at 1. Deterministic elementwise update.
template <class S>
void adamw_step(std::span<S> params, std::span<const S> grads, std::span<S> m,
                std::span<S> v, int64_t t, const AdamWParams& p) {
    if (grads.size() != params.size() || m.size() != params.size() || v.size() != params.size())
        throw std::invalid_argument("adamw_step: size mismatch");
    if (t < 1) throw std::invalid_argument("adamw_step: t must be >= 1");
    const double bc1 = 1.0 - std::pow(p.beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(p.beta2, static_cast<double>(t));
    for (size_t i = 0; i < params.size(); ++i) {
        const double g = static_cast<double>(grads[i]);
        if (!std::isfinite(g)) throw std::runtime_error("adamw_step: non-finite gradient");
        double param = static_cast<double>(params[i]);
        param -= p.lr * p.weight_decay * param;
        const double mi = p.beta1 * static_cast<double>(m[i]) + (1.0 - p.beta1) * g;
        const double vi = p.beta2 * static_cast<double>(v[i]) + (1.0 - p.beta2) * g * g;
        m[i] = static_cast<S>(mi);
        v[i] = static_cast<S>(vi);
        const double m_hat = mi / bc1;
        const double v_hat = vi / bc2;
        param -= p.lr * m_hat / (std::sqrt(v_hat) + p.eps);
        params[i] = static_cast<S>(param);
    }
}

// One training ray: a pixel of some camera, its target color, and the RNG
// seed driving its stratified samples.
struct RaySpec {
    const Camera* camera = nullptr;
    int px = 0;
    int py = 0;
    uint64_t seed = 0;
    double target[3] = {0.0, 0.0, 0.0};
};

namespace detail {

template <class S>
struct BatchScratch {
    RayTape<S> tape;
    std::vector<S> d_sigma, d_rgb, d_feat, scratch_h;

    void prepare(const ParamLayout& l, int n_samples) {
        d_sigma.resize(static_cast<size_t>(n_samples));
        d_rgb.resize(static_cast<size_t>(n_samples) * 3);
        d_feat.resize(static_cast<size_t>(l.in_dim));
        scratch_h.resize(2 * static_cast<size_t>(l.hidden));
        (void)n_samples;
    }
};

}  // namespace detail

// Renders the batch at iteration i_iter and accumulates the MSE loss
// (mean over rays and channels). When grads is non-null, reverse-mode
// gradients of the loss w.r.t. every field parameter are accumulated through
// compositing, the decoder, the feature lookups and the mip pyramid; the
// annealing schedule and view encoding are constants. Work is split into
// cfg.grad_chunks fixed chunks folded in order, so results are bit-identical
// for any thread count. Pyramids are rebuilt from the current parameters.
template <class S>
double batch_loss_and_grads(TriPlaneField<S>& field, std::span<const RaySpec> rays,
                            int64_t i_iter, const AnnealSchedule& sched,
                            const RenderParams& params, int threads, int n_chunks,
                            GradBuffer<S>* grads, bool refresh_pyramids = true) {
    if (rays.empty()) throw std::invalid_argument("batch_loss_and_grads: empty batch");
    if (refresh_pyramids) field.rebuild_pyramids();
    if (threads < 1) threads = 1;
    if (n_chunks < 1) n_chunks = 1;
    if (n_chunks > static_cast<int>(rays.size())) n_chunks = static_cast<int>(rays.size());

    const double inv_count = 1.0 / (3.0 * static_cast<double>(rays.size()));
    std::vector<double> chunk_loss(static_cast<size_t>(n_chunks), 0.0);
    std::vector<GradBuffer<S>> chunk_grads;
    if (grads) {
        chunk_grads.reserve(static_cast<size_t>(n_chunks));
        for (int c = 0; c < n_chunks; ++c) chunk_grads.push_back(GradBuffer<S>::make(field.cfg));
    }

    run_chunked(static_cast<int64_t>(rays.size()), n_chunks, threads,
                [&](int chunk, int64_t begin, int64_t end) {
                    detail::BatchScratch<S> scratch;
                    scratch.prepare(field.layout, params.n_samples);
                    double loss_acc = 0.0;
                    for (int64_t r = begin; r < end; ++r) {
                        const RaySpec& spec = rays[static_cast<size_t>(r)];
                        const auto out =
                            render_pixel(field, *spec.camera, spec.px, spec.py, i_iter, sched,
                                         params, spec.seed, &scratch.tape);
                        S d_pred[3];
                        for (int c = 0; c < 3; ++c) {
                            const double diff =
                                static_cast<double>(out.rgb[c]) - spec.target[c];
                            loss_acc += diff * diff;
                            d_pred[c] = static_cast<S>(2.0 * diff * inv_count);
                        }
                        if (!grads) continue;
                        auto& tape = scratch.tape;
                        auto& g = chunk_grads[static_cast<size_t>(chunk)];
                        composite_backward<S>(tape.t, std::span<const S>(tape.sigma),
                                              std::span<const S>(tape.rgb), spec.camera->far,
                                              params.background, d_pred,
                                              scratch.d_sigma.data(), scratch.d_rgb.data());
                        const auto& l = field.layout;
                        for (int k = 0; k < tape.n; ++k) {
                            const auto ks = static_cast<size_t>(k);
                            decode_backward(field,
                                            tape.feat.data() + ks * static_cast<size_t>(l.in_dim),
                                            tape.sh.data(),
                                            tape.h1.data() + ks * static_cast<size_t>(l.hidden),
                                            tape.h2.data() + ks * static_cast<size_t>(l.hidden),
                                            tape.d_pre[ks], tape.sigma[ks],
                                            tape.rgb.data() + ks * 3, scratch.d_sigma[ks],
                                            scratch.d_rgb.data() + ks * 3, g,
                                            scratch.d_feat.data(), scratch.scratch_h.data());
                            query_features_backward(field, tape.pos[ks], tape.level[ks],
                                                    scratch.d_feat.data(), g);
                        }
                    }
                    chunk_loss[static_cast<size_t>(chunk)] = loss_acc;
                });

    double loss = 0.0;
    for (double part : chunk_loss) loss += part;
    loss *= inv_count;
    if (grads) {
        for (auto& cg : chunk_grads) grads->add(cg);
        grads->fold_pyramids();
    }
    return loss;
}

struct IterLog {
    int iter = 0;
    double loss = 0.0;
    double psnr_val = std::numeric_limits<double>::quiet_NaN();
    double r_gap = 0.0;
    double level_offset = 0.0;
};

template <class S>
struct TrainState {
    TriPlaneField<S> field;
    std::vector<S> m, v;
    int64_t iter = 0;
};

template <class S>
struct TrainResult {
    TrainState<S> state;
    std::vector<IterLog> log;
};

// Full optimization loop: per iteration, rays_per_batch pixels drawn
// uniformly over the training views (seeded), rendered at iteration i with
// the annealing schedule, MSE backward, AdamW step. Logs the loss every
// iteration plus the schedule diagnostics r_gap and level_offset (evaluated
// at the reference radius tau = base_radius), and a validation PSNR at the
// configured cadence.
template <class S>
TrainResult<S> train(const Dataset& dataset, const FieldConfig& field_cfg,
                     const RenderParams& render_params, const TrainConfig& cfg) {
    cfg.validate();
    render_params.validate();
    if (dataset.train.empty()) throw std::invalid_argument("train: dataset has no training views");
    const int width = dataset.train.front().image.width;
    const int height = dataset.train.front().image.height;
    for (const auto& v : dataset.train)
        if (v.image.width != width || v.image.height != height)
            throw std::invalid_argument("train: training views must share one resolution");

    const int threads = cfg.threads > 0 ? cfg.threads : hardware_threads();
    TrainResult<S> result;
    result.state.field = TriPlaneField<S>::init(field_cfg, cfg.seed);
    result.state.m.assign(result.state.field.params.size(), S(0));
    result.state.v.assign(result.state.field.params.size(), S(0));

    AdamWParams adamw;
    adamw.lr = cfg.lr;
    adamw.weight_decay = cfg.weight_decay;

    const uint64_t run_seed = hash_mix(cfg.seed, 0x7261796261746368ull);  // batch stream
    const int64_t pixels_per_view = static_cast<int64_t>(width) * height;
    const int64_t pixel_count = pixels_per_view * static_cast<int64_t>(dataset.train.size());
    const double base_r = field_cfg.base_radius();

    std::vector<RaySpec> batch(static_cast<size_t>(cfg.rays_per_batch));
    GradBuffer<S> grads = GradBuffer<S>::make(field_cfg);

    for (int it = 0; it < cfg.iterations; ++it) {
        const uint64_t iter_seed = hash_mix(run_seed, static_cast<uint64_t>(it));
        Rng rng(iter_seed);
        for (int r = 0; r < cfg.rays_per_batch; ++r) {
            const int64_t flat = static_cast<int64_t>(
                rng.next_below(static_cast<uint64_t>(pixel_count)));
            const auto view = static_cast<size_t>(flat / pixels_per_view);
            const int64_t in_view = flat % pixels_per_view;
            const int px = static_cast<int>(in_view % width);
            const int py = static_cast<int>(in_view / width);
            RaySpec& spec = batch[static_cast<size_t>(r)];
            spec.camera = &dataset.train[view].camera;
            spec.px = px;
            spec.py = py;
            spec.seed = hash_mix(iter_seed, 0x100000000ull + static_cast<uint64_t>(r));
            for (int c = 0; c < 3; ++c)
                spec.target[c] = dataset.train[view].image.at(px, py, c);
        }

        grads.zero();
        const bool refresh = (it % cfg.pyramid_refresh_every) == 0;
        const double loss = batch_loss_and_grads(result.state.field, batch, it, cfg.anneal,
                                                 render_params, threads, cfg.grad_chunks,
                                                 &grads, refresh);
        adamw_step<S>(result.state.field.params, grads.flat, result.state.m, result.state.v,
                      it + 1, adamw);
        result.state.iter = it + 1;

        IterLog log;
        log.iter = it;
        log.loss = loss;
#ifndef TRIRAY_DISABLE_ANNEAL
        log.r_gap = annealed_radius(it, base_r, cfg.anneal) - base_r;
        log.level_offset = annealed_level(it, base_r, base_r, cfg.anneal);
#endif
        if (cfg.val_interval > 0 && !dataset.val.empty() &&
            ((it + 1) % cfg.val_interval == 0 || it + 1 == cfg.iterations)) {
            result.state.field.rebuild_pyramids();
            const int n_views = std::min<int>(cfg.val_max_views,
                                              static_cast<int>(dataset.val.size()));
            double acc = 0.0;
            for (int vi = 0; vi < n_views; ++vi) {
                const auto& view = dataset.val[static_cast<size_t>(vi)];
                const auto rendered = render_image(result.state.field, view.camera, it,
                                                   cfg.anneal, render_params,
                                                   hash_mix(cfg.seed, 0xDEADull), threads);
                acc += psnr(rendered.rgb, view.image);
            }
            log.psnr_val = acc / n_views;
        }
        result.log.push_back(log);
    }
    result.state.field.rebuild_pyramids();
    return result;
}

}  // namespace triray
