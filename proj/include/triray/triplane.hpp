// Copyright 2026 The triray Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "triray/rng.hpp"
#include "triray/vec.hpp"

namespace triray {

// Mipmapped tri-plane field: three feature-plane pyramids (XY, XZ, YZ) plus a
// tiny MLP decoder. Level-0 plane texels and MLP weights are the trainable
// parameters, stored in one flat vector; pyramid levels >= 1 are derived by
// 2x2 average pooling and rebuilt whenever level 0 changes.
struct FieldConfig {
    int base_res = 128;
    int n_levels = 8;
    int feature_dim = 8;
    int hidden_dim = 64;
    int sh_max_degree = 3;
    Bbox bbox;

    void validate() const {
        if (base_res < 2) throw std::invalid_argument("field: base_res must be >= 2");
        if (n_levels < 2) throw std::invalid_argument("field: n_levels must be >= 2");
        if (feature_dim < 1) throw std::invalid_argument("field: feature_dim must be >= 1");
        if (hidden_dim < 1) throw std::invalid_argument("field: hidden_dim must be >= 1");
        if (sh_max_degree < 0) throw std::invalid_argument("field: sh_max_degree must be >= 0");
    }
    int sh_dim() const { return (sh_max_degree + 1) * (sh_max_degree + 1); }

    // Half of one level-0 texel's world extent (averaged over axes).
    double base_radius() const {
        const Vec3 e = bbox.extent();
        return 0.5 * (e.x + e.y + e.z) / 3.0 / base_res;
    }
};

inline int mip_level_res(int base_res, int level) {
    int r = base_res;
    for (int k = 0; k < level; ++k) r = (r + 1) / 2;
    return r;
}

// Offsets of each parameter tensor within the flat parameter vector.
struct ParamLayout {
    size_t plane[3] = {};
    size_t plane_size = 0;
    size_t w1 = 0, b1 = 0, w2 = 0, b2 = 0, wd = 0, bd = 0, wc = 0, bc = 0;
    size_t total = 0;
    int in_dim = 0, hidden = 0, sh_dim = 0, color_in = 0;

    static ParamLayout make(const FieldConfig& cfg) {
        ParamLayout l;
        l.in_dim = 3 * cfg.feature_dim;
        l.hidden = cfg.hidden_dim;
        l.sh_dim = cfg.sh_dim();
        l.color_in = l.hidden + l.sh_dim;
        l.plane_size = static_cast<size_t>(cfg.base_res) * cfg.base_res * cfg.feature_dim;
        size_t off = 0;
        for (int p = 0; p < 3; ++p) {
            l.plane[p] = off;
            off += l.plane_size;
        }
        auto take = [&off](size_t n) {
            const size_t o = off;
            off += n;
            return o;
        };
        const auto h = static_cast<size_t>(l.hidden);
        l.w1 = take(h * l.in_dim);
        l.b1 = take(h);
        l.w2 = take(h * h);
        l.b2 = take(h);
        l.wd = take(h);
        l.bd = take(1);
        l.wc = take(3 * static_cast<size_t>(l.color_in));
        l.bc = take(3);
        l.total = off;
        return l;
    }
};

template <class S>
struct MipPyramid {
    std::vector<std::vector<S>> level;  // level[k]: res_k * res_k * C, row (v*res + u)*C + c
};

// Pools one level into the next: each output texel is the mean of its 2x2
// source block; odd edges average the remaining 1x2 / 2x1 / 1x1 block.
template <class S>
void mip_pool_forward(const S* src, int src_res, S* dst, int dst_res, int channels) {
    for (int j = 0; j < dst_res; ++j) {
        const int v0 = 2 * j;
        const int v1 = std::min(v0 + 1, src_res - 1);
        for (int i = 0; i < dst_res; ++i) {
            const int u0 = 2 * i;
            const int u1 = std::min(u0 + 1, src_res - 1);
            const int count = ((v1 > v0) ? 2 : 1) * ((u1 > u0) ? 2 : 1);
            for (int c = 0; c < channels; ++c) {
                S acc = src[(static_cast<size_t>(v0) * src_res + u0) * channels + c];
                if (u1 > u0) acc += src[(static_cast<size_t>(v0) * src_res + u1) * channels + c];
                if (v1 > v0) {
                    acc += src[(static_cast<size_t>(v1) * src_res + u0) * channels + c];
                    if (u1 > u0)
                        acc += src[(static_cast<size_t>(v1) * src_res + u1) * channels + c];
                }
                dst[(static_cast<size_t>(j) * dst_res + i) * channels + c] =
                    acc / static_cast<S>(count);
            }
        }
    }
}

// Adjoint of mip_pool_forward: distributes each output gradient evenly over
// the texels of its source block, accumulating into grad_src.
template <class S>
void mip_pool_backward(S* grad_src, int src_res, const S* grad_dst, int dst_res, int channels) {
    for (int j = 0; j < dst_res; ++j) {
        const int v0 = 2 * j;
        const int v1 = std::min(v0 + 1, src_res - 1);
        for (int i = 0; i < dst_res; ++i) {
            const int u0 = 2 * i;
            const int u1 = std::min(u0 + 1, src_res - 1);
            const int count = ((v1 > v0) ? 2 : 1) * ((u1 > u0) ? 2 : 1);
            for (int c = 0; c < channels; ++c) {
                const S g = grad_dst[(static_cast<size_t>(j) * dst_res + i) * channels + c] /
                            static_cast<S>(count);
                grad_src[(static_cast<size_t>(v0) * src_res + u0) * channels + c] += g;
                if (u1 > u0) grad_src[(static_cast<size_t>(v0) * src_res + u1) * channels + c] += g;
                if (v1 > v0) {
                    grad_src[(static_cast<size_t>(v1) * src_res + u0) * channels + c] += g;
                    if (u1 > u0)
                        grad_src[(static_cast<size_t>(v1) * src_res + u1) * channels + c] += g;
                }
            }
        }
    }
}

// Rebuilds every derived level from level 0.
template <class S>
void build_mip_pyramid(int base_res, int channels, MipPyramid<S>& pyr) {
    if (base_res < 2) throw std::invalid_argument("build_mip_pyramid: level-0 resolution >= 2");
    const int n_levels = static_cast<int>(pyr.level.size());
    for (int k = 1; k < n_levels; ++k) {
        const int src_res = mip_level_res(base_res, k - 1);
        const int dst_res = mip_level_res(base_res, k);
        pyr.level[static_cast<size_t>(k)].assign(
            static_cast<size_t>(dst_res) * dst_res * channels, S(0));
        mip_pool_forward(pyr.level[static_cast<size_t>(k - 1)].data(), src_res,
                         pyr.level[static_cast<size_t>(k)].data(), dst_res, channels);
    }
}

// Continuous mip level for a footprint radius: clamp(log2(tau/base_radius), 0, max).
inline double query_level(double tau, double base_radius) {
    if (!(tau > 0.0) || !(base_radius > 0.0))
        throw std::invalid_argument("query_level: tau and base_radius must be > 0");
    return std::log2(tau / base_radius);
}

inline double clamp_level(double level, int n_levels) {
    return std::clamp(level, 0.0, static_cast<double>(n_levels - 1));
}

template <class S>
struct TriPlaneField {
    FieldConfig cfg;
    ParamLayout layout;
    std::vector<S> params;
    std::array<MipPyramid<S>, 3> pyramids;  // derived; call rebuild_pyramids after edits

    static TriPlaneField<S> init(const FieldConfig& cfg, uint64_t seed) {
        cfg.validate();
        TriPlaneField<S> f;
        f.cfg = cfg;
        f.layout = ParamLayout::make(cfg);
        f.params.assign(f.layout.total, S(0));
        for (auto& pyr : f.pyramids)
            pyr.level.resize(static_cast<size_t>(cfg.n_levels));

        Rng rng(seed);
        // Near-zero plane init keeps the field close to empty at the start.
        for (int p = 0; p < 3; ++p) {
            S* dst = f.params.data() + f.layout.plane[p];
            for (size_t i = 0; i < f.layout.plane_size; ++i)
                dst[i] = static_cast<S>(rng.uniform(-1e-4, 1e-4));
        }
        auto xavier = [&](size_t off, int fan_in, int fan_out, size_t n) {
            const double a = std::sqrt(6.0 / (fan_in + fan_out));
            for (size_t i = 0; i < n; ++i)
                f.params[off + i] = static_cast<S>(rng.uniform(-a, a));
        };
        const auto& l = f.layout;
        xavier(l.w1, l.in_dim, l.hidden, static_cast<size_t>(l.hidden) * l.in_dim);
        xavier(l.w2, l.hidden, l.hidden, static_cast<size_t>(l.hidden) * l.hidden);
        xavier(l.wc, l.color_in, 3, 3 * static_cast<size_t>(l.color_in));
        // Biases zero except the density head, shifted down so the initial
        // field is nearly transparent.
        f.params[l.bd] = S(-2);
        f.rebuild_pyramids();
        return f;
    }

    double base_radius() const { return cfg.base_radius(); }

    std::span<S> plane_level0(int p) {
        return {params.data() + layout.plane[p], layout.plane_size};
    }
    std::span<const S> plane_level0(int p) const {
        return {params.data() + layout.plane[p], layout.plane_size};
    }

    void rebuild_pyramids() {
        for (int p = 0; p < 3; ++p) {
            auto& pyr = pyramids[static_cast<size_t>(p)];
            pyr.level[0].assign(plane_level0(p).begin(), plane_level0(p).end());
            build_mip_pyramid(cfg.base_res, cfg.feature_dim, pyr);
        }
    }
};

// Gradient buffer matching a field: a flat vector with the parameter layout
// plus per-level plane buffers. Query gradients scatter into the level
// buffers; fold_pyramids chains them down to level 0 (written into the flat
// plane region). MLP gradients accumulate directly into the flat vector.
template <class S>
struct GradBuffer {
    ParamLayout layout;
    FieldConfig cfg;
    std::vector<S> flat;
    std::array<std::vector<std::vector<S>>, 3> pyr;  // levels >= 1

    static GradBuffer<S> make(const FieldConfig& cfg) {
        GradBuffer<S> g;
        g.cfg = cfg;
        g.layout = ParamLayout::make(cfg);
        g.flat.assign(g.layout.total, S(0));
        for (int p = 0; p < 3; ++p) {
            g.pyr[static_cast<size_t>(p)].resize(static_cast<size_t>(cfg.n_levels));
            for (int k = 1; k < cfg.n_levels; ++k) {
                const int res = mip_level_res(cfg.base_res, k);
                g.pyr[static_cast<size_t>(p)][static_cast<size_t>(k)].assign(
                    static_cast<size_t>(res) * res * cfg.feature_dim, S(0));
            }
        }
        return g;
    }

    void zero() {
        std::fill(flat.begin(), flat.end(), S(0));
        for (auto& plane : pyr)
            for (auto& lv : plane) std::fill(lv.begin(), lv.end(), S(0));
    }

    S* level_grad(int p, int k) {
        if (k == 0) return flat.data() + layout.plane[p];
        return pyr[static_cast<size_t>(p)][static_cast<size_t>(k)].data();
    }

    void add(const GradBuffer<S>& o) {
        for (size_t i = 0; i < flat.size(); ++i) flat[i] += o.flat[i];
        for (int p = 0; p < 3; ++p)
            for (size_t k = 1; k < pyr[static_cast<size_t>(p)].size(); ++k) {
                auto& a = pyr[static_cast<size_t>(p)][k];
                const auto& b = o.pyr[static_cast<size_t>(p)][k];
                for (size_t i = 0; i < a.size(); ++i) a[i] += b[i];
            }
    }

    // Propagates level >= 1 gradients through the pooling chain into the flat
    // level-0 plane regions. Call once per batch, after all query gradients
    // have been accumulated.
    void fold_pyramids() {
        for (int p = 0; p < 3; ++p) {
            for (int k = cfg.n_levels - 1; k >= 1; --k) {
                const int src_res = mip_level_res(cfg.base_res, k - 1);
                const int dst_res = mip_level_res(cfg.base_res, k);
                mip_pool_backward(level_grad(p, k - 1), src_res, level_grad(p, k), dst_res,
                                  cfg.feature_dim);
            }
        }
    }
};

namespace detail {

struct BilinearTap {
    size_t idx[4];   // texel base offsets (already scaled by channel count)
    double w[4];
};

// Corner-aligned texel addressing on [-1,1]^2, clamped at the border.
inline BilinearTap bilinear_tap(double u, double v, int res, int channels) {
    auto axis = [res](double x, int& i0, int& i1, double& f) {
        double c = (x + 1.0) * 0.5 * (res - 1);
        c = std::clamp(c, 0.0, static_cast<double>(res - 1));
        i0 = std::min(static_cast<int>(c), std::max(res - 2, 0));
        i1 = std::min(i0 + 1, res - 1);
        f = c - i0;
    };
    int u0, u1, v0, v1;
    double fu, fv;
    axis(u, u0, u1, fu);
    axis(v, v0, v1, fv);
    BilinearTap t;
    auto at = [res, channels](int uu, int vv) {
        return (static_cast<size_t>(vv) * res + uu) * static_cast<size_t>(channels);
    };
    t.idx[0] = at(u0, v0);
    t.idx[1] = at(u1, v0);
    t.idx[2] = at(u0, v1);
    t.idx[3] = at(u1, v1);
    t.w[0] = (1.0 - fu) * (1.0 - fv);
    t.w[1] = fu * (1.0 - fv);
    t.w[2] = (1.0 - fu) * fv;
    t.w[3] = fu * fv;
    return t;
}

// Plane p projects the contracted position onto: 0 -> (x,y), 1 -> (x,z), 2 -> (y,z).
inline void plane_uv(const Vec3& q, int p, double& u, double& v) {
    switch (p) {
        case 0: u = q.x; v = q.y; break;
        case 1: u = q.x; v = q.z; break;
        default: u = q.y; v = q.z; break;
    }
}

}  // namespace detail

// Pre-filtered feature lookup: per plane, bilinear at floor(level) and
// ceil(level) (the eight texel fetches), blended linearly across level, then
// concatenated XY | XZ | YZ into out (3*feature_dim). Positions outside the
// bbox are clamped to its boundary. level must already be clamped to
// [0, n_levels-1].
template <class S>
void query_features(const TriPlaneField<S>& field, const Vec3& pos, double level,
                    S* out) {
    const int C = field.cfg.feature_dim;
    const int n_levels = field.cfg.n_levels;
    const Vec3 q = field.cfg.bbox.contract(pos);
    const int la = std::min(static_cast<int>(level), n_levels - 2);
    const double fl = level - la;
    const S wa = static_cast<S>(1.0 - fl);
    const S wb = static_cast<S>(fl);
    for (int p = 0; p < 3; ++p) {
        double u, v;
        detail::plane_uv(q, p, u, v);
        const auto& pyr = field.pyramids[static_cast<size_t>(p)];
        const int res_a = mip_level_res(field.cfg.base_res, la);
        const int res_b = mip_level_res(field.cfg.base_res, la + 1);
        const auto tap_a = detail::bilinear_tap(u, v, res_a, C);
        const auto tap_b = detail::bilinear_tap(u, v, res_b, C);
        const S* da = pyr.level[static_cast<size_t>(la)].data();
        const S* db = pyr.level[static_cast<size_t>(la + 1)].data();
        S* o = out + static_cast<size_t>(p) * C;
        for (int c = 0; c < C; ++c) {
            S fa = S(0), fb = S(0);
            for (int k = 0; k < 4; ++k) {
                fa += static_cast<S>(tap_a.w[k]) * da[tap_a.idx[k] + static_cast<size_t>(c)];
                fb += static_cast<S>(tap_b.w[k]) * db[tap_b.idx[k] + static_cast<size_t>(c)];
            }
            o[c] = wa * fa + wb * fb;
        }
    }
}

// Adjoint of query_features: scatters d_out into the touched texels of the
// gradient buffer at levels floor(level) and ceil(level).
template <class S>
void query_features_backward(const TriPlaneField<S>& field, const Vec3& pos, double level,
                             const S* d_out, GradBuffer<S>& grad) {
    const int C = field.cfg.feature_dim;
    const int n_levels = field.cfg.n_levels;
    const Vec3 q = field.cfg.bbox.contract(pos);
    const int la = std::min(static_cast<int>(level), n_levels - 2);
    const double fl = level - la;
    const S wa = static_cast<S>(1.0 - fl);
    const S wb = static_cast<S>(fl);
    for (int p = 0; p < 3; ++p) {
        double u, v;
        detail::plane_uv(q, p, u, v);
        const int res_a = mip_level_res(field.cfg.base_res, la);
        const int res_b = mip_level_res(field.cfg.base_res, la + 1);
        const auto tap_a = detail::bilinear_tap(u, v, res_a, C);
        const auto tap_b = detail::bilinear_tap(u, v, res_b, C);
        S* ga = grad.level_grad(p, la);
        S* gb = grad.level_grad(p, la + 1);
        const S* d = d_out + static_cast<size_t>(p) * C;
        for (int c = 0; c < C; ++c) {
            const S ga_c = wa * d[c];
            const S gb_c = wb * d[c];
            for (int k = 0; k < 4; ++k) {
                ga[tap_a.idx[k] + static_cast<size_t>(c)] += static_cast<S>(tap_a.w[k]) * ga_c;
                gb[tap_b.idx[k] + static_cast<size_t>(c)] += static_cast<S>(tap_b.w[k]) * gb_c;
            }
        }
    }
}

namespace activation {

template <class S>
S softplus(S x) {
    // log(1 + e^x), overflow-safe.
    if (x > S(20)) return x;
    return std::log1p(std::exp(x));
}

template <class S>
S sigmoid(S x) {
    if (x >= S(0)) {
        const S e = std::exp(-x);
        return S(1) / (S(1) + e);
    }
    const S e = std::exp(x);
    return e / (S(1) + e);
}

}  // namespace activation

// Decoder forward. feat: 3C tri-plane features; sh: masked view encoding
// (sh_dim). Writes density (>= 0, softplus head) and rgb (in [0,1]^3, sigmoid
// head). h1/h2 receive the post-tanh hidden activations and d_pre the density
// pre-activation; backward needs all three.
template <class S>
void decode_forward(const TriPlaneField<S>& field, const S* feat, const S* sh,
                    S* h1, S* h2, S* d_pre, S* sigma, S* rgb) {
    const auto& l = field.layout;
    const S* P = field.params.data();
    const int in = l.in_dim, H = l.hidden;
    for (int h = 0; h < H; ++h) {
        S acc = P[l.b1 + static_cast<size_t>(h)];
        const S* row = P + l.w1 + static_cast<size_t>(h) * in;
        for (int i = 0; i < in; ++i) acc += row[i] * feat[i];
        h1[h] = std::tanh(acc);
    }
    for (int h = 0; h < H; ++h) {
        S acc = P[l.b2 + static_cast<size_t>(h)];
        const S* row = P + l.w2 + static_cast<size_t>(h) * H;
        for (int i = 0; i < H; ++i) acc += row[i] * h1[i];
        h2[h] = std::tanh(acc);
    }
    S acc_d = P[l.bd];
    {
        const S* wd = P + l.wd;
        for (int i = 0; i < H; ++i) acc_d += wd[i] * h2[i];
    }
    *d_pre = acc_d;
    *sigma = activation::softplus(acc_d);
    const int ci = l.color_in;
    for (int c = 0; c < 3; ++c) {
        S acc = P[l.bc + static_cast<size_t>(c)];
        const S* row = P + l.wc + static_cast<size_t>(c) * ci;
        for (int i = 0; i < H; ++i) acc += row[i] * h2[i];
        for (int i = 0; i < l.sh_dim; ++i) acc += row[H + i] * sh[i];
        rgb[c] = activation::sigmoid(acc);
    }
}

// Decoder adjoint. Adds MLP parameter gradients into grad.flat and writes the
// feature gradient (3C) into d_feat. The view encoding is a constant.
template <class S>
void decode_backward(const TriPlaneField<S>& field, const S* feat, const S* sh,
                     const S* h1, const S* h2, S d_pre, S sigma, const S* rgb,
                     S d_sigma, const S* d_rgb, GradBuffer<S>& grad, S* d_feat,
                     S* scratch_h /* >= 2*hidden */) {
    (void)sigma;
    const auto& l = field.layout;
    const S* P = field.params.data();
    S* G = grad.flat.data();
    const int in = l.in_dim, H = l.hidden, ci = l.color_in;

    S* d_h2 = scratch_h;
    S* d_h1 = scratch_h + H;
    for (int i = 0; i < H; ++i) d_h2[i] = S(0);

    // color head
    for (int c = 0; c < 3; ++c) {
        const S g_pre = d_rgb[c] * rgb[c] * (S(1) - rgb[c]);
        G[l.bc + static_cast<size_t>(c)] += g_pre;
        S* grow = G + l.wc + static_cast<size_t>(c) * ci;
        const S* row = P + l.wc + static_cast<size_t>(c) * ci;
        for (int i = 0; i < H; ++i) {
            grow[i] += g_pre * h2[i];
            d_h2[i] += row[i] * g_pre;
        }
        for (int i = 0; i < l.sh_dim; ++i) grow[H + i] += g_pre * sh[i];
    }
    // density head: softplus'(x) = sigmoid(x)
    {
        const S g_pre = d_sigma * activation::sigmoid(d_pre);
        G[l.bd] += g_pre;
        S* gwd = G + l.wd;
        const S* wd = P + l.wd;
        for (int i = 0; i < H; ++i) {
            gwd[i] += g_pre * h2[i];
            d_h2[i] += wd[i] * g_pre;
        }
    }
    // layer 2
    for (int i = 0; i < H; ++i) d_h1[i] = S(0);
    for (int h = 0; h < H; ++h) {
        const S g_pre = d_h2[h] * (S(1) - h2[h] * h2[h]);
        G[l.b2 + static_cast<size_t>(h)] += g_pre;
        S* grow = G + l.w2 + static_cast<size_t>(h) * H;
        const S* row = P + l.w2 + static_cast<size_t>(h) * H;
        for (int i = 0; i < H; ++i) {
            grow[i] += g_pre * h1[i];
            d_h1[i] += row[i] * g_pre;
        }
    }
    // layer 1
    for (int i = 0; i < in; ++i) d_feat[i] = S(0);
    for (int h = 0; h < H; ++h) {
        const S g_pre = d_h1[h] * (S(1) - h1[h] * h1[h]);
        G[l.b1 + static_cast<size_t>(h)] += g_pre;
        S* grow = G + l.w1 + static_cast<size_t>(h) * in;
        const S* row = P + l.w1 + static_cast<size_t>(h) * in;
        for (int i = 0; i < in; ++i) {
            grow[i] += g_pre * feat[i];
            d_feat[i] += row[i] * g_pre;
        }
    }
}

}  // namespace triray
