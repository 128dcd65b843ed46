// Copyright 2026 The triray Authors
// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "triray/rng.hpp"
#include "triray/triplane.hpp"

using namespace triray;

namespace {

// ---- independent reference interpolator (the oracle) -----------------------
// Written against the documented contract only: contract position into
// [-1,1]^3, project per plane, corner-aligned bilinear with border clamp at
// floor/ceil levels, blend by frac(level), concatenate.

double oracle_texel(const std::vector<double>& plane, int res, int channels, int u, int v,
                    int c) {
    u = std::clamp(u, 0, res - 1);
    v = std::clamp(v, 0, res - 1);
    return plane[(static_cast<size_t>(v) * res + u) * channels + c];
}

double oracle_bilinear(const std::vector<double>& plane, int res, int channels, double u,
                       double v, int c) {
    const double cu = std::clamp((u + 1.0) * 0.5 * (res - 1), 0.0, double(res - 1));
    const double cv = std::clamp((v + 1.0) * 0.5 * (res - 1), 0.0, double(res - 1));
    const int u0 = static_cast<int>(std::floor(cu)) == res - 1 && res > 1
                       ? res - 2
                       : static_cast<int>(std::floor(cu));
    const int v0 = static_cast<int>(std::floor(cv)) == res - 1 && res > 1
                       ? res - 2
                       : static_cast<int>(std::floor(cv));
    const double fu = cu - u0;
    const double fv = cv - v0;
    return (1 - fu) * (1 - fv) * oracle_texel(plane, res, channels, u0, v0, c) +
           fu * (1 - fv) * oracle_texel(plane, res, channels, u0 + 1, v0, c) +
           (1 - fu) * fv * oracle_texel(plane, res, channels, u0, v0 + 1, c) +
           fu * fv * oracle_texel(plane, res, channels, u0 + 1, v0 + 1, c);
}

std::vector<double> oracle_query(const TriPlaneField<double>& field, const Vec3& pos,
                                 double level) {
    const int C = field.cfg.feature_dim;
    const Vec3 q = field.cfg.bbox.contract(pos);
    const int la = std::min(static_cast<int>(level), field.cfg.n_levels - 2);
    const double fl = level - la;
    std::vector<double> out(3 * static_cast<size_t>(C));
    for (int p = 0; p < 3; ++p) {
        double u = 0, v = 0;
        if (p == 0) { u = q.x; v = q.y; }
        if (p == 1) { u = q.x; v = q.z; }
        if (p == 2) { u = q.y; v = q.z; }
        const int res_a = mip_level_res(field.cfg.base_res, la);
        const int res_b = mip_level_res(field.cfg.base_res, la + 1);
        for (int c = 0; c < C; ++c) {
            const double a = oracle_bilinear(field.pyramids[size_t(p)].level[size_t(la)],
                                             res_a, C, u, v, c);
            const double b = oracle_bilinear(field.pyramids[size_t(p)].level[size_t(la + 1)],
                                             res_b, C, u, v, c);
            out[static_cast<size_t>(p) * C + c] = (1.0 - fl) * a + fl * b;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------

FieldConfig tiny_config(int base_res = 4, int levels = 2, int C = 2, int hidden = 8,
                        int sh_deg = 2) {
    FieldConfig cfg;
    cfg.base_res = base_res;
    cfg.n_levels = levels;
    cfg.feature_dim = C;
    cfg.hidden_dim = hidden;
    cfg.sh_max_degree = sh_deg;
    return cfg;
}

void randomize_planes(TriPlaneField<double>& field, Rng& rng, double scale = 1.0) {
    for (int p = 0; p < 3; ++p)
        for (auto& v : field.plane_level0(p)) v = rng.uniform(-scale, scale);
    field.rebuild_pyramids();
}

}  // namespace

TEST_CASE("query_level basics and clamping") {
    CHECK(query_level(0.01, 0.01) == 0.0);
    CHECK(query_level(0.02, 0.01) == doctest::Approx(1.0).epsilon(1e-14));
    // tau = 0.75*base: raw level log2(0.75) = -0.415..., clamped to 0
    const double raw = query_level(0.0075, 0.01);
    CHECK(raw == doctest::Approx(-0.4150374992788438).epsilon(1e-12));
    CHECK(clamp_level(raw, 8) == 0.0);
    CHECK(clamp_level(12.5, 8) == 7.0);
    CHECK_THROWS_AS(query_level(0.0, 0.01), std::invalid_argument);
    CHECK_THROWS_AS(query_level(0.01, 0.0), std::invalid_argument);
}

TEST_CASE("base radius is half a level-0 texel") {
    FieldConfig cfg = tiny_config(128, 8, 8);
    CHECK(cfg.base_radius() == doctest::Approx(1.0 / 128.0).epsilon(1e-15));
}

TEST_CASE("mip pyramid: constant planes stay constant") {
    auto field = TriPlaneField<double>::init(tiny_config(8, 4, 2), 0);
    for (int p = 0; p < 3; ++p)
        for (auto& v : field.plane_level0(p)) v = 0.625;
    field.rebuild_pyramids();
    for (int p = 0; p < 3; ++p)
        for (int k = 0; k < 4; ++k)
            for (double v : field.pyramids[size_t(p)].level[size_t(k)])
                CHECK(v == doctest::Approx(0.625).epsilon(1e-15));
}

TEST_CASE("2x2 level pools to the arithmetic mean") {
    std::vector<double> src = {1.0, 2.0, 3.0, 4.0};  // res 2, C 1
    std::vector<double> dst(1);
    mip_pool_forward(src.data(), 2, dst.data(), 1, 1);
    CHECK(dst[0] == doctest::Approx(2.5).epsilon(1e-15));
}

TEST_CASE("checkerboard pools to zero") {
    const int res = 4;
    std::vector<double> src(res * res);
    for (int v = 0; v < res; ++v)
        for (int u = 0; u < res; ++u) src[static_cast<size_t>(v) * res + u] = ((u + v) % 2) ? 1.0 : -1.0;
    std::vector<double> dst(4);
    mip_pool_forward(src.data(), res, dst.data(), 2, 1);
    for (double v : dst) CHECK(v == 0.0);
}

TEST_CASE("odd edges average the remaining texels") {
    // res 3 -> res 2; bottom-right output covers only the single corner texel
    std::vector<double> src = {0, 1, 2,
                               3, 4, 5,
                               6, 7, 8};
    std::vector<double> dst(4);
    mip_pool_forward(src.data(), 3, dst.data(), 2, 1);
    CHECK(dst[0] == doctest::Approx((0 + 1 + 3 + 4) / 4.0));
    CHECK(dst[1] == doctest::Approx((2 + 5) / 2.0));
    CHECK(dst[2] == doctest::Approx((6 + 7) / 2.0));
    CHECK(dst[3] == doctest::Approx(8.0));
}

TEST_CASE("pool backward is the exact adjoint of pool forward") {
    Rng rng(31);
    for (int src_res : {2, 3, 5, 8}) {
        const int dst_res = (src_res + 1) / 2;
        const int C = 3;
        std::vector<double> src(static_cast<size_t>(src_res) * src_res * C);
        std::vector<double> dout(static_cast<size_t>(dst_res) * dst_res * C);
        for (auto& v : src) v = rng.uniform(-1, 1);
        for (auto& v : dout) v = rng.uniform(-1, 1);
        std::vector<double> dst(dout.size());
        mip_pool_forward(src.data(), src_res, dst.data(), dst_res, C);
        std::vector<double> dsrc(src.size(), 0.0);
        mip_pool_backward(dsrc.data(), src_res, dout.data(), dst_res, C);
        // <pool(src), dout> == <src, pool^T(dout)>
        double lhs = 0, rhs = 0;
        for (size_t i = 0; i < dst.size(); ++i) lhs += dst[i] * dout[i];
        for (size_t i = 0; i < src.size(); ++i) rhs += src[i] * dsrc[i];
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
}

TEST_CASE("integer level query equals pure bilinear lookup") {
    auto field = TriPlaneField<double>::init(tiny_config(6, 3, 2), 7);
    Rng rng(41);
    randomize_planes(field, rng);
    std::vector<double> got(6);
    for (int trial = 0; trial < 50; ++trial) {
        const Vec3 pos{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
        for (double level : {0.0, 1.0, 2.0}) {
            query_features(field, pos, level, got.data());
            const auto expect = oracle_query(field, pos, level);
            for (int i = 0; i < 6; ++i)
                CHECK(got[static_cast<size_t>(i)] ==
                      doctest::Approx(expect[static_cast<size_t>(i)]).epsilon(1e-13));
        }
    }
}

TEST_CASE("constant planes decode to the constant at any position and level") {
    auto field = TriPlaneField<double>::init(tiny_config(8, 4, 2), 0);
    for (int p = 0; p < 3; ++p)
        for (auto& v : field.plane_level0(p)) v = -0.311;
    field.rebuild_pyramids();
    Rng rng(5);
    std::vector<double> got(6);
    for (int trial = 0; trial < 30; ++trial) {
        const Vec3 pos{rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)};
        const double level = rng.uniform(0.0, 3.0);
        query_features(field, pos, level, got.data());
        for (double v : got) CHECK(v == doctest::Approx(-0.311).epsilon(1e-13));
    }
}

TEST_CASE("random plane, random point and level match the dense oracle") {
    auto field = TriPlaneField<double>::init(tiny_config(4, 2, 3), 99);
    Rng rng(77);
    randomize_planes(field, rng);
    std::vector<double> got(9);
    for (int trial = 0; trial < 200; ++trial) {
        const Vec3 pos{rng.uniform(-1.2, 1.2), rng.uniform(-1.2, 1.2), rng.uniform(-1.2, 1.2)};
        const double level = rng.uniform(0.0, 1.0);
        query_features(field, pos, level, got.data());
        const auto expect = oracle_query(field, pos, level);
        for (int i = 0; i < 9; ++i)
            CHECK(got[static_cast<size_t>(i)] ==
                  doctest::Approx(expect[static_cast<size_t>(i)]).epsilon(1e-13));
    }
}

TEST_CASE("queries are continuous in position and level") {
    auto field = TriPlaneField<double>::init(tiny_config(8, 4, 2), 3);
    Rng rng(13);
    randomize_planes(field, rng);
    std::vector<double> a(6), b(6);
    const double eps = 1e-7;
    for (int trial = 0; trial < 100; ++trial) {
        const Vec3 pos{rng.uniform(-0.99, 0.99), rng.uniform(-0.99, 0.99),
                       rng.uniform(-0.99, 0.99)};
        // across an integer level boundary
        const double level = 1.0 + rng.uniform(-0.4, 0.4);
        query_features(field, pos, std::max(0.0, level - eps), a.data());
        query_features(field, pos, std::min(3.0, level + eps), b.data());
        for (int i = 0; i < 6; ++i)
            CHECK(std::abs(a[static_cast<size_t>(i)] - b[static_cast<size_t>(i)]) < 1e-5);
        // in position
        const Vec3 shifted = pos + Vec3{eps, -eps, eps};
        query_features(field, pos, 1.3, a.data());
        query_features(field, shifted, 1.3, b.data());
        for (int i = 0; i < 6; ++i)
            CHECK(std::abs(a[static_cast<size_t>(i)] - b[static_cast<size_t>(i)]) < 1e-4);
    }
}

TEST_CASE("points outside the bbox clamp to the boundary") {
    auto field = TriPlaneField<double>::init(tiny_config(8, 4, 2), 3);
    Rng rng(59);
    randomize_planes(field, rng);
    std::vector<double> inside(6), outside(6);
    query_features(field, {1.0, 0.3, -0.2}, 0.5, inside.data());
    query_features(field, {7.5, 0.3, -0.2}, 0.5, outside.data());
    for (int i = 0; i < 6; ++i)
        CHECK(inside[static_cast<size_t>(i)] == outside[static_cast<size_t>(i)]);
}

TEST_CASE("coarse levels suppress high-frequency level-0 content") {
    // zero-mean noise: the top level's feature variance must not exceed the
    // level-0 variance (pre-filtering).
    auto field = TriPlaneField<double>::init(tiny_config(32, 6, 1), 0);
    Rng rng(71);
    randomize_planes(field, rng);
    auto variance_at_level = [&](double level) {
        double acc = 0.0, acc2 = 0.0;
        int count = 0;
        std::vector<double> feat(3);
        for (int i = 0; i < 40; ++i)
            for (int j = 0; j < 40; ++j) {
                const Vec3 pos{-0.975 + 0.05 * i, -0.975 + 0.05 * j, 0.3};
                query_features(field, pos, level, feat.data());
                acc += feat[0];
                acc2 += feat[0] * feat[0];
                ++count;
            }
        const double mean = acc / count;
        return acc2 / count - mean * mean;
    };
    CHECK(variance_at_level(5.0) <= variance_at_level(0.0));
}

TEST_CASE("decode with zero weights gives softplus(0) density and mid-gray") {
    auto field = TriPlaneField<double>::init(tiny_config(), 0);
    std::fill(field.params.begin(), field.params.end(), 0.0);
    field.rebuild_pyramids();
    const auto& l = field.layout;
    std::vector<double> feat(static_cast<size_t>(l.in_dim), 0.4);
    std::vector<double> sh(static_cast<size_t>(l.sh_dim), 0.2);
    std::vector<double> h1(static_cast<size_t>(l.hidden)), h2(static_cast<size_t>(l.hidden));
    double d_pre, sigma, rgb[3];
    decode_forward(field, feat.data(), sh.data(), h1.data(), h2.data(), &d_pre, &sigma, rgb);
    CHECK(sigma == doctest::Approx(std::log(2.0)).epsilon(1e-14));  // softplus(0)
    for (int c = 0; c < 3; ++c) CHECK(rgb[c] == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("decoded rgb is always inside [0,1] and density nonnegative") {
    auto field = TriPlaneField<double>::init(tiny_config(), 12);
    const auto& l = field.layout;
    Rng rng(9);
    std::vector<double> feat(static_cast<size_t>(l.in_dim));
    std::vector<double> sh(static_cast<size_t>(l.sh_dim));
    std::vector<double> h1(static_cast<size_t>(l.hidden)), h2(static_cast<size_t>(l.hidden));
    for (int trial = 0; trial < 200; ++trial) {
        for (auto& v : feat) v = rng.uniform(-30, 30);
        for (auto& v : sh) v = rng.uniform(-3, 3);
        double d_pre, sigma, rgb[3];
        decode_forward(field, feat.data(), sh.data(), h1.data(), h2.data(), &d_pre, &sigma,
                       rgb);
        CHECK(sigma >= 0.0);
        for (int c = 0; c < 3; ++c) {
            CHECK(rgb[c] >= 0.0);
            CHECK(rgb[c] <= 1.0);
        }
    }
}

namespace {
constexpr double kGoldenSigma = 0.12692801104297249;
constexpr double kGoldenRgb[3] = {0.47845127568565088, 0.455760230304188,
                                  0.43175545520519637};
}  // namespace

TEST_CASE("decode golden forward pass (regression, seeded init)") {
    // Computed once from the seed-0 initialization with the fixed input below
    // and frozen; guards the decoder against accidental rewiring.
    auto field = TriPlaneField<double>::init(tiny_config(4, 2, 2, 8, 2), 0);
    const auto& l = field.layout;
    std::vector<double> feat(static_cast<size_t>(l.in_dim));
    std::vector<double> sh(static_cast<size_t>(l.sh_dim));
    for (int i = 0; i < l.in_dim; ++i) feat[static_cast<size_t>(i)] = 0.1 * (i + 1);
    for (int i = 0; i < l.sh_dim; ++i) sh[static_cast<size_t>(i)] = 0.05 * (i - 3);
    std::vector<double> h1(static_cast<size_t>(l.hidden)), h2(static_cast<size_t>(l.hidden));
    double d_pre, sigma, rgb[3];
    decode_forward(field, feat.data(), sh.data(), h1.data(), h2.data(), &d_pre, &sigma, rgb);
    CHECK(sigma == doctest::Approx(kGoldenSigma).epsilon(1e-9));
    CHECK(rgb[0] == doctest::Approx(kGoldenRgb[0]).epsilon(1e-9));
    CHECK(rgb[1] == doctest::Approx(kGoldenRgb[1]).epsilon(1e-9));
    CHECK(rgb[2] == doctest::Approx(kGoldenRgb[2]).epsilon(1e-9));
}
