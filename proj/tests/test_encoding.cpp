// Copyright 2026 The triray Authors
// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "triray/encoding.hpp"
#include "triray/rng.hpp"

using namespace triray;

namespace {

Vec3 random_unit(Rng& rng) {
    for (;;) {
        Vec3 v{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
        const double n = v.norm();
        if (n > 1e-3 && n <= 1.0) return v / n;
    }
}

// Rotation about an arbitrary axis (Rodrigues), used for the invariance test.
Vec3 rotate(const Vec3& v, const Vec3& axis, double angle) {
    const Vec3 k = axis.normalized();
    const double c = std::cos(angle), s = std::sin(angle);
    return v * c + k.cross(v) * s + k * (k.dot(v) * (1.0 - c));
}

}  // namespace

TEST_CASE("freq_mask at t=0 passes exactly the first three channels") {
    const auto mask = freq_mask({0, 100, 4});
    REQUIRE(mask.size() == 12);
    for (int i = 0; i < 3; ++i) CHECK(mask[static_cast<size_t>(i)] == 1.0);
    for (size_t i = 3; i < mask.size(); ++i) CHECK(mask[i] == 0.0);
}

TEST_CASE("freq_mask at t=T is all ones (hand evaluation at L=4)") {
    // p = t*3L/T = 12, so every index i <= 12 <= p+3 lands in the pass band.
    const auto mask = freq_mask({100, 100, 4});
    REQUIRE(mask.size() == 12);
    for (double v : mask) CHECK(v == 1.0);
}

TEST_CASE("freq_mask mid-schedule hand case") {
    // L=4, T=10, t=3: q = 1.2 visible frequencies -> one full frequency past
    // the base three channels (ones for i <= 6), ramp value frac(1.2) = 0.2 on
    // the next frequency's channels 7..9, zero beyond.
    const auto mask = freq_mask({3, 10, 4});
    REQUIRE(mask.size() == 12);
    for (int i = 1; i <= 6; ++i) CHECK(mask[static_cast<size_t>(i - 1)] == 1.0);
    for (int i = 7; i <= 9; ++i)
        CHECK(mask[static_cast<size_t>(i - 1)] == doctest::Approx(0.2).epsilon(1e-12));
    for (int i = 10; i <= 12; ++i) CHECK(mask[static_cast<size_t>(i - 1)] == 0.0);
}

TEST_CASE("freq_mask entries lie in [0,1] and grow monotonically with t") {
    const int T = 233;
    for (int l : {2, 4, 8}) {
        std::vector<double> prev;
        for (int t = 0; t <= T; t += 7) {
            const auto mask = freq_mask({t, T, l});
            for (double v : mask) {
                CHECK(v >= 0.0);
                CHECK(v <= 1.0);
            }
            if (!prev.empty())
                for (size_t i = 0; i < mask.size(); ++i) CHECK(mask[i] >= prev[i] - 1e-15);
            prev = mask;
        }
    }
}

TEST_CASE("ipe_mask: zero variance passes everything") {
    const auto mask = ipe_mask(0.0, 5);
    REQUIRE(mask.size() == 10);
    for (double v : mask) CHECK(v == 1.0);
}

TEST_CASE("ipe_mask hand evaluation at sigma^2=1, L=2") {
    const auto mask = ipe_mask(1.0, 2);
    REQUIRE(mask.size() == 4);
    CHECK(mask[0] == doctest::Approx(0.6065306597126334236).epsilon(1e-14));
    CHECK(mask[1] == doctest::Approx(0.6065306597126334236).epsilon(1e-14));
    CHECK(mask[2] == doctest::Approx(0.13533528323661269189).epsilon(1e-14));
    CHECK(mask[3] == doctest::Approx(0.13533528323661269189).epsilon(1e-14));
}

TEST_CASE("ipe_mask pairs are equal and strictly decreasing across levels") {
    const auto mask = ipe_mask(0.3, 6);
    for (int k = 0; k < 6; ++k) {
        CHECK(mask[static_cast<size_t>(2 * k)] == mask[static_cast<size_t>(2 * k + 1)]);
        CHECK(mask[static_cast<size_t>(2 * k)] > 0.0);
        CHECK(mask[static_cast<size_t>(2 * k)] <= 1.0);
        if (k > 0)
            CHECK(mask[static_cast<size_t>(2 * k)] < mask[static_cast<size_t>(2 * (k - 1))]);
    }
}

TEST_CASE("annealed_sigma_f_sq powers of two") {
    CHECK(annealed_sigma_f_sq(0.0) == 1.0);
    CHECK(annealed_sigma_f_sq(1.0) == 0.5);
    CHECK(annealed_sigma_f_sq(10.0) == doctest::Approx(std::exp2(-10.0)).epsilon(1e-15));
}

TEST_CASE("ipe_encode_axis reduces to the plain encoding at zero variance") {
    const double mu = 0.731;
    const auto enc = ipe_encode_axis(mu, 0.0, 3);
    REQUIRE(enc.size() == 6);
    for (int k = 0; k < 3; ++k) {
        const double arg = std::exp2(k) * mu;
        CHECK(enc[static_cast<size_t>(2 * k)] == doctest::Approx(std::sin(arg)).epsilon(1e-14));
        CHECK(enc[static_cast<size_t>(2 * k + 1)] ==
              doctest::Approx(std::cos(arg)).epsilon(1e-14));
    }
}

TEST_CASE("ipe_encode_axis at mu=0 zeroes the sine entries") {
    const auto enc = ipe_encode_axis(0.0, 0.7, 4);
    const auto mask = ipe_mask(0.7, 4);
    for (int k = 0; k < 4; ++k) {
        CHECK(enc[static_cast<size_t>(2 * k)] == 0.0);
        CHECK(enc[static_cast<size_t>(2 * k + 1)] == mask[static_cast<size_t>(2 * k)]);
    }
}

TEST_CASE("ipe_encode_axis hand evaluation at mu=pi/4, sigma^2=1, L=1") {
    const auto enc = ipe_encode_axis(std::numbers::pi / 4.0, 1.0, 1);
    REQUIRE(enc.size() == 2);
    CHECK(enc[0] == doctest::Approx(0.42888194248035339824).epsilon(1e-14));
    CHECK(enc[1] == doctest::Approx(0.42888194248035339824).epsilon(1e-14));
}

TEST_CASE("ipe_encode concatenates the three axes") {
    IsotropicGaussian g{{0.2, -0.4, 1.1}, 0.25};
    const auto enc = ipe_encode(g, 3);
    REQUIRE(enc.size() == 18);
    const auto x_block = ipe_encode_axis(0.2, 0.25, 3);
    const auto z_block = ipe_encode_axis(1.1, 0.25, 3);
    for (int i = 0; i < 6; ++i) {
        CHECK(enc[static_cast<size_t>(i)] == x_block[static_cast<size_t>(i)]);
        CHECK(enc[static_cast<size_t>(12 + i)] == z_block[static_cast<size_t>(i)]);
    }
}

TEST_CASE("sh_encode rejects non-unit directions") {
    CHECK_THROWS_AS(sh_encode({1.0, 1.0, 0.0}, 3, {2, 3}), std::invalid_argument);
}

TEST_CASE("sh truncation passes exactly n^2 components") {
    Rng rng(11);
    const Vec3 dir = random_unit(rng);
    for (int n = 0; n <= 4; ++n) {
        const auto enc = sh_encode(dir, 3, {n, 3});
        REQUIRE(enc.size() == 16);
        for (int i = 0; i < 16; ++i) {
            if (i >= n * n) {
                CHECK(enc[static_cast<size_t>(i)] == 0.0);
            }
        }
        // all kept components of a generic direction are nonzero
        int nonzero = 0;
        for (int i = 0; i < n * n; ++i) nonzero += enc[static_cast<size_t>(i)] != 0.0;
        CHECK(nonzero == n * n);
    }
}

TEST_CASE("sh degree-0 component is 1/(2 sqrt(pi)) for any direction") {
    Rng rng(3);
    for (int trial = 0; trial < 10; ++trial) {
        const auto enc = sh_encode(random_unit(rng), 2, {3, 2});
        CHECK(enc[0] == doctest::Approx(0.28209479177387814347).epsilon(1e-14));
    }
}

TEST_CASE("sh basis is orthonormal under brute-force quadrature") {
    // Lat-long quadrature of integral Y_i Y_j dOmega; the independent check of
    // the normalization convention (including Y_0^0 against its closed form).
    const int max_degree = 2;
    const int n_comp = (max_degree + 1) * (max_degree + 1);
    const int n_theta = 200, n_phi = 400;
    std::vector<double> gram(static_cast<size_t>(n_comp) * n_comp, 0.0);
    for (int it = 0; it < n_theta; ++it) {
        const double theta = std::numbers::pi * (it + 0.5) / n_theta;
        const double w = std::sin(theta) * (std::numbers::pi / n_theta) *
                         (2.0 * std::numbers::pi / n_phi);
        for (int ip = 0; ip < n_phi; ++ip) {
            const double phi = 2.0 * std::numbers::pi * (ip + 0.5) / n_phi;
            const Vec3 dir{std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi),
                           std::cos(theta)};
            const auto y = sh_encode(dir, max_degree, {max_degree + 1, max_degree});
            for (int i = 0; i < n_comp; ++i)
                for (int j = 0; j < n_comp; ++j)
                    gram[static_cast<size_t>(i) * n_comp + j] +=
                        w * y[static_cast<size_t>(i)] * y[static_cast<size_t>(j)];
        }
    }
    for (int i = 0; i < n_comp; ++i)
        for (int j = 0; j < n_comp; ++j) {
            const double expect = (i == j) ? 1.0 : 0.0;
            CHECK(gram[static_cast<size_t>(i) * n_comp + j] ==
                  doctest::Approx(expect).epsilon(1e-4));
        }
}

TEST_CASE("per-degree sh energy is rotation invariant") {
    Rng rng(19);
    const int max_degree = 3;
    for (int trial = 0; trial < 20; ++trial) {
        const Vec3 dir = random_unit(rng);
        const Vec3 axis = random_unit(rng);
        const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
        const Vec3 rotated = rotate(dir, axis, angle).normalized();
        const auto a = sh_encode(dir, max_degree, {max_degree + 1, max_degree});
        const auto b = sh_encode(rotated, max_degree, {max_degree + 1, max_degree});
        int idx = 0;
        for (int l = 0; l <= max_degree; ++l) {
            double ea = 0.0, eb = 0.0;
            for (int m = -l; m <= l; ++m, ++idx) {
                ea += a[static_cast<size_t>(idx)] * a[static_cast<size_t>(idx)];
                eb += b[static_cast<size_t>(idx)] * b[static_cast<size_t>(idx)];
            }
            CHECK(std::abs(ea - eb) < 1e-6);
        }
    }
}

TEST_CASE("duality cutoff: zero variance keeps every level") {
    CHECK(duality_cutoff_index(0.0, 8, 0.5) == 7);
}

TEST_CASE("duality cutoff never increases with the variance") {
    int prev = 99;
    for (double x = 16.0; x >= -4.0; x -= 0.5) {
        const int cutoff = duality_cutoff_index(std::exp2(-x), 8, 0.5);
        CHECK(cutoff <= prev);
        prev = cutoff;
    }
    // huge variance suppresses everything
    CHECK(duality_cutoff_index(1e6, 8, 0.5) == -1);
}

TEST_CASE("duality: cutoff advances one level when x grows by 2") {
    // Analytically: entry k keeps exp(-2^(2k-1-x)) >= 1/2 iff
    // 2k <= x + 1 + log2(ln 2), so the cutoff is floor((x + 0.4712...)/2) and
    // shifting x by 2 shifts the cutoff by exactly 1 in the interior regime.
    const int l_freq = 8;
    for (double x = 2.0; x <= 2.0 * l_freq - 4.0; x += 0.5) {
        const int c0 = duality_cutoff_index(annealed_sigma_f_sq(x), l_freq, 0.5);
        const int c1 = duality_cutoff_index(annealed_sigma_f_sq(x + 2.0), l_freq, 0.5);
        CHECK(c1 == c0 + 1);
        // numeric agreement with the closed-form location
        const int analytic = static_cast<int>(
            std::floor((x + 1.0 + std::log2(std::numbers::ln2)) / 2.0));
        CHECK(c0 == analytic);
    }
}
