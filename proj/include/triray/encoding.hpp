// Copyright 2026 The triray Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "triray/vec.hpp"

namespace triray {

// Parameters of the linearly expanding frequency mask.
struct FreqMaskParams {
    int t_iter = 0;   // current iteration
    int t_total = 1;  // schedule length
    int l_freq = 1;   // number of frequency levels; mask length is 3*l_freq
};

// Mask over a 3-axis sinusoidal encoding, length 3*l_freq (one entry per axis
// channel). With q = t*l_freq/T and e = 3*floor(q), 1-indexed entry i is
//   1        if i <= e + 3
//   frac(q)  if e + 3 < i <= e + 6
//   0        otherwise
// so the pass band widens linearly from the 3 lowest channels at t=0 to the
// full vector at t=T, the three channels of one frequency sharing each ramp.
// Entries are in [0,1] and elementwise non-decreasing in t.
std::vector<double> freq_mask(const FreqMaskParams& params);

// Isotropic Gaussian footprint: position and shared per-axis variance.
struct IsotropicGaussian {
    Vec3 mu;
    double sigma_f_sq = 0.0;
};

// Low-pass mask over one axis of the sinusoidal encoding, length 2*l_freq.
// The (sin, cos) pair at frequency level k both get exp(-2^(2k-1) * sigma_f_sq).
std::vector<double> ipe_mask(double sigma_f_sq, int l_freq);

// Exponentially shrinking footprint variance: 1 / 2^x.
double annealed_sigma_f_sq(double x_step);

// One axis of the expected sinusoidal encoding under the Gaussian footprint:
// [sin(mu), cos(mu), sin(2 mu), cos(2 mu), ..., sin(2^(L-1) mu), cos(2^(L-1) mu)]
// multiplied elementwise by ipe_mask(sigma_f_sq, L).
std::vector<double> ipe_encode_axis(double mu, double sigma_f_sq, int l_freq);

// All three axes concatenated (x block, then y, then z); length 6*l_freq.
std::vector<double> ipe_encode(const IsotropicGaussian& g, int l_freq);

// Keep only spherical-harmonic degrees below n_trunc.
struct SHTruncation {
    int n_trunc = 0;
    int max_degree = 0;
};

// Real orthonormal spherical-harmonic basis (Condon-Shortley phase) evaluated
// at a unit direction, ordered by degree l = 0..max_degree and order
// m = -l..l; (max_degree+1)^2 values. Components at 1-indexed position
// i > n_trunc^2 are set to exactly 0. Throws if |dir| deviates from 1 by more
// than 1e-6.
std::vector<double> sh_encode(const Vec3& dir, int max_degree, const SHTruncation& trunc);

// Largest frequency level whose ipe_mask entry is >= threshold, or -1.
int duality_cutoff_index(double sigma_f_sq, int l_freq, double threshold);

}  // namespace triray
