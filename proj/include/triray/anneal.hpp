// Copyright 2026 The triray Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

namespace triray {

// Exponential decay schedule for the sample-sphere radius. The footprint fed
// to the mip-level query starts f_s larger than the cone radius and shrinks
// in n_split steps until iteration t_stop, after which it is the cone radius
// exactly. Only the level-query radius changes; ray sampling is untouched.
struct AnnealSchedule {
    double f_s = 0.15;
    double theta = 0.2;
    int n_split = 30;
    int t_stop = 2000;
    bool enabled = true;

    void validate() const;
};

// x = floor(i * n_split / t_stop)
int64_t step_index(int64_t i, const AnnealSchedule& sched);

// r_i = tau + f_s / 2^(theta*x) while i < t_stop and enabled; tau otherwise
// (bit-for-bit: the input value is returned unchanged).
double annealed_radius(int64_t i, double tau, const AnnealSchedule& sched);

// l_i = log2((tau * 2^(theta*x) + f_s) / (base_radius * 2^(theta*x))) while
// the schedule is active; log2(tau / base_radius) otherwise. Callers clamp
// to the valid plane-level range.
double annealed_level(int64_t i, double tau, double base_radius, const AnnealSchedule& sched);

}  // namespace triray
