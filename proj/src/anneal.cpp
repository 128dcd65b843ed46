// Copyright 2026 The triray Authors
// SPDX-License-Identifier: Apache-2.0
#include "triray/anneal.hpp"

#include <cmath>
#include <stdexcept>

namespace triray {

void AnnealSchedule::validate() const {
    if (f_s < 0.0) throw std::invalid_argument("anneal: f_s must be >= 0");
    if (!(theta > 0.0)) throw std::invalid_argument("anneal: theta must be > 0");
    if (n_split < 1) throw std::invalid_argument("anneal: n_split must be >= 1");
    if (t_stop < 1) throw std::invalid_argument("anneal: t_stop must be >= 1");
}

int64_t step_index(int64_t i, const AnnealSchedule& sched) {
    if (i < 0) throw std::invalid_argument("step_index: i must be >= 0");
    return i * sched.n_split / sched.t_stop;
}

double annealed_radius(int64_t i, double tau, const AnnealSchedule& sched) {
    if (!(tau > 0.0)) throw std::invalid_argument("annealed_radius: tau must be > 0");
    if (!sched.enabled || i >= sched.t_stop) return tau;
    const int64_t x = step_index(i, sched);
    return tau + sched.f_s / std::exp2(sched.theta * static_cast<double>(x));
}

double annealed_level(int64_t i, double tau, double base_radius, const AnnealSchedule& sched) {
    if (!(tau > 0.0) || !(base_radius > 0.0))
        throw std::invalid_argument("annealed_level: tau and base_radius must be > 0");
    if (!sched.enabled || i >= sched.t_stop) return std::log2(tau / base_radius);
    const int64_t x = step_index(i, sched);
    const double scale = std::exp2(sched.theta * static_cast<double>(x));
    return std::log2((tau * scale + sched.f_s) / (base_radius * scale));
}

}  // namespace triray
