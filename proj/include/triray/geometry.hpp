// Copyright 2026 The triray Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "triray/vec.hpp"

namespace triray {

// Pinhole camera, right-handed, looking down -z in camera space, y up.
struct Camera {
    int width = 0;
    int height = 0;
    double focal = 0.0;  // pinhole focal length in pixels
    Mat4 cam_to_world = Mat4::identity();
    double near = 2.0;
    double far = 6.0;

    // Validates invariants, throws std::invalid_argument on violation.
    static Camera make(int width, int height, double focal, const Mat4& cam_to_world,
                       double near, double far);

    static Camera from_angle_x(int width, int height, double camera_angle_x,
                               const Mat4& cam_to_world, double near, double far);

    Vec3 position() const { return cam_to_world.translation(); }
    double camera_angle_x() const;
};

// Rays are emitted in units where the image plane sits at unit depth along
// the optical axis: dir = ((px+0.5-cx)/focal, -(py+0.5-cy)/focal, -1) rotated
// to world. The direction is left unnormalized so that |d| along with the
// matching focal length kRayFocal = 1 feeds the cone-footprint formula; the
// pixel extents dx, dy are measured on that unit-depth plane.
inline constexpr double kRayFocal = 1.0;

struct Ray {
    Vec3 origin;
    Vec3 dir;                 // unnormalized, unit depth component in camera space
    double disc_radius = 0;   // sqrt(dx*dy/pi)
    double pixel_dx = 0;      // pixel footprint extents at unit depth
    double pixel_dy = 0;
};

// A sphere sampled along a cone-shaped ray footprint.
struct ConeSample {
    double t = 0;     // ray parameter, center = origin + t*dir
    Vec3 center;
    double tau = 0;   // sphere radius, world units
};

// Ray through the center of pixel (px, py). Throws on out-of-bounds pixels.
Ray generate_ray(const Camera& camera, int px, int py);

// Radius of the sphere inscribed in the pixel cone at ray parameter t:
//   tau = (|x-o| * f * r_disc) / (|d| * sqrt((sqrt(|d|^2 - f^2) - r_disc)^2 + f^2))
// with |x-o| = t*|d|. Requires |d|^2 >= f^2 (equality is the on-axis pixel)
// and t > 0.
double cone_sphere_radius(const Ray& ray, double t_dist, double focal_f);

// n_samples spheres along the ray, t strictly increasing within [near, far].
// Stratified mode jitters one uniform draw per bin from the seeded RNG;
// otherwise samples sit at bin midpoints. Deterministic for a fixed seed.
std::vector<ConeSample> sample_cone(const Ray& ray, const Camera& camera, int n_samples,
                                    bool stratified, uint64_t rng_seed);

}  // namespace triray
