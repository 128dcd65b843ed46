// Copyright 2026 The triray Authors
// SPDX-License-Identifier: Apache-2.0
#include "triray/geometry.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "triray/rng.hpp"

namespace triray {

Camera Camera::make(int width, int height, double focal, const Mat4& cam_to_world,
                    double near, double far) {
    if (width < 1 || height < 1)
        throw std::invalid_argument("camera: width and height must be >= 1");
    if (!(focal > 0.0)) throw std::invalid_argument("camera: focal must be > 0");
    if (!(near > 0.0) || !(near < far))
        throw std::invalid_argument("camera: need 0 < near < far");
    if (cam_to_world.rotation_orthonormality_error() > 1e-6)
        throw std::invalid_argument("camera: rotation block is not orthonormal");
    Camera c;
    c.width = width;
    c.height = height;
    c.focal = focal;
    c.cam_to_world = cam_to_world;
    c.near = near;
    c.far = far;
    return c;
}

Camera Camera::from_angle_x(int width, int height, double camera_angle_x,
                            const Mat4& cam_to_world, double near, double far) {
    if (!(camera_angle_x > 0.0) || camera_angle_x >= std::numbers::pi)
        throw std::invalid_argument("camera: camera_angle_x out of range (0, pi)");
    const double focal = 0.5 * width / std::tan(0.5 * camera_angle_x);
    return make(width, height, focal, cam_to_world, near, far);
}

double Camera::camera_angle_x() const {
    return 2.0 * std::atan(0.5 * width / focal);
}

Ray generate_ray(const Camera& camera, int px, int py) {
    if (px < 0 || px >= camera.width || py < 0 || py >= camera.height)
        throw std::invalid_argument("generate_ray: pixel (" + std::to_string(px) + "," +
                                    std::to_string(py) + ") out of bounds");
    const double cx = 0.5 * camera.width;
    const double cy = 0.5 * camera.height;
    const Vec3 dir_cam{(px + 0.5 - cx) / camera.focal,
                       -(py + 0.5 - cy) / camera.focal,
                       -1.0};
    Ray ray;
    ray.origin = camera.position();
    ray.dir = camera.cam_to_world.transform_dir(dir_cam);
    ray.pixel_dx = 1.0 / camera.focal;
    ray.pixel_dy = 1.0 / camera.focal;
    ray.disc_radius = std::sqrt(ray.pixel_dx * ray.pixel_dy / std::numbers::pi);
    return ray;
}

double cone_sphere_radius(const Ray& ray, double t_dist, double focal_f) {
    if (!(t_dist > 0.0)) throw std::invalid_argument("cone_sphere_radius: t must be > 0");
    const double d_norm_sq = ray.dir.norm_sq();
    const double f_sq = focal_f * focal_f;
    // |d| == f is the on-axis pixel; only |d| < f leaves the cone undefined.
    if (d_norm_sq < f_sq)
        throw std::domain_error("cone_sphere_radius: |d|^2 < f^2, cone undefined");
    const double d_norm = std::sqrt(d_norm_sq);
    const double dist = t_dist * d_norm;  // |x - o|
    const double rho = std::sqrt(d_norm_sq - f_sq);
    const double edge = rho - ray.disc_radius;
    const double denom = d_norm * std::sqrt(edge * edge + f_sq);
    return dist * focal_f * ray.disc_radius / denom;
}

std::vector<ConeSample> sample_cone(const Ray& ray, const Camera& camera, int n_samples,
                                    bool stratified, uint64_t rng_seed) {
    if (n_samples < 1) throw std::invalid_argument("sample_cone: n_samples must be >= 1");
    Rng rng(rng_seed);
    const double span = camera.far - camera.near;
    std::vector<ConeSample> samples;
    samples.reserve(static_cast<size_t>(n_samples));
    for (int j = 0; j < n_samples; ++j) {
        const double u = stratified ? rng.next_double() : 0.5;
        const double t = camera.near + (j + u) / n_samples * span;
        ConeSample s;
        s.t = t;
        s.center = ray.origin + t * ray.dir;
        s.tau = cone_sphere_radius(ray, t, kRayFocal);
        samples.push_back(s);
    }
    return samples;
}

}  // namespace triray
