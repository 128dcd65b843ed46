// Copyright 2026 The triray Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "triray/geometry.hpp"
#include "triray/image.hpp"
#include "triray/vec.hpp"

namespace triray {

struct View {
    Camera camera;
    Image image;  // 3-channel, [0,1], alpha already composited onto white
};

struct Dataset {
    std::vector<View> train, val, test;
    std::string name;
};

// Loads a transforms_{train,val,test}.json scene directory. Cameras are
// right-handed with -z forward; focal = 0.5*W / tan(0.5*camera_angle_x).
// RGBA images are composited onto a white background. Throws with the
// offending path on missing or malformed inputs.
Dataset load_blender(const std::filesystem::path& dir, double near = 2.0, double far = 6.0);

// Writes a dataset back out in the same format (8-bit RGB images).
void save_blender(const Dataset& ds, const std::filesystem::path& dir);

// Restricts the training split to the given view ids, in order, and thins the
// test split to at most 25 views via index floor(k*N/25). Throws on
// out-of-range ids.
Dataset select_fewshot(const Dataset& ds, const std::vector<int>& ids);

inline const std::vector<int>& default_fewshot_ids() {
    static const std::vector<int> ids = {26, 86, 2, 55, 75, 93, 16, 73};
    return ids;
}

// Non-overlapping factor x factor block means; dimensions not divisible by
// the factor are cropped down to the nearest multiple first.
Image downsample_avg(const Image& img, int factor);

// Applies downsample_avg to every view and rescales the cameras to match.
Dataset downsample_dataset(const Dataset& ds, int factor);

// Analytic test scene: constant-density primitives with closed-form
// transmittance, used as ground truth generator and renderer oracle.
struct Primitive {
    enum class Kind { Sphere, Box };
    Kind kind = Kind::Sphere;
    Vec3 center;
    Vec3 half_size;  // spheres use half_size.x as the radius
    double rgb[3] = {1.0, 1.0, 1.0};
    double density = 1.0;
    // directional emission tint: color scales with (1 + gloss * dot(dir, axis))
    Vec3 gloss_axis{0.0, 0.0, 1.0};
    double gloss = 0.0;
};

struct ProceduralScene {
    std::vector<Primitive> primitives;
    double background[3] = {1.0, 1.0, 1.0};

    double density_at(const Vec3& p) const;
    // Total density and density-weighted emission color at a point, for a ray
    // with unit direction view_dir (emission may be view-dependent).
    void emission_at(const Vec3& p, const Vec3& view_dir, double* sigma, double* rgb) const;
};

// Parses the line-based scene format:
//   background r g b
//   sphere cx cy cz radius r g b density
//   box cx cy cz hx hy hz r g b density
// '#' starts a comment.
ProceduralScene load_scene_file(const std::filesystem::path& path);

// The built-in toy scene used by the default procedural dataset.
ProceduralScene make_toy_scene();

// Exact ground truth: per pixel, the piecewise-constant medium along the ray
// is composited in closed form over the primitive intervals. The optical
// depth is measured in the ray parameter, matching the quadrature renderer.
// Returns the rgb image; *opacity_out (optional) gets 1 - final transmittance.
Image render_procedural_gt(const ProceduralScene& scene, const Camera& camera,
                           Image* opacity_out = nullptr);

// Camera on an orbit around the origin: azimuth/elevation in radians,
// distance in world units, z-up.
Camera make_orbit_camera(double azimuth, double elevation, double distance, int width,
                         int height, double camera_angle_x, double near, double far);

struct ProceduralDatasetParams {
    int resolution = 64;
    int n_train = 8;
    int n_val = 2;
    int n_test = 10;
    double camera_angle_x = 0.6911112;
    double orbit_distance = 4.0;
    double azimuth_span = 6.2832;  // radians covered by the training poses
    double near = 2.0;
    double far = 6.0;
};

// Deterministic, seed-free poses: training views ring the scene at two
// alternating elevations; val/test views sit at interleaved azimuths and a
// distinct elevation so they are genuinely held out.
Dataset make_procedural_dataset(const ProceduralScene& scene,
                                const ProceduralDatasetParams& params);

}  // namespace triray
