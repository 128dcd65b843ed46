// Copyright 2026 The triray Authors
// SPDX-License-Identifier: Apache-2.0
#include "triray/dataio.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace triray {

namespace {

using nlohmann::json;

Mat4 parse_transform(const json& rows, const std::filesystem::path& where) {
    if (!rows.is_array() || rows.size() != 4)
        throw std::runtime_error("malformed transform_matrix in " + where.string());
    Mat4 m;
    for (int i = 0; i < 4; ++i) {
        const auto& row = rows[static_cast<size_t>(i)];
        if (!row.is_array() || row.size() != 4)
            throw std::runtime_error("malformed transform_matrix row in " + where.string());
        for (int j = 0; j < 4; ++j) m.m[i][j] = row[static_cast<size_t>(j)].get<double>();
    }
    return m;
}

Image composite_on_white(const Image& img) {
    if (img.channels == 3) return img;
    Image out(img.width, img.height, 3);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            const double a = img.at(x, y, 3);
            for (int c = 0; c < 3; ++c)
                out.at(x, y, c) = a * img.at(x, y, c) + (1.0 - a);
        }
    return out;
}

std::vector<View> load_split(const std::filesystem::path& dir, const std::string& split,
                             double near, double far) {
    const auto json_path = dir / ("transforms_" + split + ".json");
    std::ifstream in(json_path);
    if (!in) throw std::runtime_error("missing transforms file: " + json_path.string());
    json root;
    try {
        in >> root;
    } catch (const json::exception& e) {
        throw std::runtime_error("failed to parse " + json_path.string() + ": " + e.what());
    }
    if (!root.contains("camera_angle_x"))
        throw std::runtime_error("missing camera_angle_x in " + json_path.string());
    const double angle_x = root["camera_angle_x"].get<double>();
    if (!root.contains("frames") || !root["frames"].is_array())
        throw std::runtime_error("missing frames in " + json_path.string());

    std::vector<View> views;
    for (const auto& frame : root["frames"]) {
        if (!frame.contains("file_path") || !frame.contains("transform_matrix"))
            throw std::runtime_error("malformed frame in " + json_path.string());
        const Mat4 c2w = parse_transform(frame["transform_matrix"], json_path);
        auto file_path = frame["file_path"].get<std::string>();
        std::filesystem::path img_path = dir / (file_path + ".png");
        if (!std::filesystem::exists(img_path)) {
            // some exports store the extension already
            img_path = dir / file_path;
            if (!std::filesystem::exists(img_path))
                throw std::runtime_error("missing image file: " +
                                         (dir / (file_path + ".png")).string());
        }
        Image img = composite_on_white(load_png(img_path));
        View v;
        v.camera = Camera::from_angle_x(img.width, img.height, angle_x, c2w, near, far);
        v.image = std::move(img);
        views.push_back(std::move(v));
    }
    return views;
}

}  // namespace

Dataset load_blender(const std::filesystem::path& dir, double near, double far) {
    Dataset ds;
    ds.name = dir.filename().string();
    ds.train = load_split(dir, "train", near, far);
    ds.val = load_split(dir, "val", near, far);
    ds.test = load_split(dir, "test", near, far);
    const int w = ds.train.empty() ? 0 : ds.train.front().image.width;
    const int h = ds.train.empty() ? 0 : ds.train.front().image.height;
    for (const auto* split : {&ds.train, &ds.val, &ds.test})
        for (const auto& v : *split)
            if (v.image.width != w || v.image.height != h)
                throw std::runtime_error("load_blender: images in " + dir.string() +
                                         " differ in resolution");
    return ds;
}

void save_blender(const Dataset& ds, const std::filesystem::path& dir) {
    auto save_split = [&](const std::vector<View>& views, const std::string& split) {
        if (views.empty()) return;
        std::filesystem::create_directories(dir / split);
        json root;
        root["camera_angle_x"] = views.front().camera.camera_angle_x();
        root["frames"] = json::array();
        for (size_t i = 0; i < views.size(); ++i) {
            const auto& v = views[i];
            json frame;
            frame["file_path"] = "./" + split + "/r_" + std::to_string(i);
            json rows = json::array();
            for (int r = 0; r < 4; ++r) {
                json row = json::array();
                for (int c = 0; c < 4; ++c) row.push_back(v.camera.cam_to_world.m[r][c]);
                rows.push_back(row);
            }
            frame["transform_matrix"] = rows;
            root["frames"].push_back(frame);
            save_png_rgb8(v.image, dir / split / ("r_" + std::to_string(i) + ".png"));
        }
        std::ofstream out(dir / ("transforms_" + split + ".json"));
        out << root.dump(2) << "\n";
    };
    std::filesystem::create_directories(dir);
    save_split(ds.train, "train");
    save_split(ds.val, "val");
    save_split(ds.test, "test");
}

Dataset select_fewshot(const Dataset& ds, const std::vector<int>& ids) {
    Dataset out;
    out.name = ds.name;
    out.val = ds.val;
    for (int id : ids) {
        if (id < 0 || static_cast<size_t>(id) >= ds.train.size())
            throw std::invalid_argument("select_fewshot: view id " + std::to_string(id) +
                                        " out of range");
        out.train.push_back(ds.train[static_cast<size_t>(id)]);
    }
    const size_t n_test = ds.test.size();
    if (n_test <= 25) {
        out.test = ds.test;
    } else {
        for (size_t k = 0; k < 25; ++k)
            out.test.push_back(ds.test[k * n_test / 25]);
    }
    return out;
}

Image downsample_avg(const Image& img, int factor) {
    if (factor < 1) throw std::invalid_argument("downsample_avg: factor must be >= 1");
    if (factor == 1) return img;
    const int w = img.width / factor;
    const int h = img.height / factor;
    if (w < 1 || h < 1) throw std::invalid_argument("downsample_avg: image smaller than factor");
    Image out(w, h, img.channels);
    const double inv = 1.0 / (static_cast<double>(factor) * factor);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < img.channels; ++c) {
                double acc = 0.0;
                for (int dy = 0; dy < factor; ++dy)
                    for (int dx = 0; dx < factor; ++dx)
                        acc += img.at(x * factor + dx, y * factor + dy, c);
                out.at(x, y, c) = acc * inv;
            }
    return out;
}

Dataset downsample_dataset(const Dataset& ds, int factor) {
    if (factor == 1) return ds;
    Dataset out;
    out.name = ds.name;
    auto shrink = [factor](const std::vector<View>& views) {
        std::vector<View> r;
        r.reserve(views.size());
        for (const auto& v : views) {
            View nv;
            nv.image = downsample_avg(v.image, factor);
            nv.camera = Camera::make(nv.image.width, nv.image.height, v.camera.focal / factor,
                                     v.camera.cam_to_world, v.camera.near, v.camera.far);
            r.push_back(std::move(nv));
        }
        return r;
    };
    out.train = shrink(ds.train);
    out.val = shrink(ds.val);
    out.test = shrink(ds.test);
    return out;
}

double ProceduralScene::density_at(const Vec3& p) const {
    double sigma = 0.0;
    for (const auto& prim : primitives) {
        if (prim.kind == Primitive::Kind::Sphere) {
            if ((p - prim.center).norm_sq() <= prim.half_size.x * prim.half_size.x)
                sigma += prim.density;
        } else {
            const Vec3 d = p - prim.center;
            if (std::abs(d.x) <= prim.half_size.x && std::abs(d.y) <= prim.half_size.y &&
                std::abs(d.z) <= prim.half_size.z)
                sigma += prim.density;
        }
    }
    return sigma;
}

void ProceduralScene::emission_at(const Vec3& p, const Vec3& view_dir, double* sigma,
                                  double* rgb) const {
    double total = 0.0;
    double mix[3] = {0.0, 0.0, 0.0};
    for (const auto& prim : primitives) {
        bool inside;
        if (prim.kind == Primitive::Kind::Sphere) {
            inside = (p - prim.center).norm_sq() <= prim.half_size.x * prim.half_size.x;
        } else {
            const Vec3 d = p - prim.center;
            inside = std::abs(d.x) <= prim.half_size.x && std::abs(d.y) <= prim.half_size.y &&
                     std::abs(d.z) <= prim.half_size.z;
        }
        if (inside) {
            const double tint =
                prim.gloss == 0.0
                    ? 1.0
                    : 1.0 + prim.gloss * view_dir.dot(prim.gloss_axis);
            total += prim.density;
            for (int c = 0; c < 3; ++c)
                mix[c] += prim.density * std::clamp(prim.rgb[c] * tint, 0.0, 1.0);
        }
    }
    *sigma = total;
    for (int c = 0; c < 3; ++c) rgb[c] = total > 0.0 ? mix[c] / total : 0.0;
}

ProceduralScene load_scene_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open scene file: " + path.string());
    ProceduralScene scene;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string kind;
        if (!(ls >> kind)) continue;
        auto bad = [&](const char* why) {
            throw std::runtime_error("scene file " + path.string() + " line " +
                                     std::to_string(line_no) + ": " + why);
        };
        if (kind == "background") {
            if (!(ls >> scene.background[0] >> scene.background[1] >> scene.background[2]))
                bad("expected: background r g b");
        } else if (kind == "sphere") {
            Primitive p;
            p.kind = Primitive::Kind::Sphere;
            double radius;
            if (!(ls >> p.center.x >> p.center.y >> p.center.z >> radius >> p.rgb[0] >>
                  p.rgb[1] >> p.rgb[2] >> p.density))
                bad("expected: sphere cx cy cz radius r g b density");
            if (radius <= 0.0 || p.density < 0.0) bad("radius must be > 0, density >= 0");
            p.half_size = {radius, radius, radius};
            std::string tail;
            if (ls >> tail) {
                if (tail != "gloss" ||
                    !(ls >> p.gloss_axis.x >> p.gloss_axis.y >> p.gloss_axis.z >> p.gloss))
                    bad("trailing fields must be: gloss ux uy uz strength");
                p.gloss_axis = p.gloss_axis.normalized();
            }
            scene.primitives.push_back(p);
        } else if (kind == "box") {
            Primitive p;
            p.kind = Primitive::Kind::Box;
            if (!(ls >> p.center.x >> p.center.y >> p.center.z >> p.half_size.x >>
                  p.half_size.y >> p.half_size.z >> p.rgb[0] >> p.rgb[1] >> p.rgb[2] >>
                  p.density))
                bad("expected: box cx cy cz hx hy hz r g b density");
            if (p.half_size.x <= 0.0 || p.half_size.y <= 0.0 || p.half_size.z <= 0.0 ||
                p.density < 0.0)
                bad("half sizes must be > 0, density >= 0");
            std::string tail;
            if (ls >> tail) {
                if (tail != "gloss" ||
                    !(ls >> p.gloss_axis.x >> p.gloss_axis.y >> p.gloss_axis.z >> p.gloss))
                    bad("trailing fields must be: gloss ux uy uz strength");
                p.gloss_axis = p.gloss_axis.normalized();
            }
            scene.primitives.push_back(p);
        } else {
            bad("unknown directive");
        }
    }
    return scene;
}

ProceduralScene make_toy_scene() {
    ProceduralScene s;
    s.background[0] = s.background[1] = s.background[2] = 1.0;
    auto sphere = [&s](Vec3 c, double r, double cr, double cg, double cb, double d = 60.0) {
        Primitive p;
        p.kind = Primitive::Kind::Sphere;
        p.center = c;
        p.half_size = {r, r, r};
        p.rgb[0] = cr;
        p.rgb[1] = cg;
        p.rgb[2] = cb;
        p.density = d;
        s.primitives.push_back(p);
        return s.primitives.size() - 1;
    };
    auto glossy = [&s](size_t idx, Vec3 axis, double strength) {
        s.primitives[idx].gloss_axis = axis.normalized();
        s.primitives[idx].gloss = strength;
    };
    auto box = [&s](Vec3 c, Vec3 h, double cr, double cg, double cb, double d = 60.0) {
        Primitive p;
        p.kind = Primitive::Kind::Box;
        p.center = c;
        p.half_size = h;
        p.rgb[0] = cr;
        p.rgb[1] = cg;
        p.rgb[2] = cb;
        p.density = d;
        s.primitives.push_back(p);
    };
    // central body with satellites; several emit view-tinted color, which is
    // what makes sparse-view fitting genuinely ambiguous
    glossy(sphere({0.0, 0.0, -0.08}, 0.34, 0.7, 0.25, 0.2), {0.4, -0.8, 0.45}, 0.75);
    glossy(sphere({0.52, 0.28, 0.18}, 0.15, 0.2, 0.55, 0.3), {-0.7, 0.3, 0.65}, 0.85);
    sphere({-0.45, 0.4, -0.28}, 0.13, 0.2, 0.3, 0.85);
    glossy(sphere({0.12, -0.55, 0.38}, 0.12, 0.75, 0.7, 0.2), {0.9, 0.2, -0.4}, 0.8);
    box({-0.38, -0.42, 0.1}, {0.14, 0.11, 0.28}, 0.2, 0.75, 0.75);
    box({0.05, 0.48, 0.5}, {0.28, 0.09, 0.06}, 0.7, 0.25, 0.75);
    box({0.0, 0.0, -0.6}, {0.55, 0.55, 0.05}, 0.45, 0.45, 0.4);
    // fine structure: a ring of small beads with alternating colors and a
    // picket row of thin slabs, both one or two pixels wide at 64x64
    for (int i = 0; i < 12; ++i) {
        const double az = 2.0 * std::numbers::pi * i / 12.0;
        const double r = 0.62;
        const double hue = (i % 3 == 0) ? 0.9 : (i % 3 == 1 ? 0.15 : 0.5);
        const size_t bead =
            sphere({r * std::cos(az), r * std::sin(az), 0.32 + 0.1 * ((i % 2) ? 1 : -1)},
                   0.055, hue, 1.0 - hue, (i % 4) * 0.25);
        if (i % 2) glossy(bead, {std::cos(az + 1.3), std::sin(az + 1.3), 0.5}, 0.9);
    }
    for (int i = 0; i < 6; ++i) {
        const double x = -0.5 + 0.2 * i;
        box({x, -0.15, -0.42}, {0.025, 0.025, 0.13}, (i % 2) ? 0.95 : 0.1, 0.2,
            (i % 2) ? 0.1 : 0.95);
    }
    sphere({0.3, -0.05, 0.62}, 0.07, 0.05, 0.05, 0.05);
    sphere({-0.2, 0.1, 0.55}, 0.06, 0.98, 0.85, 0.1);
    return s;
}

namespace {

// Segment [t0, t1] of the ray inside the primitive, clipped to [near, far].
// Returns false when the ray misses.
bool primitive_interval(const Primitive& prim, const Vec3& o, const Vec3& d, double t_min,
                        double t_max, double* t0, double* t1) {
    double lo, hi;
    if (prim.kind == Primitive::Kind::Sphere) {
        const Vec3 oc = o - prim.center;
        const double a = d.dot(d);
        const double b = 2.0 * oc.dot(d);
        const double c = oc.dot(oc) - prim.half_size.x * prim.half_size.x;
        const double disc = b * b - 4.0 * a * c;
        if (disc <= 0.0) return false;
        const double sq = std::sqrt(disc);
        lo = (-b - sq) / (2.0 * a);
        hi = (-b + sq) / (2.0 * a);
    } else {
        lo = t_min;
        hi = t_max;
        for (int axis = 0; axis < 3; ++axis) {
            const double da = d[axis];
            const double oa = o[axis];
            const double lo_a = prim.center[axis] - prim.half_size[axis];
            const double hi_a = prim.center[axis] + prim.half_size[axis];
            if (std::abs(da) < 1e-15) {
                if (oa < lo_a || oa > hi_a) return false;
                continue;
            }
            double ta = (lo_a - oa) / da;
            double tb = (hi_a - oa) / da;
            if (ta > tb) std::swap(ta, tb);
            lo = std::max(lo, ta);
            hi = std::min(hi, tb);
        }
    }
    lo = std::max(lo, t_min);
    hi = std::min(hi, t_max);
    if (!(lo < hi)) return false;
    *t0 = lo;
    *t1 = hi;
    return true;
}

}  // namespace

Image render_procedural_gt(const ProceduralScene& scene, const Camera& camera,
                           Image* opacity_out) {
    Image rgb(camera.width, camera.height, 3);
    if (opacity_out) *opacity_out = Image(camera.width, camera.height, 1);

    std::vector<double> cuts;
    for (int py = 0; py < camera.height; ++py) {
        for (int px = 0; px < camera.width; ++px) {
            const Ray ray = generate_ray(camera, px, py);
            cuts.clear();
            cuts.push_back(camera.near);
            cuts.push_back(camera.far);
            for (const auto& prim : scene.primitives) {
                double t0, t1;
                if (primitive_interval(prim, ray.origin, ray.dir, camera.near, camera.far,
                                       &t0, &t1)) {
                    cuts.push_back(t0);
                    cuts.push_back(t1);
                }
            }
            std::sort(cuts.begin(), cuts.end());
            const Vec3 view_dir = ray.dir.normalized();
            double trans = 1.0;
            double color[3] = {0.0, 0.0, 0.0};
            for (size_t k = 0; k + 1 < cuts.size(); ++k) {
                const double a = cuts[k];
                const double b = cuts[k + 1];
                if (!(b > a)) continue;
                const Vec3 mid = ray.origin + 0.5 * (a + b) * ray.dir;
                double sigma, mix[3];
                scene.emission_at(mid, view_dir, &sigma, mix);
                if (sigma <= 0.0) continue;
                const double att = std::exp(-sigma * (b - a));
                const double w = trans * (1.0 - att);
                for (int c = 0; c < 3; ++c) color[c] += w * mix[c];
                trans *= att;
            }
            for (int c = 0; c < 3; ++c)
                rgb.at(px, py, c) = color[c] + trans * scene.background[c];
            if (opacity_out) opacity_out->at(px, py, 0) = 1.0 - trans;
        }
    }
    return rgb;
}

Camera make_orbit_camera(double azimuth, double elevation, double distance, int width,
                         int height, double camera_angle_x, double near, double far) {
    const Vec3 pos{distance * std::cos(elevation) * std::cos(azimuth),
                   distance * std::cos(elevation) * std::sin(azimuth),
                   distance * std::sin(elevation)};
    const Vec3 up{0.0, 0.0, 1.0};
    const Vec3 back = pos.normalized();  // camera looks at the origin
    Vec3 right = up.cross(back);
    const double rn = right.norm();
    right = rn > 1e-12 ? right / rn : Vec3{1.0, 0.0, 0.0};
    const Vec3 cam_up = back.cross(right);
    Mat4 c2w = Mat4::identity();
    for (int i = 0; i < 3; ++i) {
        c2w.m[i][0] = right[i];
        c2w.m[i][1] = cam_up[i];
        c2w.m[i][2] = back[i];
        c2w.m[i][3] = pos[i];
    }
    return Camera::from_angle_x(width, height, camera_angle_x, c2w, near, far);
}

Dataset make_procedural_dataset(const ProceduralScene& scene,
                                const ProceduralDatasetParams& p) {
    Dataset ds;
    ds.name = "procedural";
    // Few-shot layout: training poses sit at irregular azimuths inside a
    // span (default: the full circle) with alternating elevations, so each
    // scene region is seen from only a couple of widely separated views.
    // Test poses interleave the training ones.
    const double kSector = p.azimuth_span;
    constexpr double kTrainFrac[] = {0.0, 0.09, 0.22, 0.34, 0.47, 0.63, 0.78, 1.0};
    constexpr double kTrainElev[] = {0.25, 0.55, 0.35, 0.65, 0.3, 0.6, 0.45, 0.7};
    auto make_view = [&](double az, double el) {
        View v;
        v.camera = make_orbit_camera(az, el, p.orbit_distance, p.resolution, p.resolution,
                                     p.camera_angle_x, p.near, p.far);
        v.image = render_procedural_gt(scene, v.camera);
        return v;
    };
    for (int i = 0; i < p.n_train; ++i) {
        const double az = kSector * kTrainFrac[i % 8] + 0.02 * (i / 8);
        ds.train.push_back(make_view(az, kTrainElev[i % 8]));
    }
    for (int i = 0; i < p.n_val; ++i) {
        const double az = kSector * (i + 0.71) / (p.n_val + 1);
        ds.val.push_back(make_view(az, 0.42));
    }
    for (int i = 0; i < p.n_test; ++i) {
        const double az = kSector * (i + 0.5) / p.n_test;
        const double el = (i % 2 == 0) ? 0.33 : 0.52;
        ds.test.push_back(make_view(az, el));
    }
    return ds;
}

}  // namespace triray
