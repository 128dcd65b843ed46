// Copyright 2026 The triray Authors
// SPDX-License-Identifier: Apache-2.0
#include "triray/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace triray {

namespace {

double parse_double(const std::string& s) {
    size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("not a number: '" + s + "'");
    return v;
}

int parse_int(const std::string& s) {
    size_t pos = 0;
    const long v = std::stol(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("not an integer: '" + s + "'");
    return static_cast<int>(v);
}

uint64_t parse_u64(const std::string& s) {
    size_t pos = 0;
    const unsigned long long v = std::stoull(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("not an integer: '" + s + "'");
    return v;
}

bool parse_bool(const std::string& s) {
    if (s == "true" || s == "1" || s == "on" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "off" || s == "no") return false;
    throw std::invalid_argument("not a boolean: '" + s + "'");
}

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            parts.push_back(cur);
            cur.clear();
        } else if (!std::isspace(static_cast<unsigned char>(c))) {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) parts.push_back(cur);
    return parts;
}

std::string ids_to_string(const std::vector<int>& ids) {
    if (ids.empty()) return "none";
    std::string s;
    for (size_t i = 0; i < ids.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(ids[i]);
    }
    return s;
}

std::string vec3_to_string(const Vec3& v) {
    std::ostringstream out;
    out << std::setprecision(17) << v.x << "," << v.y << "," << v.z;
    return out.str();
}

std::string bg_to_string(const double bg[3]) {
    std::ostringstream out;
    out << std::setprecision(17) << bg[0] << "," << bg[1] << "," << bg[2];
    return out.str();
}

Vec3 parse_vec3(const std::string& s) {
    const auto parts = split_csv(s);
    if (parts.size() != 3) throw std::invalid_argument("expected 3 comma-separated values");
    return {parse_double(parts[0]), parse_double(parts[1]), parse_double(parts[2])};
}

std::string fmt(double v) {
    std::ostringstream out;
    out << std::setprecision(17) << v;
    return out.str();
}

struct KeyEntry {
    const char* key;
    std::function<void(AppConfig&, const std::string&)> set;
    std::function<std::string(const AppConfig&)> get;
};

const std::vector<KeyEntry>& key_table() {
    static const std::vector<KeyEntry> table = {
        {"dataset.type",
         [](AppConfig& c, const std::string& v) {
             if (v != "procedural" && v != "blender")
                 throw std::invalid_argument("dataset.type must be procedural or blender");
             c.dataset_type = v;
         },
         [](const AppConfig& c) { return c.dataset_type; }},
        {"dataset.path", [](AppConfig& c, const std::string& v) { c.dataset_path = v; },
         [](const AppConfig& c) { return c.dataset_path; }},
        {"dataset.fewshot_ids",
         [](AppConfig& c, const std::string& v) {
             c.fewshot_ids.clear();
             if (v == "none") return;
             for (const auto& part : split_csv(v)) c.fewshot_ids.push_back(parse_int(part));
         },
         [](const AppConfig& c) { return ids_to_string(c.fewshot_ids); }},
        {"dataset.downsample",
         [](AppConfig& c, const std::string& v) { c.downsample = parse_int(v); },
         [](const AppConfig& c) { return std::to_string(c.downsample); }},
        {"dataset.near", [](AppConfig& c, const std::string& v) { c.near = parse_double(v); },
         [](const AppConfig& c) { return fmt(c.near); }},
        {"dataset.far", [](AppConfig& c, const std::string& v) { c.far = parse_double(v); },
         [](const AppConfig& c) { return fmt(c.far); }},
        {"dataset.proc_res",
         [](AppConfig& c, const std::string& v) { c.proc.resolution = parse_int(v); },
         [](const AppConfig& c) { return std::to_string(c.proc.resolution); }},
        {"dataset.proc_train_views",
         [](AppConfig& c, const std::string& v) { c.proc.n_train = parse_int(v); },
         [](const AppConfig& c) { return std::to_string(c.proc.n_train); }},
        {"dataset.proc_val_views",
         [](AppConfig& c, const std::string& v) { c.proc.n_val = parse_int(v); },
         [](const AppConfig& c) { return std::to_string(c.proc.n_val); }},
        {"dataset.proc_test_views",
         [](AppConfig& c, const std::string& v) { c.proc.n_test = parse_int(v); },
         [](const AppConfig& c) { return std::to_string(c.proc.n_test); }},
        {"dataset.proc_fov",
         [](AppConfig& c, const std::string& v) { c.proc.camera_angle_x = parse_double(v); },
         [](const AppConfig& c) { return fmt(c.proc.camera_angle_x); }},
        {"dataset.proc_span",
         [](AppConfig& c, const std::string& v) { c.proc.azimuth_span = parse_double(v); },
         [](const AppConfig& c) { return fmt(c.proc.azimuth_span); }},
        {"dataset.proc_distance",
         [](AppConfig& c, const std::string& v) { c.proc.orbit_distance = parse_double(v); },
         [](const AppConfig& c) { return fmt(c.proc.orbit_distance); }},

        {"field.base_res",
         [](AppConfig& c, const std::string& v) { c.field.base_res = parse_int(v); },
         [](const AppConfig& c) { return std::to_string(c.field.base_res); }},
        {"field.levels",
         [](AppConfig& c, const std::string& v) { c.field.n_levels = parse_int(v); },
         [](const AppConfig& c) { return std::to_string(c.field.n_levels); }},
        {"field.feature_dim",
         [](AppConfig& c, const std::string& v) { c.field.feature_dim = parse_int(v); },
         [](const AppConfig& c) { return std::to_string(c.field.feature_dim); }},
        {"field.hidden_dim",
         [](AppConfig& c, const std::string& v) { c.field.hidden_dim = parse_int(v); },
         [](const AppConfig& c) { return std::to_string(c.field.hidden_dim); }},
        {"field.sh_max_degree",
         [](AppConfig& c, const std::string& v) { c.field.sh_max_degree = parse_int(v); },
         [](const AppConfig& c) { return std::to_string(c.field.sh_max_degree); }},
        {"field.bbox_min",
         [](AppConfig& c, const std::string& v) { c.field.bbox.min = parse_vec3(v); },
         [](const AppConfig& c) { return vec3_to_string(c.field.bbox.min); }},
        {"field.bbox_max",
         [](AppConfig& c, const std::string& v) { c.field.bbox.max = parse_vec3(v); },
         [](const AppConfig& c) { return vec3_to_string(c.field.bbox.max); }},

        {"render.samples",
         [](AppConfig& c, const std::string& v) { c.render.n_samples = parse_int(v); },
         [](const AppConfig& c) { return std::to_string(c.render.n_samples); }},
        {"render.stratified",
         [](AppConfig& c, const std::string& v) { c.render.stratified = parse_bool(v); },
         [](const AppConfig& c) { return std::string(c.render.stratified ? "true" : "false"); }},
        {"render.background",
         [](AppConfig& c, const std::string& v) {
             const Vec3 bg = parse_vec3(v);
             c.render.background[0] = bg.x;
             c.render.background[1] = bg.y;
             c.render.background[2] = bg.z;
         },
         [](const AppConfig& c) { return bg_to_string(c.render.background); }},

        {"train.iterations",
         [](AppConfig& c, const std::string& v) { c.train.iterations = parse_int(v); },
         [](const AppConfig& c) { return std::to_string(c.train.iterations); }},
        {"train.lr", [](AppConfig& c, const std::string& v) { c.train.lr = parse_double(v); },
         [](const AppConfig& c) { return fmt(c.train.lr); }},
        {"train.weight_decay",
         [](AppConfig& c, const std::string& v) { c.train.weight_decay = parse_double(v); },
         [](const AppConfig& c) { return fmt(c.train.weight_decay); }},
        {"train.rays_per_batch",
         [](AppConfig& c, const std::string& v) { c.train.rays_per_batch = parse_int(v); },
         [](const AppConfig& c) { return std::to_string(c.train.rays_per_batch); }},
        {"train.seed", [](AppConfig& c, const std::string& v) { c.train.seed = parse_u64(v); },
         [](const AppConfig& c) { return std::to_string(c.train.seed); }},
        {"train.precision",
         [](AppConfig& c, const std::string& v) {
             if (v == "f32")
                 c.train.precision = Precision::F32;
             else if (v == "f64")
                 c.train.precision = Precision::F64;
             else
                 throw std::invalid_argument("train.precision must be f32 or f64");
         },
         [](const AppConfig& c) {
             return std::string(c.train.precision == Precision::F32 ? "f32" : "f64");
         }},
        {"train.val_interval",
         [](AppConfig& c, const std::string& v) { c.train.val_interval = parse_int(v); },
         [](const AppConfig& c) { return std::to_string(c.train.val_interval); }},
        {"train.val_max_views",
         [](AppConfig& c, const std::string& v) { c.train.val_max_views = parse_int(v); },
         [](const AppConfig& c) { return std::to_string(c.train.val_max_views); }},
        {"train.threads",
         [](AppConfig& c, const std::string& v) { c.train.threads = parse_int(v); },
         [](const AppConfig& c) { return std::to_string(c.train.threads); }},
        {"train.grad_chunks",
         [](AppConfig& c, const std::string& v) { c.train.grad_chunks = parse_int(v); },
         [](const AppConfig& c) { return std::to_string(c.train.grad_chunks); }},
        {"train.pyramid_refresh_every",
         [](AppConfig& c, const std::string& v) { c.train.pyramid_refresh_every = parse_int(v); },
         [](const AppConfig& c) { return std::to_string(c.train.pyramid_refresh_every); }},

        {"anneal.enabled",
         [](AppConfig& c, const std::string& v) { c.train.anneal.enabled = parse_bool(v); },
         [](const AppConfig& c) {
             return std::string(c.train.anneal.enabled ? "true" : "false");
         }},
        {"anneal.f_s",
         [](AppConfig& c, const std::string& v) { c.train.anneal.f_s = parse_double(v); },
         [](const AppConfig& c) { return fmt(c.train.anneal.f_s); }},
        {"anneal.theta",
         [](AppConfig& c, const std::string& v) { c.train.anneal.theta = parse_double(v); },
         [](const AppConfig& c) { return fmt(c.train.anneal.theta); }},
        {"anneal.n_split",
         [](AppConfig& c, const std::string& v) { c.train.anneal.n_split = parse_int(v); },
         [](const AppConfig& c) { return std::to_string(c.train.anneal.n_split); }},
        {"anneal.t_stop",
         [](AppConfig& c, const std::string& v) { c.train.anneal.t_stop = parse_int(v); },
         [](const AppConfig& c) { return std::to_string(c.train.anneal.t_stop); }},

        {"sh.n_trunc",
         [](AppConfig& c, const std::string& v) { c.render.sh_trunc = parse_int(v); },
         [](const AppConfig& c) { return std::to_string(c.render.sh_trunc); }},

        {"out_dir", [](AppConfig& c, const std::string& v) { c.out_dir = v; },
         [](const AppConfig& c) { return c.out_dir; }},
    };
    return table;
}

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

void apply_override(AppConfig& cfg, const std::string& key, const std::string& value) {
    for (const auto& entry : key_table()) {
        if (key == entry.key) {
            entry.set(cfg, value);
            return;
        }
    }
    throw std::invalid_argument("unknown config key '" + key + "'");
}

void apply_config_file(AppConfig& cfg, const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path.string());
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string stripped = trim(line);
        if (stripped.empty()) continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                                     ": expected key = value");
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        try {
            apply_override(cfg, key, value);
        } catch (const std::exception& e) {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": " +
                                     e.what());
        }
    }
}

std::string dump_config(const AppConfig& cfg) {
    std::string out;
    for (const auto& entry : key_table()) {
        out += entry.key;
        out += " = ";
        out += entry.get(cfg);
        out += "\n";
    }
    return out;
}

Dataset build_dataset(const AppConfig& cfg) {
    if (cfg.dataset_type == "procedural") {
        ProceduralDatasetParams p = cfg.proc;
        p.near = cfg.near;
        p.far = cfg.far;
        const ProceduralScene scene =
            cfg.dataset_path.empty() ? make_toy_scene() : load_scene_file(cfg.dataset_path);
        return make_procedural_dataset(scene, p);
    }
    if (cfg.dataset_path.empty())
        throw std::invalid_argument("dataset.path must be set for dataset.type = blender");
    Dataset ds = load_blender(cfg.dataset_path, cfg.near, cfg.far);
    if (!cfg.fewshot_ids.empty()) ds = select_fewshot(ds, cfg.fewshot_ids);
    if (cfg.downsample > 1) ds = downsample_dataset(ds, cfg.downsample);
    return ds;
}

}  // namespace triray
