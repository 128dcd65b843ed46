// Copyright 2026 The triray Authors
// SPDX-License-Identifier: Apache-2.0
//
// Command-line entry point: train / render / eval / ablate / duality.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "triray/checkpoint.hpp"
#include "triray/config.hpp"
#include "triray/dataio.hpp"
#include "triray/encoding.hpp"
#include "triray/metrics.hpp"
#include "triray/renderer.hpp"
#include "triray/trainer.hpp"

namespace triray {
namespace {

namespace fs = std::filesystem;

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    std::string seed;
    std::string threads;
    std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "config file (key = value lines)");
    cmd->add_option("--out-dir", args.out_dir, "output directory");
    cmd->add_option("--seed", args.seed, "training/render seed");
    cmd->add_option("--threads", args.threads, "worker thread count (0 = hardware)");
    cmd->allow_extras();
}

AppConfig resolve_config(CLI::App* cmd, const CommonArgs& args) {
    AppConfig cfg;
    if (!args.config_path.empty()) apply_config_file(cfg, args.config_path);
    // remaining --key=value tokens are dotted config overrides
    for (const auto& extra : cmd->remaining()) {
        if (extra.rfind("--", 0) != 0)
            throw std::invalid_argument("unrecognized argument '" + extra +
                                        "' (overrides look like --anneal.f_s=0.2)");
        const auto eq = extra.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("override '" + extra + "' must look like --key=value");
        apply_override(cfg, extra.substr(2, eq - 2), extra.substr(eq + 1));
    }
    if (!args.out_dir.empty()) cfg.out_dir = args.out_dir;
    if (!args.seed.empty()) apply_override(cfg, "train.seed", args.seed);
    if (!args.threads.empty()) apply_override(cfg, "train.threads", args.threads);
    return cfg;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

std::string metrics_csv(const std::vector<IterLog>& log) {
    std::ostringstream out;
    out << std::setprecision(12);
    out << "iter,loss,psnr_val,r_gap,level_offset\n";
    for (const auto& row : log) {
        out << row.iter << "," << row.loss << ",";
        if (std::isfinite(row.psnr_val)) out << row.psnr_val;
        out << "," << row.r_gap << "," << row.level_offset << "\n";
    }
    return out.str();
}

Image normalized_depth(const Image& depth, double near, double far) {
    Image out = depth;
    for (auto& v : out.data) v = std::clamp((v - near) / (far - near), 0.0, 1.0);
    return out;
}

template <class S>
struct TrainedRun {
    TrainResult<S> result;
    MetricReport test_report;
};

template <class S>
TrainedRun<S> run_training(const AppConfig& cfg, const Dataset& ds) {
    TrainedRun<S> run;
    run.result = train<S>(ds, cfg.field, cfg.render, cfg.train);
    const int threads = cfg.train.threads > 0 ? cfg.train.threads : hardware_threads();
    std::vector<Image> preds, gts;
    for (const auto& view : ds.test) {
        const auto rendered =
            render_image(run.result.state.field, view.camera, cfg.train.iterations,
                         cfg.train.anneal, cfg.render, cfg.train.seed, threads);
        preds.push_back(rendered.rgb);
        gts.push_back(view.image);
    }
    if (!preds.empty()) run.test_report = evaluate_views(preds, gts);
    return run;
}

template <class S>
int cmd_train_impl(const AppConfig& cfg) {
    const Dataset ds = build_dataset(cfg);
    fs::create_directories(cfg.out_dir);
    auto run = run_training<S>(cfg, ds);

    const fs::path out(cfg.out_dir);
    write_text(out / "metrics.csv", metrics_csv(run.result.log));
    save_checkpoint(out / "checkpoint.bin",
                    checkpoint_from_field(run.result.state.field, cfg.render.sh_trunc,
                                          dump_config(cfg)));
    write_text(out / "config_used.txt", dump_config(cfg));
    if (!ds.test.empty()) {
        write_text(out / "eval.csv", report_csv(run.test_report));
        std::cout << "test split metrics:\n" << report_table(run.test_report);
        const int threads = cfg.train.threads > 0 ? cfg.train.threads : hardware_threads();
        const auto rendered =
            render_image(run.result.state.field, ds.test.front().camera, cfg.train.iterations,
                         cfg.train.anneal, cfg.render, cfg.train.seed, threads);
        save_png_rgb8(rendered.rgb, out / "test_view_0.png");
        save_png_gray16(normalized_depth(rendered.depth, cfg.near, cfg.far),
                        out / "test_view_0_depth.png");
    }
    std::cout << "wrote " << (out / "checkpoint.bin").string() << "\n";
    return 0;
}

int cmd_train(const AppConfig& cfg) {
    if (cfg.train.precision == Precision::F64) return cmd_train_impl<double>(cfg);
    return cmd_train_impl<float>(cfg);
}

std::vector<int> parse_view_list(const std::string& s) {
    std::vector<int> views;
    std::stringstream ss(s);
    std::string part;
    while (std::getline(ss, part, ',')) {
        if (!part.empty()) views.push_back(std::stoi(part));
    }
    return views;
}

int cmd_render(const AppConfig& cfg, const std::string& checkpoint_path,
               const std::string& split, const std::string& views_arg) {
    const CheckpointData data = load_checkpoint(checkpoint_path);
    auto field = field_from_checkpoint<float>(data);
    AppConfig render_cfg = cfg;
    render_cfg.render.sh_trunc = data.sh_trunc;

    const Dataset ds = build_dataset(render_cfg);
    const std::vector<View>* pool = &ds.test;
    if (split == "train") pool = &ds.train;
    else if (split == "val") pool = &ds.val;
    else if (split != "test") throw std::invalid_argument("unknown split '" + split + "'");

    std::vector<int> views = parse_view_list(views_arg);
    if (views.empty())
        for (size_t i = 0; i < pool->size(); ++i) views.push_back(static_cast<int>(i));

    fs::create_directories(render_cfg.out_dir);
    const fs::path out(render_cfg.out_dir);
    const int threads =
        render_cfg.train.threads > 0 ? render_cfg.train.threads : hardware_threads();
    AnnealSchedule done = render_cfg.train.anneal;  // schedule finished at render time
    for (int vi : views) {
        if (vi < 0 || static_cast<size_t>(vi) >= pool->size())
            throw std::invalid_argument("view index " + std::to_string(vi) + " out of range");
        const auto& view = (*pool)[static_cast<size_t>(vi)];
        const auto rendered = render_image(field, view.camera, done.t_stop, done,
                                           render_cfg.render, render_cfg.train.seed, threads);
        std::ostringstream stem;
        stem << split << "_" << std::setw(3) << std::setfill('0') << vi;
        save_png_rgb8(rendered.rgb, out / (stem.str() + "_rgb.png"));
        save_png_gray16(normalized_depth(rendered.depth, view.camera.near, view.camera.far),
                        out / (stem.str() + "_depth.png"));
    }
    std::cout << "rendered " << views.size() << " view(s) to " << out.string() << "\n";
    return 0;
}

int cmd_eval(const AppConfig& cfg, const std::string& checkpoint_path) {
    const CheckpointData data = load_checkpoint(checkpoint_path);
    auto field = field_from_checkpoint<float>(data);
    AppConfig eval_cfg = cfg;
    eval_cfg.render.sh_trunc = data.sh_trunc;
    const Dataset ds = build_dataset(eval_cfg);
    if (ds.test.empty()) throw std::runtime_error("eval: dataset has no test views");
    const int threads = eval_cfg.train.threads > 0 ? eval_cfg.train.threads : hardware_threads();
    std::vector<Image> preds, gts;
    for (const auto& view : ds.test) {
        const auto rendered =
            render_image(field, view.camera, eval_cfg.train.anneal.t_stop, eval_cfg.train.anneal,
                         eval_cfg.render, eval_cfg.train.seed, threads);
        preds.push_back(rendered.rgb);
        gts.push_back(view.image);
    }
    const MetricReport report = evaluate_views(preds, gts);
    fs::create_directories(eval_cfg.out_dir);
    write_text(fs::path(eval_cfg.out_dir) / "eval.csv", report_csv(report));
    std::cout << report_table(report);
    return 0;
}

std::vector<double> parse_double_list(const std::string& s) {
    std::vector<double> vals;
    std::stringstream ss(s);
    std::string part;
    while (std::getline(ss, part, ',')) {
        if (!part.empty()) vals.push_back(std::stod(part));
    }
    return vals;
}

// Sweeps (f_s, theta) over the grid, one seeded training run per cell per
// seed, and writes the PSNR matrix in long CSV form.
int cmd_ablate(const AppConfig& cfg, const std::string& fs_arg, const std::string& theta_arg,
               const std::string& seeds_arg) {
    std::vector<double> fs_values = parse_double_list(fs_arg);
    std::vector<double> theta_values = parse_double_list(theta_arg);
    std::vector<double> seed_list = parse_double_list(seeds_arg);
    if (fs_values.empty()) fs_values = {0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35};
    if (theta_values.empty()) theta_values = {0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35};
    if (seed_list.empty()) seed_list = {static_cast<double>(cfg.train.seed)};

    const Dataset ds = build_dataset(cfg);
    fs::create_directories(cfg.out_dir);
    std::ostringstream csv;
    csv << std::setprecision(10) << "f_s,theta,psnr_mean";
    for (size_t s = 0; s < seed_list.size(); ++s) csv << ",psnr_seed" << s;
    csv << "\n";
    for (double f_s : fs_values) {
        for (double theta : theta_values) {
            AppConfig cell = cfg;
            cell.train.anneal.enabled = true;
            cell.train.anneal.f_s = f_s;
            cell.train.anneal.theta = theta;
            std::vector<double> psnrs;
            for (double seed : seed_list) {
                cell.train.seed = static_cast<uint64_t>(seed);
                const auto run = run_training<float>(cell, ds);
                psnrs.push_back(run.test_report.psnr_mean);
            }
            double mean = 0.0;
            for (double p : psnrs) mean += p;
            mean /= static_cast<double>(psnrs.size());
            csv << f_s << "," << theta << "," << mean;
            for (double p : psnrs) csv << "," << p;
            csv << "\n";
            std::cout << "f_s=" << f_s << " theta=" << theta << " -> mean PSNR " << mean
                      << "\n";
        }
    }
    write_text(fs::path(cfg.out_dir) / "ablate.csv", csv.str());
    return 0;
}

// Emits the frequency-mask, footprint-mask and schedule curves that exhibit
// the frequency-regularization <-> pre-filtering correspondence.
int cmd_duality(const AppConfig& cfg, int l_freq) {
    fs::create_directories(cfg.out_dir);
    const fs::path out(cfg.out_dir);
    const AnnealSchedule& sched = cfg.train.anneal;
    const int t_total = sched.t_stop;

    {
        std::ostringstream csv;
        csv << std::setprecision(12) << "t,i,value\n";
        const int steps = 40;
        for (int s = 0; s <= steps; ++s) {
            const int t = t_total * s / steps;
            const auto mask = freq_mask({t, t_total, l_freq});
            for (size_t i = 0; i < mask.size(); ++i)
                csv << t << "," << (i + 1) << "," << mask[i] << "\n";
        }
        write_text(out / "duality_freq_mask.csv", csv.str());
    }
    {
        std::ostringstream csv_mask, csv_cut;
        csv_mask << std::setprecision(12) << "x,k,value\n";
        csv_cut << "x,cutoff\n";
        for (int x = 0; x <= 2 * l_freq; ++x) {
            const double sigma = annealed_sigma_f_sq(x);
            const auto mask = ipe_mask(sigma, l_freq);
            for (int k = 0; k < l_freq; ++k)
                csv_mask << x << "," << k << "," << mask[static_cast<size_t>(2 * k)] << "\n";
            csv_cut << x << "," << duality_cutoff_index(sigma, l_freq, 0.5) << "\n";
        }
        write_text(out / "duality_ipe_mask.csv", csv_mask.str());
        write_text(out / "duality_cutoff.csv", csv_cut.str());
    }
    {
        const double tau_ref = cfg.field.base_radius();
        std::ostringstream csv;
        csv << std::setprecision(12) << "i,x,r_i,l_i\n";
        for (int i = 0; i <= t_total + t_total / 4; ++i) {
            csv << i << "," << step_index(i, sched) << "," << annealed_radius(i, tau_ref, sched)
                << "," << annealed_level(i, tau_ref, cfg.field.base_radius(), sched) << "\n";
        }
        write_text(out / "duality_schedule.csv", csv.str());
    }
    std::cout << "wrote duality curves to " << out.string() << "\n";
    return 0;
}

int run(int argc, char** argv) {
    CLI::App app{"tri-plane radiance fields with spatial annealing"};
    app.require_subcommand(1);

    CommonArgs train_args, render_args, eval_args, ablate_args, duality_args;
    auto* train_cmd = app.add_subcommand("train", "train a field and evaluate the test split");
    add_common(train_cmd, train_args);

    auto* render_cmd = app.add_subcommand("render", "render views from a checkpoint");
    add_common(render_cmd, render_args);
    std::string checkpoint, split = "test", views;
    render_cmd->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
    render_cmd->add_option("--split", split, "train|val|test (default test)");
    render_cmd->add_option("--views", views, "comma-separated view indices (default all)");

    auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on the test split");
    add_common(eval_cmd, eval_args);
    std::string eval_checkpoint;
    eval_cmd->add_option("--checkpoint", eval_checkpoint, "checkpoint file")->required();

    auto* ablate_cmd = app.add_subcommand("ablate", "sweep the (f_s, theta) grid");
    add_common(ablate_cmd, ablate_args);
    std::string fs_values, theta_values, seeds;
    ablate_cmd->add_option("--fs-values", fs_values, "comma-separated f_s values");
    ablate_cmd->add_option("--theta-values", theta_values, "comma-separated theta values");
    ablate_cmd->add_option("--seeds", seeds, "comma-separated seeds");

    auto* duality_cmd = app.add_subcommand("duality", "emit mask/schedule curve CSVs");
    add_common(duality_cmd, duality_args);
    int l_freq = 8;
    duality_cmd->add_option("--l-freq", l_freq, "frequency levels for the masks");

    CLI11_PARSE(app, argc, argv);

    if (train_cmd->parsed()) return cmd_train(resolve_config(train_cmd, train_args));
    if (render_cmd->parsed())
        return cmd_render(resolve_config(render_cmd, render_args), checkpoint, split, views);
    if (eval_cmd->parsed()) return cmd_eval(resolve_config(eval_cmd, eval_args), eval_checkpoint);
    if (ablate_cmd->parsed())
        return cmd_ablate(resolve_config(ablate_cmd, ablate_args), fs_values, theta_values,
                          seeds);
    if (duality_cmd->parsed()) return cmd_duality(resolve_config(duality_cmd, duality_args),
                                                  l_freq);
    return 1;
}

}  // namespace
}  // namespace triray

int main(int argc, char** argv) {
    try {
        return triray::run(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
