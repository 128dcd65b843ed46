// Copyright 2026 The triray Authors
// SPDX-License-Identifier: Apache-2.0
//
// Drives the installed CLI binary end to end on a tiny procedural run.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "triray/image.hpp"

using namespace triray;
namespace fs = std::filesystem;

namespace {

#ifndef TRIRAY_CLI_PATH
#error "TRIRAY_CLI_PATH must be defined by the build"
#endif

const char* kCli = TRIRAY_CLI_PATH;

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() /
               ("triray_it_" + tag + "_" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

int run(const std::string& args) {
    const std::string cmd = std::string(kCli) + " " + args + " > /dev/null 2>&1";
    return std::system(cmd.c_str());
}

std::string tiny_overrides(const fs::path& out) {
    return "--out-dir " + out.string() +
           " --seed 1"
           " --train.iterations=25 --train.rays_per_batch=32 --render.samples=12"
           " --field.base_res=12 --field.levels=3 --field.feature_dim=2"
           " --field.hidden_dim=8 --dataset.proc_res=12 --dataset.proc_test_views=2"
           " --dataset.proc_val_views=1 --anneal.t_stop=15";
}

std::string file_bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

TEST_CASE("train writes every artifact and exits zero") {
    TempDir dir("train");
    REQUIRE(run("train " + tiny_overrides(dir.path)) == 0);
    CHECK(fs::exists(dir.path / "checkpoint.bin"));
    CHECK(fs::exists(dir.path / "metrics.csv"));
    CHECK(fs::exists(dir.path / "eval.csv"));
    CHECK(fs::exists(dir.path / "config_used.txt"));
    CHECK(fs::exists(dir.path / "test_view_0.png"));
    CHECK(fs::exists(dir.path / "test_view_0_depth.png"));

    // metrics schema and row count
    std::ifstream metrics(dir.path / "metrics.csv");
    std::string header;
    std::getline(metrics, header);
    CHECK(header == "iter,loss,psnr_val,r_gap,level_offset");
    int rows = 0;
    for (std::string line; std::getline(metrics, line);) ++rows;
    CHECK(rows == 25);

    // the sample render is a readable RGB png
    const Image png = load_png(dir.path / "test_view_0.png");
    CHECK(png.width == 12);
    CHECK(png.channels == 3);

    SUBCASE("render twice from one checkpoint gives identical bytes") {
        TempDir r1("r1"), r2("r2");
        const std::string common =
            " --checkpoint " + (dir.path / "checkpoint.bin").string() +
            " --views 0 --dataset.proc_res=12 --dataset.proc_test_views=2"
            " --dataset.proc_val_views=1 --render.samples=12";
        REQUIRE(run("render --out-dir " + r1.path.string() + common) == 0);
        REQUIRE(run("render --out-dir " + r2.path.string() + common) == 0);
        CHECK(file_bytes(r1.path / "test_000_rgb.png") ==
              file_bytes(r2.path / "test_000_rgb.png"));
        CHECK(file_bytes(r1.path / "test_000_depth.png") ==
              file_bytes(r2.path / "test_000_depth.png"));
        CHECK(!file_bytes(r1.path / "test_000_depth.png").empty());
    }

    SUBCASE("eval reports metrics from the checkpoint") {
        TempDir ev("eval");
        REQUIRE(run("eval --checkpoint " + (dir.path / "checkpoint.bin").string() +
                    " --out-dir " + ev.path.string() +
                    " --dataset.proc_res=12 --dataset.proc_test_views=2"
                    " --dataset.proc_val_views=1 --render.samples=12") == 0);
        CHECK(fs::exists(ev.path / "eval.csv"));
    }
}

TEST_CASE("failures exit nonzero: unknown key, missing dataset, bad checkpoint") {
    TempDir dir("fail");
    CHECK(run("train --out-dir " + dir.path.string() + " --no.such.key=1") != 0);
    CHECK(run("train --out-dir " + dir.path.string() +
              " --dataset.type=blender --dataset.path=" + (dir.path / "missing").string()) !=
          0);
    CHECK(run("render --checkpoint " + (dir.path / "nope.bin").string() + " --out-dir " +
              dir.path.string()) != 0);
    CHECK(run("definitely-not-a-subcommand") != 0);
}

TEST_CASE("duality emits the documented CSV schemas") {
    TempDir dir("duality");
    REQUIRE(run("duality --out-dir " + dir.path.string()) == 0);
    auto first_line = [](const fs::path& p) {
        std::ifstream in(p);
        std::string line;
        std::getline(in, line);
        return line;
    };
    CHECK(first_line(dir.path / "duality_freq_mask.csv") == "t,i,value");
    CHECK(first_line(dir.path / "duality_ipe_mask.csv") == "x,k,value");
    CHECK(first_line(dir.path / "duality_cutoff.csv") == "x,cutoff");
    CHECK(first_line(dir.path / "duality_schedule.csv") == "i,x,r_i,l_i");

    // r_i settles at exactly tau once i >= t_stop, and the cutoff column
    // advances one level per x += 2
    std::ifstream sched(dir.path / "duality_schedule.csv");
    std::string line;
    std::getline(sched, line);
    double tail_r = -1.0;
    bool tail_constant = true;
    while (std::getline(sched, line)) {
        std::stringstream ss(line);
        std::string i_s, x_s, r_s, l_s;
        std::getline(ss, i_s, ',');
        std::getline(ss, x_s, ',');
        std::getline(ss, r_s, ',');
        std::getline(ss, l_s, ',');
        if (std::stoi(i_s) >= 2000) {
            const double r = std::stod(r_s);
            if (tail_r < 0) tail_r = r;
            tail_constant = tail_constant && (r == tail_r);
        }
    }
    CHECK(tail_r > 0.0);
    CHECK(tail_constant);

    std::ifstream cut(dir.path / "duality_cutoff.csv");
    std::getline(cut, line);
    std::vector<int> cutoff;
    while (std::getline(cut, line))
        cutoff.push_back(std::stoi(line.substr(line.find(',') + 1)));
    for (size_t x = 2; x + 2 < cutoff.size() && x + 2 <= 12; ++x)
        CHECK(cutoff[x + 2] == cutoff[x] + 1);
}

TEST_CASE("a 1x1 ablation grid trains and writes the matrix csv") {
    TempDir dir("ablate");
    REQUIRE(run("ablate --fs-values 0.15 --theta-values 0.2 --seeds 1 " +
                tiny_overrides(dir.path)) == 0);
    std::ifstream csv(dir.path / "ablate.csv");
    std::string header, row;
    std::getline(csv, header);
    CHECK(header == "f_s,theta,psnr_mean,psnr_seed0");
    int rows = 0;
    while (std::getline(csv, row)) ++rows;
    CHECK(rows == 1);
}
