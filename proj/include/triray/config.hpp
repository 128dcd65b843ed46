// Copyright 2026 The triray Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "triray/dataio.hpp"
#include "triray/renderer.hpp"
#include "triray/trainer.hpp"

namespace triray {

// Run configuration, populated from a flat key = value file plus dotted-key
// command-line overrides (overrides win). Defaults follow the reference
// training recipe where one exists.
struct AppConfig {
    std::string dataset_type = "procedural";  // procedural | blender
    std::string dataset_path;                 // scene file or transforms dir; "" = built-in toy
    std::vector<int> fewshot_ids = default_fewshot_ids();  // blender only; empty disables
    int downsample = 2;                       // blender only
    double near = 2.0;
    double far = 6.0;
    ProceduralDatasetParams proc;

    FieldConfig field;
    RenderParams render;  // render.sh_trunc is the sh.n_trunc key
    TrainConfig train;

    std::string out_dir = "out";
};

// Parses key = value lines ('#' comments). Throws with the line number and
// key on unknown keys or unparsable values.
void apply_config_file(AppConfig& cfg, const std::filesystem::path& path);

// Applies one dotted-key override, e.g. ("anneal.f_s", "0.2").
void apply_override(AppConfig& cfg, const std::string& key, const std::string& value);

// All keys in file form, with current values.
std::string dump_config(const AppConfig& cfg);

// Materializes the configured dataset (procedural generation or blender load
// with few-shot selection and downsampling).
Dataset build_dataset(const AppConfig& cfg);

}  // namespace triray
