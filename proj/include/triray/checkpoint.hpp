// Copyright 2026 The triray Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "triray/triplane.hpp"

namespace triray {

// Versioned little-endian binary container for a trained field: magic "TRPF",
// format version, field shape, sh truncation, a config echo, and the flat
// parameter vector stored as 64-bit floats.
struct CheckpointData {
    FieldConfig field;
    int sh_trunc = 2;
    std::string config_echo;
    std::vector<double> params;
};

void save_checkpoint(const std::filesystem::path& path, const CheckpointData& data);

// Throws with an explicit message on bad magic or a version mismatch.
CheckpointData load_checkpoint(const std::filesystem::path& path);

template <class S>
CheckpointData checkpoint_from_field(const TriPlaneField<S>& field, int sh_trunc,
                                     const std::string& config_echo) {
    CheckpointData data;
    data.field = field.cfg;
    data.sh_trunc = sh_trunc;
    data.config_echo = config_echo;
    data.params.assign(field.params.begin(), field.params.end());
    return data;
}

template <class S>
TriPlaneField<S> field_from_checkpoint(const CheckpointData& data) {
    TriPlaneField<S> field = TriPlaneField<S>::init(data.field, 0);
    if (data.params.size() != field.params.size())
        throw std::runtime_error("checkpoint: parameter count mismatch");
    for (size_t i = 0; i < data.params.size(); ++i)
        field.params[i] = static_cast<S>(data.params[i]);
    field.rebuild_pyramids();
    return field;
}

}  // namespace triray
