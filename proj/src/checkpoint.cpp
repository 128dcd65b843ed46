// Copyright 2026 The triray Authors
// SPDX-License-Identifier: Apache-2.0
#include "triray/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace triray {

namespace {

constexpr char kMagic[4] = {'T', 'R', 'P', 'F'};
constexpr uint32_t kVersion = 1;

void put_u32(std::string& buf, uint32_t v) {
    for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& buf, uint64_t v) {
    for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& buf, double v) { put_u64(buf, std::bit_cast<uint64_t>(v)); }

void put_i32(std::string& buf, int32_t v) { put_u32(buf, static_cast<uint32_t>(v)); }

struct Reader {
    const std::string& buf;
    size_t pos = 0;
    const std::filesystem::path& path;

    void need(size_t n) const {
        if (pos + n > buf.size())
            throw std::runtime_error("checkpoint truncated: " + path.string());
    }
    uint32_t u32() {
        need(4);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<uint32_t>(static_cast<unsigned char>(buf[pos++])) << (8 * i);
        return v;
    }
    uint64_t u64() {
        need(8);
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i)
            v |= static_cast<uint64_t>(static_cast<unsigned char>(buf[pos++])) << (8 * i);
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
    int32_t i32() { return static_cast<int32_t>(u32()); }
};

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const CheckpointData& data) {
    std::string buf;
    buf.reserve(64 + data.config_echo.size() + data.params.size() * 8);
    buf.append(kMagic, 4);
    put_u32(buf, kVersion);
    put_i32(buf, data.field.base_res);
    put_i32(buf, data.field.n_levels);
    put_i32(buf, data.field.feature_dim);
    put_i32(buf, data.field.hidden_dim);
    put_i32(buf, data.field.sh_max_degree);
    put_i32(buf, data.sh_trunc);
    for (int i = 0; i < 3; ++i) put_f64(buf, data.field.bbox.min[i]);
    for (int i = 0; i < 3; ++i) put_f64(buf, data.field.bbox.max[i]);
    put_u64(buf, data.config_echo.size());
    buf.append(data.config_echo);
    put_u64(buf, data.params.size());
    for (double p : data.params) put_f64(buf, p);

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open checkpoint for writing: " + path.string());
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw std::runtime_error("failed writing checkpoint: " + path.string());
}

CheckpointData load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path.string());
    std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    Reader r{buf, 0, path};
    r.need(4);
    if (std::memcmp(buf.data(), kMagic, 4) != 0)
        throw std::runtime_error("not a checkpoint file: " + path.string());
    r.pos = 4;
    const uint32_t version = r.u32();
    if (version != kVersion)
        throw std::runtime_error("checkpoint version mismatch in " + path.string() +
                                 ": file has v" + std::to_string(version) + ", expected v" +
                                 std::to_string(kVersion));
    CheckpointData data;
    data.field.base_res = r.i32();
    data.field.n_levels = r.i32();
    data.field.feature_dim = r.i32();
    data.field.hidden_dim = r.i32();
    data.field.sh_max_degree = r.i32();
    data.sh_trunc = r.i32();
    Vec3 lo, hi;
    lo.x = r.f64();
    lo.y = r.f64();
    lo.z = r.f64();
    hi.x = r.f64();
    hi.y = r.f64();
    hi.z = r.f64();
    data.field.bbox.min = lo;
    data.field.bbox.max = hi;
    const uint64_t echo_len = r.u64();
    r.need(echo_len);
    data.config_echo.assign(buf, r.pos, echo_len);
    r.pos += echo_len;
    const uint64_t n_params = r.u64();
    r.need(n_params * 8);
    data.params.resize(n_params);
    for (uint64_t i = 0; i < n_params; ++i) data.params[i] = r.f64();
    return data;
}

}  // namespace triray
