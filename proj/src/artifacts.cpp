// Copyright 2026 The gaudin-nqs Authors
// SPDX-License-Identifier: Apache-2.0

#include "gaudin/artifacts.hpp"

#include <array>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace gaudin {

namespace {

// Minimal SHA-1 (FIPS 180-1); only used for content addressing, not security.
struct Sha1 {
    std::array<std::uint32_t, 5> h{0x67452301u, 0xEFCDAB89u, 0x98BADCFEu, 0x10325476u,
                                   0xC3D2E1F0u};
    std::array<unsigned char, 64> block{};
    std::size_t block_len = 0;
    std::uint64_t total_bits = 0;

    static std::uint32_t rol(std::uint32_t x, int s) { return (x << s) | (x >> (32 - s)); }

    void process() {
        std::uint32_t w[80];
        for (int i = 0; i < 16; ++i)
            w[i] = (std::uint32_t(block[4 * i]) << 24) | (std::uint32_t(block[4 * i + 1]) << 16) |
                   (std::uint32_t(block[4 * i + 2]) << 8) | std::uint32_t(block[4 * i + 3]);
        for (int i = 16; i < 80; ++i) w[i] = rol(w[i - 3] ^ w[i - 8] ^ w[i - 14] ^ w[i - 16], 1);
        std::uint32_t a = h[0], b = h[1], c = h[2], d = h[3], e = h[4];
        for (int i = 0; i < 80; ++i) {
            std::uint32_t f, k;
            if (i < 20) {
                f = (b & c) | (~b & d);
                k = 0x5A827999u;
            } else if (i < 40) {
                f = b ^ c ^ d;
                k = 0x6ED9EBA1u;
            } else if (i < 60) {
                f = (b & c) | (b & d) | (c & d);
                k = 0x8F1BBCDCu;
            } else {
                f = b ^ c ^ d;
                k = 0xCA62C1D6u;
            }
            const std::uint32_t t = rol(a, 5) + f + e + k + w[i];
            e = d;
            d = c;
            c = rol(b, 30);
            b = a;
            a = t;
        }
        h[0] += a;
        h[1] += b;
        h[2] += c;
        h[3] += d;
        h[4] += e;
        block_len = 0;
    }

    void update(const void* data, std::size_t n) {
        const auto* p = static_cast<const unsigned char*>(data);
        total_bits += std::uint64_t(n) * 8;
        while (n > 0) {
            const std::size_t take = std::min(n, block.size() - block_len);
            std::memcpy(block.data() + block_len, p, take);
            block_len += take;
            p += take;
            n -= take;
            if (block_len == block.size()) process();
        }
    }

    std::string hex_digest() {
        const std::uint64_t bits = total_bits;
        const unsigned char pad = 0x80;
        update(&pad, 1);
        const unsigned char zero = 0;
        while (block_len != 56) update(&zero, 1);
        unsigned char len[8];
        for (int i = 0; i < 8; ++i) len[i] = static_cast<unsigned char>(bits >> (56 - 8 * i));
        update(len, 8);
        char out[41];
        for (int i = 0; i < 5; ++i) std::snprintf(out + 8 * i, 9, "%08x", h[i]);
        return std::string(out, 40);
    }
};

}  // namespace

std::string sha1_hex(std::string_view data) {
    Sha1 s;
    s.update(data.data(), data.size());
    return s.hex_digest();
}

std::string git_blob_sha1(std::string_view content) {
    Sha1 s;
    const std::string header = "blob " + std::to_string(content.size());
    s.update(header.data(), header.size() + 1);  // includes the trailing NUL
    s.update(content.data(), content.size());
    return s.hex_digest();
}

std::string fmt_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingArtifactError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, std::string_view content) {
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidParameterError("cannot open for writing: " + path);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

CsvBuilder::CsvBuilder(std::vector<std::string> columns) : n_cols_(columns.size()) {
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (i) buf_ += ',';
        buf_ += columns[i];
    }
    buf_ += '\n';
}

void CsvBuilder::add_row(const std::vector<double>& cells) {
    if (cells.size() != n_cols_)
        throw InvalidParameterError("CsvBuilder: row width does not match the header");
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) buf_ += ',';
        buf_ += fmt_double(cells[i]);
    }
    buf_ += '\n';
}

Manifest::Manifest(std::string output_dir, std::string subcommand, nlohmann::json resolved)
    : dir_(std::move(output_dir)), subcommand_(std::move(subcommand)),
      config_(std::move(resolved)) {
    std::filesystem::create_directories(dir_);
}

std::string Manifest::path_of(const std::string& name) const { return dir_ + "/" + name; }

void Manifest::add_input(const std::string& path) {
    inputs_[path] = git_blob_sha1(read_text_file(path));
}

void Manifest::write_output(const std::string& name, std::string_view content) {
    write_text_file(path_of(name), content);
    outputs_[name] = git_blob_sha1(content);
}

void Manifest::write_json_output(const std::string& name, nlohmann::json j) {
    j["provenance"] = {{"config", config_}, {"inputs", inputs_}};
    write_output(name, j.dump(2) + "\n");
}

void Manifest::record_output_file(const std::string& name) {
    outputs_[name] = git_blob_sha1(read_text_file(path_of(name)));
}

void Manifest::finalize() {
    nlohmann::json j;
    j["subcommand"] = subcommand_;
    j["config"] = config_;
    j["inputs"] = inputs_;
    j["artifacts"] = outputs_;
    write_text_file(path_of("manifest.json"), j.dump(2) + "\n");
}

}  // namespace gaudin
