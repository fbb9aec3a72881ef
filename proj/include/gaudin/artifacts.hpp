// Copyright 2026 The gaudin-nqs Authors
// SPDX-License-Identifier: Apache-2.0
//
// Artifact persistence: deterministic CSV/JSON writers, git-style content
// hashes, and the per-invocation manifest.json indexing everything an
// invocation read and wrote.

#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "gaudin/common.hpp"

namespace gaudin {

/// Lowercase hex SHA-1 of raw bytes.
std::string sha1_hex(std::string_view data);

/// Git blob hash: sha1("blob <size>\0" + content).
std::string git_blob_sha1(std::string_view content);

/// Shortest round-tripping decimal representation (%.17g).
std::string fmt_double(double x);

std::string read_text_file(const std::string& path);  ///< MissingArtifactError
void write_text_file(const std::string& path, std::string_view content);

/// Deterministic CSV assembly: fixed header, %.17g cells, '\n' rows.
class CsvBuilder {
public:
    explicit CsvBuilder(std::vector<std::string> columns);
    void add_row(const std::vector<double>& cells);
    const std::string& str() const { return buf_; }

private:
    std::size_t n_cols_;
    std::string buf_;
};

/// Collects the inputs consumed and outputs produced by one invocation and
/// writes `<output_dir>/manifest.json` (content hashes, resolved config, no
/// timestamps — the manifest is part of the deterministic artifact set).
class Manifest {
public:
    Manifest(std::string output_dir, std::string subcommand, nlohmann::json resolved_config);

    /// Records an already-existing file this invocation consumed.
    void add_input(const std::string& path);
    /// Writes `content` to `<output_dir>/<name>` and records its hash.
    void write_output(const std::string& name, std::string_view content);
    /// Writes the JSON artifact with the resolved config and the input hashes
    /// embedded under "provenance".
    void write_json_output(const std::string& name, nlohmann::json j);
    /// Records a file another writer already placed in the output directory.
    void record_output_file(const std::string& name);

    std::string path_of(const std::string& name) const;
    const std::map<std::string, std::string>& inputs() const { return inputs_; }

    void finalize();  ///< writes manifest.json

private:
    std::string dir_;
    std::string subcommand_;
    nlohmann::json config_;
    std::map<std::string, std::string> inputs_;   ///< path -> git blob hash
    std::map<std::string, std::string> outputs_;  ///< name -> git blob hash
};

}  // namespace gaudin
