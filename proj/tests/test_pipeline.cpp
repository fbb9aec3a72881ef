// Copyright 2026 The gaudin-nqs Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "gaudin/artifacts.hpp"
#include "gaudin/pipeline.hpp"

using namespace gaudin;
using nlohmann::json;

namespace {

const std::string kDir = "/tmp/gaudin_test_pipeline";

RunConfig tiny_config(const std::string& subdir) {
    const json j = {{"model", {{"N", 1}, {"N0", 1.0}, {"B", 0.0}}},
                    {"optimizer",
                     {{"runs", 2},
                      {"iterations", 300},
                      {"samples", 400},
                      {"learning_rate", 0.05},
                      {"omega_max", 1.5}}},
                    {"dynamics",
                     {{"element_samples", 20000},
                      {"reestimate_samples", 20000},
                      {"t_max", 3.0},
                      {"dt", 0.01},
                      {"n_omega", 64}}},
                    {"output_dir", kDir + "/" + subdir},
                    {"seed", 5}};
    return parse_config(j);
}

std::size_t line_count(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(bool(in));
    std::size_t n = 0;
    std::string line;
    while (std::getline(in, line)) ++n;
    return n;
}

}  // namespace

TEST_CASE("ground stage artifacts") {
    const RunConfig cfg = tiny_config("ground");
    std::filesystem::remove_all(cfg.output_dir);
    run_level(cfg, 0);

    const json summary =
        json::parse(read_text_file(cfg.output_dir + "/summary_level0.json"));
    CHECK(summary.at("level") == 0);
    // artifact-shape test, not a convergence test: loose physics bounds
    CHECK(std::fabs(summary.at("energy").get<double>() + 0.75) < 2e-2);
    CHECK(summary.at("infidelity").get<double>() < 2e-2);
    CHECK(summary.at("runs").size() == 2);
    CHECK(summary.at("provenance").at("config").at("seed") == 5);

    // one trace per run, iterations+1 lines (header)
    CHECK(line_count(cfg.output_dir + "/trace_level0_run0.csv") == 301);
    CHECK(line_count(cfg.output_dir + "/trace_level0_run1.csv") == 301);
    CHECK(std::filesystem::exists(cfg.output_dir + "/checkpoint_level0_run1.json"));

    const json manifest = json::parse(read_text_file(cfg.output_dir + "/manifest.json"));
    CHECK(manifest.at("subcommand") == "ground");
    CHECK(manifest.at("artifacts").contains("summary_level0.json"));

    SUBCASE("downstream stages consume the checkpoint") {
        run_spectrum(cfg, /*oracle_mode=*/false);
        const SpectrumBundle b = load_bundle(cfg.output_dir + "/bundle.json");
        CHECK(b.polarized.has_value());
        CHECK(line_count(cfg.output_dir + "/spectral.csv") == 65);
        run_response(cfg, /*stride=*/3);
        CHECK(line_count(cfg.output_dir + "/response.csv") == 2 + (300 / 3));
    }
}

TEST_CASE("excited stage requires lower checkpoints") {
    const RunConfig cfg = tiny_config("excited_missing");
    std::filesystem::remove_all(cfg.output_dir);
    CHECK_THROWS_AS(run_level(cfg, 1), MissingArtifactError);
}

TEST_CASE("response stage requires the bundle") {
    const RunConfig cfg = tiny_config("response_missing");
    std::filesystem::remove_all(cfg.output_dir);
    CHECK_THROWS_AS(run_response(cfg), MissingArtifactError);
}

TEST_CASE("ed stage exports the full spectrum") {
    const RunConfig cfg = tiny_config("ed");
    std::filesystem::remove_all(cfg.output_dir);
    run_ed(cfg);
    CHECK(line_count(cfg.output_dir + "/spectrum.csv") == 5);  // header + 2^2 levels
}

TEST_CASE("bench stage: single-N run produces exactly one data row") {
    const RunConfig cfg = tiny_config("bench");
    std::filesystem::remove_all(cfg.output_dir);
    run_bench(cfg, 2, 2, 1);
    CHECK(line_count(cfg.output_dir + "/bench.csv") == 2);
    CHECK_THROWS_AS(run_bench(cfg, 3, 2, 1), InvalidParameterError);
    CHECK_THROWS_AS(run_bench(cfg, 1, 2, 0), InvalidParameterError);
}
