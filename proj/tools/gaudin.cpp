// Copyright 2026 The gaudin-nqs Authors
// SPDX-License-Identifier: Apache-2.0
//
// gaudin: config-driven pipeline runner.
//   gaudin ground|excited|spectrum|response|bench|ed|validate-config
//          --config FILE [overrides]
// Exit codes: 0 success, 2 config error, 3 missing dependency artifact,
// 4 numerical failure.

#include <CLI11.hpp>
#include <iostream>

#include "gaudin/pipeline.hpp"

namespace {

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> output_dir;
    std::optional<std::size_t> n, runs, iterations, samples, workers;
    std::optional<double> b, learning_rate, diag_shift, omega_max, beta, gamma, t_max, dt;

    void apply(gaudin::RunConfig& cfg, std::size_t level) const {
        if (seed) cfg.seed = *seed;
        if (output_dir) cfg.output_dir = *output_dir;
        if (n) cfg.model.n = *n;
        if (b) cfg.model.b = *b;
        if (runs) cfg.optimizer.runs = *runs;
        if (iterations) cfg.optimizer.iterations = *iterations;
        if (samples) cfg.optimizer.samples = *samples;
        if (workers) cfg.optimizer.workers = *workers;
        if (learning_rate) cfg.optimizer.learning_rate = *learning_rate;
        if (diag_shift) cfg.optimizer.diag_shift = *diag_shift;
        if (omega_max) cfg.optimizer.omega_max = *omega_max;
        if (beta) cfg.optimizer.beta.assign(level, *beta);
        if (gamma) cfg.dynamics.gamma = *gamma;
        if (t_max) cfg.dynamics.t_max = *t_max;
        if (dt) cfg.dynamics.dt = *dt;
    }
};

void add_override_flags(CLI::App* cmd, Overrides& ov) {
    cmd->add_option("--seed", ov.seed, "master seed override");
    cmd->add_option("--output-dir", ov.output_dir, "output directory override");
    cmd->add_option("--N", ov.n, "bath-spin count override");
    cmd->add_option("--B", ov.b, "field override (A/N0 units)");
    cmd->add_option("--runs", ov.runs, "independent SR runs");
    cmd->add_option("--iterations", ov.iterations, "SR iterations per run");
    cmd->add_option("--samples", ov.samples, "samples per iteration");
    cmd->add_option("--workers", ov.workers, "concurrent runs");
    cmd->add_option("--learning-rate", ov.learning_rate, "SR learning rate");
    cmd->add_option("--diag-shift", ov.diag_shift, "SR regularization shift");
    cmd->add_option("--omega-max", ov.omega_max, "excitation cutoff (A/N0 units)");
    cmd->add_option("--beta", ov.beta, "penalty coefficient for all lower levels");
    cmd->add_option("--gamma", ov.gamma, "Lorentzian broadening (A/N0 units)");
    cmd->add_option("--t-max", ov.t_max, "response window (N0/A units)");
    cmd->add_option("--dt", ov.dt, "response time step (N0/A units)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Gaudin-magnet eigenstates and linear response with an RBM ansatz"};
    app.require_subcommand(1);

    std::string config_path;
    Overrides ov;
    std::size_t level = 1;
    bool oracle_mode = false;
    std::size_t stride = 100;
    std::size_t n_min = 1, n_max = 11, reps = 3;

    CLI::App* ground = app.add_subcommand("ground", "optimize the ground state");
    CLI::App* excited = app.add_subcommand("excited", "optimize an excited level");
    excited->add_option("--level", level, "level index (lower checkpoints required)")
        ->check(CLI::PositiveNumber);
    CLI::App* spectrum = app.add_subcommand("spectrum", "build the spectrum bundle");
    spectrum->add_flag("--oracle", oracle_mode, "use the dense oracle instead of checkpoints");
    CLI::App* response = app.add_subcommand("response", "Algorithm-2 linear response");
    response->add_option("--stride", stride, "output decimation of response.csv");
    CLI::App* bench = app.add_subcommand("bench", "RBM-vs-ED runtime benchmark");
    bench->add_option("--n-min", n_min, "smallest N");
    bench->add_option("--n-max", n_max, "largest N");
    bench->add_option("--reps", reps, "repetitions per N");
    CLI::App* ed = app.add_subcommand("ed", "dense spectrum export");
    CLI::App* validate = app.add_subcommand("validate-config", "parse and validate the config");

    for (CLI::App* cmd : {ground, excited, spectrum, response, bench, ed, validate}) {
        cmd->add_option("--config", config_path, "JSON run config")->required();
        add_override_flags(cmd, ov);
    }

    CLI11_PARSE(app, argc, argv);

    try {
        gaudin::RunConfig cfg = gaudin::load_config(config_path);
        ov.apply(cfg, app.got_subcommand(excited) ? level : cfg.optimizer.level);

        if (app.got_subcommand(validate)) {
            std::cout << gaudin::resolved_config(cfg).dump(2) << "\n";
        } else if (app.got_subcommand(ground)) {
            gaudin::run_level(cfg, 0);
        } else if (app.got_subcommand(excited)) {
            gaudin::run_level(cfg, level);
        } else if (app.got_subcommand(spectrum)) {
            gaudin::run_spectrum(cfg, oracle_mode);
        } else if (app.got_subcommand(response)) {
            gaudin::run_response(cfg, stride);
        } else if (app.got_subcommand(bench)) {
            gaudin::run_bench(cfg, n_min, n_max, reps);
        } else if (app.got_subcommand(ed)) {
            gaudin::run_ed(cfg);
        }
    } catch (const gaudin::InvalidParameterError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const gaudin::MissingArtifactError& e) {
        std::cerr << "missing artifact: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
    return 0;
}
