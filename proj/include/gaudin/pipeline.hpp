// Copyright 2026 The gaudin-nqs Authors
// SPDX-License-Identifier: Apache-2.0
//
// Pipeline stages behind the CLI subcommands. Each stage reads its inputs
// from cfg.output_dir, writes its artifacts there and records everything in
// manifest.json. All thrown errors map to CLI exit codes:
//   InvalidParameterError -> 2, MissingArtifactError -> 3, others -> 4.

#pragma once

#include <cstddef>

#include "gaudin/config.hpp"

namespace gaudin {

/// Optimizes level `level` (ground state for 0); lower levels are loaded from
/// checkpoint_level<j>.json. Writes per-run traces and checkpoints, the
/// chosen checkpoint and summary_level<level>.json.
void run_level(const RunConfig& cfg, std::size_t level);

/// Builds the SpectrumBundle from the existing level checkpoints (or from the
/// dense oracle when oracle_mode) and writes bundle.json + spectral.csv.
void run_spectrum(const RunConfig& cfg, bool oracle_mode);

/// Convolves the bundle's susceptibility with the drive (Algorithm 2) and
/// writes response.csv; includes the oracle trajectory when the dense guard
/// allows it. `stride` decimates the output rows (the convolution itself runs
/// at cfg.dynamics.dt).
void run_response(const RunConfig& cfg, std::size_t stride = 100);

/// Dense diagonalization export: spectrum.csv (index, energy, sector_sz).
void run_ed(const RunConfig& cfg);

/// Times one SR run (1000 samples, 1000 iterations) against one dense
/// diagonalization for each N in [n_min, n_max]; writes bench.csv.
void run_bench(const RunConfig& cfg, std::size_t n_min, std::size_t n_max, std::size_t reps);

}  // namespace gaudin
