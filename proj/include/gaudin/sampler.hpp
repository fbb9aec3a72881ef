// Copyright 2026 The gaudin-nqs Authors
// SPDX-License-Identifier: Apache-2.0
//
// Metropolis sampling from the Born distribution
//   pi(sigma; W) = |Psi_W(sigma)|^2 / sum_sigma' |Psi_W(sigma')|^2
// with uniform single-site flip proposals.

#pragma once

#include <optional>
#include <vector>

#include "gaudin/rbm.hpp"

namespace gaudin {

/// Full log-amplitude table over all 2^(N+1) configurations; only built for
/// small spaces (dimension <= kLogPsiTableMaxDim). Index = configuration bits.
struct LogPsiTable {
    std::vector<cplx> values;
    u64 source_params = 0;
};

inline constexpr u64 kLogPsiTableMaxDim = u64{1} << 12;

LogPsiTable build_log_psi_table(const RbmParameters& p);

struct SampleSet {
    std::size_t n_spins = 0;
    std::vector<u64> sequence;  ///< configuration bits in chain order
    u64 source_params = 0;      ///< RbmParameters::id() of the generator
    double acceptance_rate = 0.0;

    std::size_t size() const { return sequence.size(); }
};

/// Unique-configuration view of a sample multiset (or of an exact-summation
/// weight table): configs sorted ascending, weights sum to 1.
struct WeightedConfigs {
    std::size_t n_spins = 0;
    std::vector<u64> configs;
    std::vector<double> weights;
    u64 source_params = 0;
};

WeightedConfigs compress(const SampleSet& s);

/// Exact-summation mode: every configuration, weighted by pi(sigma; W).
/// Makes every downstream estimator deterministic.
WeightedConfigs exact_summation_weights(const RbmParameters& p);

struct ChainOptions {
    std::optional<u64> start_bits;  ///< default: uniformly random configuration
};

/// Single Metropolis chain. One sweep = N+1 single-site proposals; one
/// configuration is recorded every `thin` sweeps; the first `burn_in`
/// recorded slots are discarded. Returns exactly n_samples configurations.
SampleSet metropolis_chain(const RbmParameters& p, std::size_t n_samples, std::size_t burn_in,
                           std::size_t thin, u64 seed, const ChainOptions& opts = {});

struct MeanEstimate {
    cplx mean;
    double stderr;
};

/// Mean with an autocorrelation-aware error bar: the larger of the naive
/// i.i.d. standard error and a batch-means estimate (default 32 batches).
MeanEstimate estimate_mean(std::span<const cplx> values, std::size_t n_batches = 32);

}  // namespace gaudin
