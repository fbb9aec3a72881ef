// Copyright 2026 The gaudin-nqs Authors
// SPDX-License-Identifier: Apache-2.0
//
// Stochastic-reconfiguration optimization of the ground state and of
// penalty-projected excited states, with multi-run postselection.
//
// Estimator conventions (W the flattened parameter vector, O the
// log-derivative):
//   E_local(sigma) = sum_sigma' <sigma|H|sigma'> Psi(sigma')/Psi(sigma)
//   F_i   = <E_local O_i*> - <E_local><O_i*>        (gradient wrt W_i*)
//   S_ik  = <O_i* O_k> - <O_i*><O_k>
//   W    <- W - lr (S + shift I)^{-1} F

#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "gaudin/model.hpp"
#include "gaudin/rbm.hpp"
#include "gaudin/sampler.hpp"

namespace gaudin {

struct SrConfig {
    double learning_rate = 0.02;
    double diag_shift = 0.01;
    std::size_t iterations = 8000;
    std::size_t samples_per_iteration = 5000;
    std::size_t runs = 50;
    std::size_t postselect_samples = 0;  ///< 0 -> 2 * samples_per_iteration
    double init_spread = 0.25;
    std::size_t burn_in = 0;  ///< 0 -> 10% of samples_per_iteration
    std::size_t thin = 1;
    std::size_t workers = 1;  ///< concurrent optimization runs

    std::size_t effective_burn_in() const {
        return burn_in ? burn_in : samples_per_iteration / 10;
    }
    std::size_t effective_postselect() const {
        return postselect_samples ? postselect_samples : 2 * samples_per_iteration;
    }
};

struct PenaltySpec {
    std::vector<RbmParameters> lower_states;  ///< levels 0..n-1, in order
    std::vector<double> coefficients;         ///< beta_j > 0; default 2*omega_max each
    double omega_max = 0.0;

    std::size_t size() const { return lower_states.size(); }
};

struct IterationRecord {
    double loss;
    double energy_re;
    double energy_im;
    double grad_norm;
    double acceptance;
};
using IterationTrace = std::vector<IterationRecord>;

struct EigenstateEstimate {
    RbmParameters params;
    cplx energy = 0.0;  ///< re-estimated; Im must be statistically zero
    double energy_stderr = 0.0;
    double loss = 0.0;  ///< energy + penalty contribution
    std::size_t run_index = 0;
    u64 seed = 0;
};

// --- estimators ------------------------------------------------------------

cplx local_energy(const RbmParameters& p, const SpinConfiguration& sigma, const GaudinModel& m);

/// E_local for every configuration of a unique-config set, in order.
Eigen::VectorXcd local_energies(const RbmParameters& p, const WeightedConfigs& samples,
                                const GaudinModel& m);

Eigen::VectorXcd force_vector(const RbmParameters& p, const WeightedConfigs& samples,
                              const GaudinModel& m);
Eigen::VectorXcd force_vector(const RbmParameters& p, const SampleSet& samples,
                              const GaudinModel& m);

Eigen::MatrixXcd geometric_tensor(const RbmParameters& p, const WeightedConfigs& samples);
Eigen::MatrixXcd geometric_tensor(const RbmParameters& p, const SampleSet& samples);

/// One SR update: p - lr (S + shift I)^{-1} F. Throws NumericalError when the
/// regularized system is effectively singular.
RbmParameters sr_step(const RbmParameters& p, const Eigen::VectorXcd& force,
                      const Eigen::MatrixXcd& s, const SrConfig& cfg);

/// Loss of the penalty method: <E_local> plus, per lower state j,
///   beta_j <Psi_j/Psi>_sigma~ <Psi/Psi_j>_sigma~j .
/// The imaginary residue is checked to be statistically zero, then dropped.
double penalty_loss(const RbmParameters& p, const PenaltySpec& pen,
                    const WeightedConfigs& samples_p,
                    std::span<const WeightedConfigs> samples_lower, const GaudinModel& m);

/// Penalty-method gradient: the plain force plus, per lower state j,
///   beta_j <(Psi_j/Psi - <Psi_j/Psi>) O*>_sigma~ <Psi/Psi_j>_sigma~j .
Eigen::VectorXcd penalty_gradient(const RbmParameters& p, const PenaltySpec& pen,
                                  const WeightedConfigs& samples_p,
                                  std::span<const WeightedConfigs> samples_lower,
                                  const GaudinModel& m);

/// Mean/stderr of E_local over a chain (stderr from the time series).
MeanEstimate energy_estimate(const RbmParameters& p, const SampleSet& samples,
                             const GaudinModel& m);

// --- Algorithm-level driver -------------------------------------------------

struct OptimizeResult {
    EigenstateEstimate best;
    std::vector<EigenstateEstimate> all_runs;  ///< finite-loss runs, by run index
    std::vector<IterationTrace> traces;        ///< one per run (all runs)
};

/// Runs `cfg.runs` independent SR optimizations of level `n` (ground state
/// when pen.size() == 0), re-estimates each final loss with
/// cfg.effective_postselect() samples and returns the run with the lowest
/// re-estimated loss (ties broken by energy stderr). Seeds are derived from
/// `master_seed`, the level index and the run index.
OptimizeResult optimize_eigenstate(std::size_t level, const PenaltySpec& pen,
                                   const GaudinModel& m, const SrConfig& cfg,
                                   std::size_t n_hidden, u64 master_seed);

}  // namespace gaudin
