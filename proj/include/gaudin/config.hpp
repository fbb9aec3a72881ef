// Copyright 2026 The gaudin-nqs Authors
// SPDX-License-Identifier: Apache-2.0
//
// Run configuration: one JSON file with sections, echoed (fully resolved)
// into every output artifact.  Energies in the config (B, omega_max, beta,
// gamma, carrier) are expressed in units of A/N0; times (t_bar, tau1, tau2,
// t_max, dt) in units of N0/A.  The pipeline converts to absolute values at
// the model boundary.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gaudin/dynamics.hpp"
#include "gaudin/model.hpp"
#include "gaudin/optimizer.hpp"

namespace gaudin {

struct ModelConfig {
    std::size_t n = 0;   ///< bath spins (required)
    double n0 = 0.0;     ///< coupling decay scale (required)
    double a = 1.0;      ///< overall coupling strength
    double b = 0.0;      ///< field, in A/N0 units (required)
    std::optional<std::vector<double>> couplings;  ///< absolute override of the exponential profile
};

struct RbmConfig {
    std::size_t m = 0;      ///< hidden nodes; 0 -> N+1
    double sigma_w = 0.25;  ///< init spread
};

struct SamplerConfig {
    std::size_t n_samples = 5000;
    std::size_t burn_in = 0;  ///< retained-sample units; 0 -> 10% of n_samples
    std::size_t thin = 1;     ///< sweeps between records
    std::size_t n_chains = 1;
};

struct OptimizerConfig {
    std::size_t level = 0;
    std::size_t runs = 50;
    std::size_t iterations = 8000;
    std::size_t samples = 5000;
    double learning_rate = 0.02;
    double diag_shift = 0.01;
    std::vector<double> beta;  ///< per lower level, A/N0 units; empty -> 2*omega_max
    double omega_max = 0.15;   ///< A/N0 units
    std::size_t postselect_samples = 0;  ///< 0 -> 2 * samples
    std::size_t workers = 1;
};

struct DynamicsConfig {
    double gamma = 0.003;  ///< Lorentzian broadening, A/N0 units
    DrivePulse pulse{.b1 = 5.0, .b2 = 5.0, .t_bar = 200.0, .tau1 = 100.0,
                     .tau2 = 50.0, .carrier = 0.0};  ///< unit-scaled; carrier 0 -> largest Delta
    double t_max = 400.0;   ///< N0/A units
    double dt = 2.5e-4;     ///< N0/A units
    std::size_t n_omega = 2048;
    std::size_t element_samples = 5000000;     ///< matrix-element chains
    std::size_t reestimate_samples = 5000000;  ///< per-level energy re-estimate
    bool use_fft = true;
};

struct RunConfig {
    ModelConfig model;
    RbmConfig rbm;
    SamplerConfig sampler;
    OptimizerConfig optimizer;
    DynamicsConfig dynamics;
    std::string output_dir = "out";
    u64 seed = 0;  ///< required

    GaudinModel build_model() const;
    double energy_unit() const { return model.a / model.n0; }
    std::size_t n_hidden() const { return rbm.m ? rbm.m : model.n + 1; }
    SrConfig sr_config() const;
    /// beta values in absolute units, one per lower level.
    std::vector<double> beta_absolute(std::size_t level) const;
    /// Pulse with times/energies converted to absolute units.
    DrivePulse pulse_absolute() const;
};

/// Parses and validates; throws InvalidParameterError naming the offending
/// (dotted) key on a missing or out-of-range entry.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

/// The fully resolved config (all defaults applied) for artifact embedding.
nlohmann::json resolved_config(const RunConfig& cfg);

}  // namespace gaudin
