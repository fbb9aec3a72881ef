// Copyright 2026 The gaudin-nqs Authors
// SPDX-License-Identifier: Apache-2.0
//
// Exact reference computations: dense diagonalization, magnetization-sector
// diagonalization, fidelity against RBM states and direct integration of the
// driven Schroedinger equation. Dense vectors are indexed by configuration
// bits (bit j = 1 <=> sigma_j = +1, spin 0 central).

#pragma once

#include <Eigen/Dense>

#include "gaudin/dynamics.hpp"
#include "gaudin/model.hpp"
#include "gaudin/rbm.hpp"

namespace gaudin {

/// Dimension guard for every dense-oracle operation: N+1 <= 14 by default.
inline constexpr std::size_t kOracleMaxSpins = 14;

struct DenseSpectrum {
    Eigen::VectorXd eigenvalues;  ///< ascending
    Eigen::MatrixXd eigenvectors; ///< orthonormal columns, basis = config bits
};

/// H as a dense real-symmetric matrix assembled from connected_configurations.
Eigen::MatrixXd dense_hamiltonian(const GaudinModel& m);

DenseSpectrum full_spectrum(const GaudinModel& m);

struct SectorBasis {
    std::size_t n_down = 0;
    std::vector<u64> members;  ///< configuration bits, ascending
};

SectorBasis sector_basis(std::size_t n_spins, std::size_t n_down);

struct SectorSpectrum {
    SectorBasis basis;
    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXd eigenvectors;  ///< columns over the sector basis
};

SectorSpectrum sector_spectrum(const GaudinModel& m, std::size_t n_down);

/// Normalized dense state of an RBM wavefunction, stabilized by subtracting
/// the maximum real log-amplitude before exponentiation.
Eigen::VectorXcd rbm_dense_state(const RbmParameters& p);

/// |<v|psi_p>|^2 with both sides normalized.
double rbm_fidelity(const RbmParameters& p, const Eigen::VectorXcd& v);

/// S_0^+ / S_0^- applied to a dense state (bit 0 flips).
Eigen::VectorXcd apply_s0_plus(const Eigen::VectorXcd& v);
Eigen::VectorXcd apply_s0_minus(const Eigen::VectorXcd& v);

/// Exact SpectrumBundle from the dense spectrum: every level with
/// 0 < Delta_j <= omega_max (omega_max <= 0 keeps all levels).
SpectrumBundle dense_bundle(const GaudinModel& m, const DenseSpectrum& s, double omega_max,
                            double gamma);

struct TimeEvolveOptions {
    double max_step = 0.0;  ///< integrator substep; 0 -> 2.5e-3 * N0/A
};

/// Integrates i dpsi/dt = (H + B_y(t) S_0^y) psi with fixed-step RK4 from the
/// dense state psi0 over a uniform t_grid; returns Re<S_0^x>(t). Throws
/// NumericalError if the norm drifts by more than 1e-6.
std::vector<double> time_evolve(const GaudinModel& m, const DrivePulse& drive,
                                const Eigen::VectorXcd& psi0, std::span<const double> t_grid,
                                const TimeEvolveOptions& opts = {});

}  // namespace gaudin
