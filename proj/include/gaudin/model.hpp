// Copyright 2026 The gaudin-nqs Authors
// SPDX-License-Identifier: Apache-2.0
//
// Central-spin (Gaudin magnet) Hamiltonian:
//   H = B S_0^z + sum_k A_k S_0 . S_k,   S^a = sigma^a / 2.
//
// Basis conventions used everywhere in this project:
//   * spin j = 0 is the central spin, j = 1..N are environment spins;
//   * sigma_j in {+1, -1};
//   * bit encoding: bit j of a u64 is 1 iff sigma_j = +1.

#pragma once

#include <cstdint>
#include <vector>

#include "gaudin/common.hpp"

namespace gaudin {

/// One computational-basis state of N+1 Ising spins.
class SpinConfiguration {
  public:
    SpinConfiguration() = default;
    explicit SpinConfiguration(std::vector<std::int8_t> values);
    static SpinConfiguration from_bits(u64 bits, std::size_t n_spins);

    std::size_t size() const { return values_.size(); }
    int operator[](std::size_t j) const { return values_[j]; }
    const std::vector<std::int8_t>& values() const { return values_; }
    u64 bits() const;

    bool operator==(const SpinConfiguration& o) const = default;

  private:
    std::vector<std::int8_t> values_;
};

/// Sum_j sigma_j / 2.
double total_sz(const SpinConfiguration& sigma);

struct GaudinModel {
    double B = 0.0;                 ///< central-spin field (absolute energy)
    std::vector<double> couplings;  ///< A_k, k = 1..N (absolute energy)
    double A = 1.0;                 ///< overall coupling scale
    double N0 = 1.0;                ///< decay scale of the exponential profile

    std::size_t n_env() const { return couplings.size(); }
    std::size_t n_spins() const { return couplings.size() + 1; }
    /// Energies are reported in units of A/N0, times in units of N0/A.
    double energy_unit() const { return A / N0; }
};

/// A_k = (A/N0) exp(-(k-1)/N0), k = 1..N.
std::vector<double> build_couplings(double A, std::size_t N, double N0);

/// Convenience: model with the exponential coupling profile. B is absolute.
GaudinModel make_exponential_model(double A, std::size_t N, double N0, double B);

/// <sigma|H|sigma> = B sigma_0/2 + sum_k A_k sigma_0 sigma_k / 4.
double diagonal_energy(const SpinConfiguration& sigma, const GaudinModel& m);
double diagonal_energy_bits(u64 bits, const GaudinModel& m);

struct ConnectedElement {
    SpinConfiguration target;
    double amplitude;  ///< <target|H|source>
};

/// Sparse Hamiltonian row through |sigma>: the diagonal element first, then
/// one flip-flop partner (flip spins 0 and k, amplitude A_k/2) for every
/// environment spin anti-aligned with the central spin.
std::vector<ConnectedElement> connected_configurations(const SpinConfiguration& sigma,
                                                       const GaudinModel& m);

struct ConnectedBits {
    u64 bits;
    double amplitude;
};

/// Bit-level variant used by hot loops; same contents as
/// connected_configurations.
void connected_bits(u64 bits, const GaudinModel& m, std::vector<ConnectedBits>& out);

}  // namespace gaudin
