// Copyright 2026 The gaudin-nqs Authors
// SPDX-License-Identifier: Apache-2.0
//
// Linear-response dynamics assembled from eigenstate data: transition
// matrix elements of S_0^+/-, the central-spin spectral function
//   A_0(w) = 2 pi sum_j sum_{s=+-} s m_s_sq_j delta_gamma(w - s Delta_j),
// the time-domain transverse susceptibility
//   chi_xy(t) = -(1/2) sum_j (m_plus_sq_j - m_minus_sq_j) cos(Delta_j t) e^{-gamma t}
// (t >= 0; zero for t < 0), and the discrete convolution with a drive field
//   <S_0^x(t_n)> = sum_{m=1}^{n} chi_xy(t_m) B_y(t_{n-m}) dt.
//
// All energies and times here are absolute (same units as GaudinModel::B).

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gaudin/rbm.hpp"

namespace gaudin {

/// One excitation: Delta_j = E_j - E_0 plus the squared ladder elements
/// m_plus_sq = |<j|S_0^+|0>|^2, m_minus_sq = |<j|S_0^-|0>|^2.
struct SpectrumLevel {
    double delta = 0.0;
    double m_plus_sq = 0.0;
    double m_minus_sq = 0.0;
    double m_plus_sq_err = 0.0;
    double m_minus_sq_err = 0.0;
    double occupation = 0.0;  ///< reserved for thermal mixtures; unused
    u64 source_params = 0;    ///< checkpoint provenance (0 for oracle-built)
    bool stderr_warning = false;
};

struct SpectrumBundle {
    double ground_energy = 0.0;
    std::vector<SpectrumLevel> levels;        ///< Delta ascending, Delta <= omega_max
    std::optional<SpectrumLevel> polarized;   ///< exact high-frequency peak
    double gamma = 0.0;     ///< Lorentzian broadening (0 for response work)
    double omega_max = 0.0; ///< excitation cutoff

    std::size_t j_max() const { return levels.size(); }
    /// Throws InvalidParameterError on a malformed bundle (Delta not
    /// ascending/positive, degenerate Delta, element below -4 stderr).
    void validate() const;
};

/// Drive B_y(t) = B1 g(t - t_bar, tau1) cos(carrier t) + B2 g(t - t_bar, tau2)
/// with g the unit-normalized Gaussian.
struct DrivePulse {
    double b1 = 0.0;
    double b2 = 0.0;
    double t_bar = 0.0;
    double tau1 = 1.0;
    double tau2 = 1.0;
    double carrier = 0.0;
};

struct TransitionElements {
    double m_plus_sq = 0.0;
    double m_minus_sq = 0.0;
    double m_plus_sq_err = 0.0;
    double m_minus_sq_err = 0.0;
    bool stderr_warning = false;
};

/// Monte Carlo estimate of the squared ladder elements between the states
/// encoded by w0 (ground) and wj (excited), via the cross-estimator pair
///   <W^j|S_0^+|W^0>/<W^j|W^j>  sampled from pi(.; W^j)
///   <W^0|S_0^-|W^j>/<W^0|W^0>  sampled from pi(.; W^0)
/// whose product is m_plus_sq (and the +/- mirrored pair for m_minus_sq).
/// Sets stderr_warning when a significant element has relative stderr above
/// rel_stderr_bound.
TransitionElements transition_elements(const RbmParameters& w0, const RbmParameters& wj,
                                       std::size_t n_samples, u64 seed,
                                       double rel_stderr_bound = 1e-2);

/// Exact polarized-peak level for the A_k > 0 ground state: weight
/// pi(all-up-but-central; W^0), energy (B + sum_k A_k/2)/2 exactly.
SpectrumLevel polarized_level(const RbmParameters& w0, const GaudinModel& m,
                              double ground_energy);

double drive_field(double t, const DrivePulse& pulse);

std::vector<double> spectral_function(const SpectrumBundle& bundle,
                                      std::span<const double> omega_grid);

/// Default grid of the spectral-function artifact: 2048 uniform points on
/// [-1.2 omega_max, 1.2 (B + sum_k A_k/2)].
std::vector<double> default_omega_grid(const SpectrumBundle& bundle, const GaudinModel& m,
                                       std::size_t n_points = 2048);

double susceptibility_xy(const SpectrumBundle& bundle, double t);

struct ResponseOptions {
    bool use_fft = true;  ///< evaluate the same discrete sum via FFT
};

/// The Algorithm 2 rule on raw samples: out[n] = dt * sum_{m=1}^{n}
/// chi[m] * drive[n-m] (chi[0] never enters). FFT and direct paths evaluate
/// the identical finite sum.
std::vector<double> discrete_convolution(std::span<const double> chi,
                                         std::span<const double> drive, double dt,
                                         const ResponseOptions& opts = {});

/// Discrete convolution of chi_xy with the drive on a uniform grid starting
/// at t = 0. The FFT and direct paths evaluate the identical sum.
std::vector<double> linear_response(const SpectrumBundle& bundle, const DrivePulse& pulse,
                                    std::span<const double> t_grid,
                                    const ResponseOptions& opts = {});

/// Bundle (de)serialization, bit round-tripping all values.
void save_bundle(const std::string& path, const SpectrumBundle& bundle);
SpectrumBundle load_bundle(const std::string& path);

}  // namespace gaudin
