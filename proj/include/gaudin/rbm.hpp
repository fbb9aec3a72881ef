// Copyright 2026 The gaudin-nqs Authors
// SPDX-License-Identifier: Apache-2.0
//
// Complex-parameter restricted Boltzmann machine wavefunction over Ising
// visible units, with the hidden layer (h_i = +-1) traced out:
//
//   log Psi(sigma) = sum_j a_j sigma_j + sum_i log(2 cosh(theta_i)),
//   theta_i = b_i + sum_j w_ji sigma_j.
//
// All amplitude arithmetic stays in the log domain. Only differences and
// ratios of log-amplitudes are meaningful downstream (the principal-branch
// imaginary part is arbitrary mod 2*pi).

#pragma once

#include <Eigen/Dense>
#include <span>

#include "gaudin/common.hpp"
#include "gaudin/model.hpp"

namespace gaudin {

struct RbmParameters {
    Eigen::VectorXcd a;  ///< visible biases, length N+1
    Eigen::VectorXcd b;  ///< hidden biases, length M
    Eigen::MatrixXcd w;  ///< weights, (N+1) x M

    Eigen::Index n_visible() const { return a.size(); }
    Eigen::Index n_hidden() const { return b.size(); }
    Eigen::Index n_params() const { return a.size() + b.size() + w.size(); }

    /// Canonical flattening order: a-block, b-block, w-block row-major by
    /// visible index. This order is frozen; it fixes the indexing of the
    /// force vector, the geometric tensor and checkpoints.
    Eigen::VectorXcd flatten() const;
    static RbmParameters unflatten(const Eigen::VectorXcd& v, Eigen::Index n_visible,
                                   Eigen::Index n_hidden);

    /// Content hash used for sample-set / cache provenance checks.
    u64 id() const;
};

/// theta_i cache for one (parameters, configuration) pair.
struct HiddenAngles {
    Eigen::VectorXcd theta;
    u64 checksum = 0;  ///< ties the cache to (params id, configuration bits)
};

u64 hidden_angles_checksum(const RbmParameters& p, u64 config_bits);
HiddenAngles compute_hidden_angles(const RbmParameters& p, const SpinConfiguration& sigma);
HiddenAngles compute_hidden_angles_bits(const RbmParameters& p, u64 bits);

cplx log_psi(const RbmParameters& p, const SpinConfiguration& sigma);
cplx log_psi_bits(const RbmParameters& p, u64 bits);

/// Psi(sigma')/Psi(sigma) where sigma' flips the sites in `flips`
/// (1 or 2 sites), computed incrementally from the cached angles in
/// O(M * |flips|). Throws ProvenanceError on a stale cache.
cplx amplitude_ratio(const RbmParameters& p, const HiddenAngles& angles,
                     const SpinConfiguration& sigma, std::span<const std::size_t> flips);

/// O = d log Psi / d W in canonical flattening order:
/// O_a[j] = sigma_j, O_b[i] = tanh(theta_i), O_w[j,i] = sigma_j tanh(theta_i).
Eigen::VectorXcd log_derivatives(const RbmParameters& p, const SpinConfiguration& sigma);
Eigen::VectorXcd log_derivatives_bits(const RbmParameters& p, u64 bits);

/// Real and imaginary parts of every parameter drawn i.i.d. Gaussian(0, spread^2).
RbmParameters init_random(std::size_t n_visible, std::size_t n_hidden, double spread, u64 seed);

/// Versioned JSON checkpoint (a_re/a_im/..., w row-major). Round-trips
/// bit-exactly through the decimal representation.
void save_checkpoint(const std::string& path, const RbmParameters& p, u64 seed,
                     const std::string& metadata_json = "{}");
struct Checkpoint {
    RbmParameters params;
    u64 seed = 0;
    std::string metadata_json;
};
Checkpoint load_checkpoint(const std::string& path);

}  // namespace gaudin
