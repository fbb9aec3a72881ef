// Copyright 2026 The gaudin-nqs Authors
// SPDX-License-Identifier: Apache-2.0

#include "gaudin/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

namespace gaudin {

LogPsiTable build_log_psi_table(const RbmParameters& p) {
    const Eigen::Index nv = p.n_visible();
    const u64 dim = u64{1} << nv;
    if (dim > kLogPsiTableMaxDim)
        throw SizeGuardError("build_log_psi_table: configuration space too large");

    // All sign vectors at once, then theta columns via one gemm.
    Eigen::MatrixXd signs(nv, Eigen::Index(dim));
    for (u64 c = 0; c < dim; ++c)
        for (Eigen::Index j = 0; j < nv; ++j)
            signs(j, Eigen::Index(c)) = (c >> j) & 1 ? 1.0 : -1.0;
    const Eigen::MatrixXcd sc = signs.cast<cplx>();
    const Eigen::MatrixXcd theta = (p.w.transpose() * sc).colwise() + p.b;
    const Eigen::RowVectorXcd bias = p.a.transpose() * sc;

    LogPsiTable t;
    t.source_params = p.id();
    t.values.resize(dim);
    for (u64 c = 0; c < dim; ++c) {
        cplx v = bias[Eigen::Index(c)];
        for (Eigen::Index i = 0; i < theta.rows(); ++i) v += log2cosh(theta(i, Eigen::Index(c)));
        t.values[c] = v;
    }
    return t;
}

WeightedConfigs compress(const SampleSet& s) {
    std::map<u64, std::size_t> counts;
    for (u64 c : s.sequence) ++counts[c];
    WeightedConfigs w;
    w.n_spins = s.n_spins;
    w.source_params = s.source_params;
    w.configs.reserve(counts.size());
    w.weights.reserve(counts.size());
    const double inv = 1.0 / double(s.sequence.size());
    for (const auto& [c, n] : counts) {
        w.configs.push_back(c);
        w.weights.push_back(double(n) * inv);
    }
    return w;
}

WeightedConfigs exact_summation_weights(const RbmParameters& p) {
    const LogPsiTable t = build_log_psi_table(p);
    const u64 dim = t.values.size();
    double max_re = -1e300;
    for (const cplx& v : t.values) max_re = std::max(max_re, v.real());
    WeightedConfigs w;
    w.n_spins = std::size_t(p.n_visible());
    w.source_params = p.id();
    w.configs.resize(dim);
    w.weights.resize(dim);
    double norm = 0.0;
    for (u64 c = 0; c < dim; ++c) {
        w.configs[c] = c;
        w.weights[c] = std::exp(2.0 * (t.values[c].real() - max_re));
        norm += w.weights[c];
    }
    for (double& x : w.weights) x /= norm;
    return w;
}

namespace {

// Incremental-amplitude chain state for spaces too large for a table.
struct DirectChain {
    const RbmParameters* p;
    u64 bits;
    Eigen::VectorXcd theta;
    double re_log = 0.0;  // Re log Psi(current)

    void init(const RbmParameters& params, u64 start) {
        p = &params;
        bits = start;
        theta = compute_hidden_angles_bits(params, start).theta;
        re_log = log_psi_bits(params, start).real();
    }

    // Re log Psi after flipping site j, plus the updated angles.
    double proposal_re_log(std::size_t j, Eigen::VectorXcd& theta_out) const {
        const double sj = (bits >> j) & 1 ? 1.0 : -1.0;
        theta_out = theta - 2.0 * sj * p->w.row(Eigen::Index(j)).transpose();
        double r = -2.0 * p->a[Eigen::Index(j)].real() * sj;
        for (Eigen::Index i = 0; i < theta.size(); ++i) {
            r += re_log2cosh(theta_out[i].real(), theta_out[i].imag()) -
                 re_log2cosh(theta[i].real(), theta[i].imag());
        }
        return re_log + r;
    }
};

}  // namespace

SampleSet metropolis_chain(const RbmParameters& p, std::size_t n_samples, std::size_t burn_in,
                           std::size_t thin, u64 seed, const ChainOptions& opts) {
    if (n_samples < 1) throw InvalidParameterError("metropolis_chain: n_samples must be >= 1");
    if (thin < 1) throw InvalidParameterError("metropolis_chain: thin must be >= 1");
    const std::size_t n_sites = std::size_t(p.n_visible());
    const u64 mask = n_sites == 64 ? ~u64{0} : (u64{1} << n_sites) - 1;

    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick_site(0, n_sites - 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    u64 current = opts.start_bits.value_or(rng() & mask);

    const u64 dim = n_sites >= 63 ? ~u64{0} : (u64{1} << n_sites);
    const bool use_table = dim <= kLogPsiTableMaxDim;
    LogPsiTable table;
    DirectChain direct;
    double cur_re = 0.0;
    if (use_table) {
        table = build_log_psi_table(p);
        cur_re = table.values[current].real();
    } else {
        direct.init(p, current);
    }

    SampleSet out;
    out.n_spins = n_sites;
    out.source_params = p.id();
    out.sequence.reserve(n_samples);

    std::size_t accepted = 0, proposed = 0;
    std::size_t recorded_slots = 0;
    Eigen::VectorXcd theta_prop;
    while (out.sequence.size() < n_samples) {
        for (std::size_t sweep = 0; sweep < thin; ++sweep) {
            for (std::size_t step = 0; step < n_sites; ++step) {
                const std::size_t j = pick_site(rng);
                const double u = unit(rng);
                double new_re;
                if (use_table) {
                    new_re = table.values[current ^ (u64{1} << j)].real();
                } else {
                    new_re = direct.proposal_re_log(j, theta_prop);
                }
                ++proposed;
                // accept with min(1, |Psi'/Psi|^2), evaluated in log domain
                if (std::log(u) < 2.0 * (new_re - cur_re)) {
                    ++accepted;
                    current ^= u64{1} << j;
                    cur_re = new_re;
                    if (!use_table) {
                        direct.bits = current;
                        direct.theta.swap(theta_prop);
                        direct.re_log = new_re;
                    }
                }
            }
        }
        ++recorded_slots;
        if (recorded_slots > burn_in) out.sequence.push_back(current);
    }
    out.acceptance_rate = proposed ? double(accepted) / double(proposed) : 0.0;
    return out;
}

MeanEstimate estimate_mean(std::span<const cplx> values, std::size_t n_batches) {
    const std::size_t n = values.size();
    if (n == 0) throw InvalidParameterError("estimate_mean: empty value list");
    cplx mean = 0.0;
    for (const cplx& v : values) mean += v;
    mean /= double(n);
    if (n == 1) return {mean, 0.0};

    double var = 0.0;
    for (const cplx& v : values) var += std::norm(v - mean);
    var /= double(n - 1);
    const double naive = std::sqrt(var / double(n));

    const std::size_t nb = std::min(n_batches, n);
    const std::size_t bsz = n / nb;
    double batch_var = 0.0;
    cplx bm_mean = 0.0;
    std::vector<cplx> bm(nb);
    for (std::size_t b = 0; b < nb; ++b) {
        cplx s = 0.0;
        for (std::size_t i = b * bsz; i < (b + 1) * bsz; ++i) s += values[i];
        bm[b] = s / double(bsz);
        bm_mean += bm[b];
    }
    bm_mean /= double(nb);
    for (const cplx& v : bm) batch_var += std::norm(v - bm_mean);
    const double batch = nb > 1 ? std::sqrt(batch_var / double(nb * (nb - 1))) : 0.0;

    return {mean, std::max(naive, batch)};
}

}  // namespace gaudin
