// Copyright 2026 The gaudin-nqs Authors
// SPDX-License-Identifier: Apache-2.0
//
// Monte Carlo / exact-summation estimators. Sample multisets are consumed in
// unique-configuration form: every per-configuration quantity is evaluated
// once and combined with the multiplicity weights, which leaves the estimator
// values identical to a plain sample average.

#include <unordered_map>

#include "gaudin/optimizer.hpp"

namespace gaudin {

namespace {

void check_provenance(const RbmParameters& p, u64 source, const char* who) {
    if (source != p.id())
        throw ProvenanceError(std::string(who) + ": sample set was not generated from these parameters");
}

// Psi(sigma')/Psi(sigma) with sigma' = sigma ^ flip_mask, from cached angles.
cplx ratio_from_theta(const RbmParameters& p, const Eigen::VectorXcd& theta, u64 bits,
                      u64 flip_mask) {
    cplx dlog = 0.0;
    Eigen::VectorXcd th = theta;
    for (Eigen::Index j = 0; j < p.n_visible(); ++j) {
        if ((flip_mask >> j) & 1) {
            const double sj = (bits >> j) & 1 ? 1.0 : -1.0;
            dlog -= 2.0 * p.a[j] * sj;
            th -= 2.0 * sj * p.w.row(j).transpose();
        }
    }
    for (Eigen::Index i = 0; i < th.size(); ++i)
        dlog += log2cosh(th[i]) - log2cosh(theta[i]);
    return std::exp(dlog);
}

bool table_fits(const RbmParameters& p) {
    return p.n_visible() <= 12 && (u64{1} << p.n_visible()) <= kLogPsiTableMaxDim;
}

Eigen::VectorXcd local_energies_impl(const RbmParameters& p, std::span<const u64> configs,
                                     const GaudinModel& m, const LogPsiTable* table) {
    Eigen::VectorXcd e(Eigen::Index(configs.size()));
    std::vector<ConnectedBits> row;
    for (std::size_t c = 0; c < configs.size(); ++c) {
        const u64 bits = configs[c];
        connected_bits(bits, m, row);
        cplx acc = row[0].amplitude;  // diagonal, ratio = 1
        if (table) {
            const cplx base = table->values[bits];
            for (std::size_t r = 1; r < row.size(); ++r)
                acc += row[r].amplitude * std::exp(table->values[row[r].bits] - base);
        } else {
            const Eigen::VectorXcd theta = compute_hidden_angles_bits(p, bits).theta;
            for (std::size_t r = 1; r < row.size(); ++r)
                acc += row[r].amplitude * ratio_from_theta(p, theta, bits, bits ^ row[r].bits);
        }
        e[Eigen::Index(c)] = acc;
    }
    return e;
}

struct BatchEval {
    Eigen::VectorXd weights;   // u
    Eigen::VectorXcd e_local;  // u
    Eigen::MatrixXcd o;        // u x P
    cplx energy;               // <E_local>
    Eigen::VectorXcd o_mean;   // P
};

BatchEval evaluate_batch(const RbmParameters& p, const WeightedConfigs& wc,
                         const GaudinModel& m) {
    LogPsiTable table;
    const LogPsiTable* tp = nullptr;
    if (table_fits(p)) {
        table = build_log_psi_table(p);
        tp = &table;
    }
    BatchEval b;
    const Eigen::Index u = Eigen::Index(wc.configs.size());
    b.weights = Eigen::Map<const Eigen::VectorXd>(wc.weights.data(), u);
    b.e_local = local_energies_impl(p, wc.configs, m, tp);
    b.o.resize(u, p.n_params());
    for (Eigen::Index c = 0; c < u; ++c)
        b.o.row(c) = log_derivatives_bits(p, wc.configs[std::size_t(c)]).transpose();
    b.energy = (b.weights.cast<cplx>().asDiagonal() * b.e_local).sum();
    b.o_mean = b.o.transpose() * b.weights.cast<cplx>();
    return b;
}

Eigen::VectorXcd force_from_batch(const BatchEval& b) {
    // F_i = <E O_i*> - <E><O_i*>
    const Eigen::VectorXcd weighted_e = b.weights.cast<cplx>().cwiseProduct(b.e_local);
    return (b.o.adjoint() * weighted_e) - b.energy * b.o_mean.conjugate();
}

Eigen::MatrixXcd tensor_from_batch(const BatchEval& b) {
    // S = O^H diag(w) O - o_mean* o_mean^T
    Eigen::MatrixXcd s = b.o.adjoint() * b.weights.cast<cplx>().asDiagonal() * b.o;
    s.noalias() -= b.o_mean.conjugate() * b.o_mean.transpose();
    return s;
}

Eigen::VectorXcd log_psi_on(const RbmParameters& p, std::span<const u64> configs) {
    Eigen::VectorXcd out(Eigen::Index(configs.size()));
    if (table_fits(p)) {
        const LogPsiTable t = build_log_psi_table(p);
        for (std::size_t c = 0; c < configs.size(); ++c)
            out[Eigen::Index(c)] = t.values[configs[c]];
    } else {
        for (std::size_t c = 0; c < configs.size(); ++c)
            out[Eigen::Index(c)] = log_psi_bits(p, configs[c]);
    }
    return out;
}

struct PenaltyTerm {
    cplx overlap_product;        // <Psi_j/Psi>_p <Psi/Psi_j>_j (scale-shifted internally)
    Eigen::VectorXcd centered;   // per own config: Psi_j/Psi - mean, scale-shifted
    cplx lower_factor;           // <Psi/Psi_j>_j, same shift
};

PenaltyTerm penalty_term(const RbmParameters& p, const RbmParameters& lower,
                         const WeightedConfigs& own, const WeightedConfigs& lower_samples) {
    const Eigen::Index u = Eigen::Index(own.configs.size());
    const Eigen::VectorXcd lp_own = log_psi_on(p, own.configs);
    const Eigen::VectorXcd lj_own = log_psi_on(lower, own.configs);
    // scale shift keeps both cross-ratios in exp range; it cancels in the product
    double c = 0.0;
    for (Eigen::Index i = 0; i < u; ++i)
        c += own.weights[std::size_t(i)] * (lj_own[i].real() - lp_own[i].real());

    PenaltyTerm t;
    t.centered.resize(u);
    cplx rbar = 0.0;
    for (Eigen::Index i = 0; i < u; ++i) {
        t.centered[i] = std::exp(lj_own[i] - lp_own[i] - c);
        rbar += own.weights[std::size_t(i)] * t.centered[i];
    }
    t.centered.array() -= rbar;

    const Eigen::VectorXcd lp_low = log_psi_on(p, lower_samples.configs);
    const Eigen::VectorXcd lj_low = log_psi_on(lower, lower_samples.configs);
    cplx qbar = 0.0;
    for (Eigen::Index i = 0; i < Eigen::Index(lower_samples.configs.size()); ++i)
        qbar += lower_samples.weights[std::size_t(i)] * std::exp(lp_low[i] - lj_low[i] + c);

    t.lower_factor = qbar;
    t.overlap_product = rbar * qbar;
    return t;
}

void check_penalty_args(const RbmParameters& p, const PenaltySpec& pen,
                        const WeightedConfigs& samples_p,
                        std::span<const WeightedConfigs> samples_lower) {
    check_provenance(p, samples_p.source_params, "penalty");
    if (pen.size() != samples_lower.size())
        throw InvalidParameterError("penalty: one lower-state sample set per lower state required");
    for (std::size_t j = 0; j < pen.size(); ++j) {
        if (pen.coefficients[j] < 0.0)
            throw InvalidParameterError("penalty: coefficients must be non-negative");
        check_provenance(pen.lower_states[j], samples_lower[j].source_params, "penalty(lower)");
    }
}

}  // namespace

cplx local_energy(const RbmParameters& p, const SpinConfiguration& sigma, const GaudinModel& m) {
    if (Eigen::Index(sigma.size()) != p.n_visible() || sigma.size() != m.n_spins())
        throw InvalidParameterError("local_energy: shape mismatch");
    const HiddenAngles angles = compute_hidden_angles(p, sigma);
    const auto row = connected_configurations(sigma, m);
    cplx acc = row[0].amplitude;
    for (std::size_t r = 1; r < row.size(); ++r) {
        // targets differ from sigma in spin 0 and one environment spin
        std::size_t flips[2] = {0, 0};
        std::size_t nf = 0;
        for (std::size_t j = 0; j < sigma.size(); ++j)
            if (row[r].target[j] != sigma[j]) flips[nf++] = j;
        acc += row[r].amplitude * amplitude_ratio(p, angles, sigma, std::span(flips, nf));
    }
    return acc;
}

Eigen::VectorXcd local_energies(const RbmParameters& p, const WeightedConfigs& samples,
                                const GaudinModel& m) {
    check_provenance(p, samples.source_params, "local_energies");
    LogPsiTable table;
    const LogPsiTable* tp = nullptr;
    if (table_fits(p)) {
        table = build_log_psi_table(p);
        tp = &table;
    }
    return local_energies_impl(p, samples.configs, m, tp);
}

Eigen::VectorXcd force_vector(const RbmParameters& p, const WeightedConfigs& samples,
                              const GaudinModel& m) {
    check_provenance(p, samples.source_params, "force_vector");
    return force_from_batch(evaluate_batch(p, samples, m));
}

Eigen::VectorXcd force_vector(const RbmParameters& p, const SampleSet& samples,
                              const GaudinModel& m) {
    return force_vector(p, compress(samples), m);
}

Eigen::MatrixXcd geometric_tensor(const RbmParameters& p, const WeightedConfigs& samples) {
    check_provenance(p, samples.source_params, "geometric_tensor");
    const Eigen::Index u = Eigen::Index(samples.configs.size());
    Eigen::MatrixXcd o(u, p.n_params());
    for (Eigen::Index c = 0; c < u; ++c)
        o.row(c) = log_derivatives_bits(p, samples.configs[std::size_t(c)]).transpose();
    const Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(samples.weights.data(), u);
    const Eigen::VectorXcd o_mean = o.transpose() * w.cast<cplx>();
    Eigen::MatrixXcd s = o.adjoint() * w.cast<cplx>().asDiagonal() * o;
    s.noalias() -= o_mean.conjugate() * o_mean.transpose();
    return s;
}

Eigen::MatrixXcd geometric_tensor(const RbmParameters& p, const SampleSet& samples) {
    return geometric_tensor(p, compress(samples));
}

RbmParameters sr_step(const RbmParameters& p, const Eigen::VectorXcd& force,
                      const Eigen::MatrixXcd& s, const SrConfig& cfg) {
    if (force.size() != p.n_params() || s.rows() != s.cols() || s.rows() != force.size())
        throw InvalidParameterError("sr_step: dimension mismatch");
    Eigen::MatrixXcd reg = s;
    reg.diagonal().array() += cfg.diag_shift;
    const Eigen::LDLT<Eigen::MatrixXcd> ldlt(reg);
    Eigen::VectorXcd step;
    double rel_residual = 0.0;
    if (ldlt.info() == Eigen::Success) {
        step = ldlt.solve(force);
        const double fn = force.norm();
        rel_residual = fn > 0.0 ? (reg * step - force).norm() / fn : 0.0;
    }
    if (ldlt.info() != Eigen::Success || !step.allFinite() || rel_residual > 1e-8) {
        const double dmax = ldlt.vectorD().cwiseAbs().maxCoeff();
        const double dmin = ldlt.vectorD().cwiseAbs().minCoeff();
        throw NumericalError("sr_step: regularized geometric tensor is numerically singular"
                             " (diag-pivot condition estimate " +
                             std::to_string(dmin > 0.0 ? dmax / dmin : INFINITY) + ")");
    }
    const Eigen::VectorXcd updated = p.flatten() - cfg.learning_rate * step;
    return RbmParameters::unflatten(updated, p.n_visible(), p.n_hidden());
}

double penalty_loss(const RbmParameters& p, const PenaltySpec& pen,
                    const WeightedConfigs& samples_p,
                    std::span<const WeightedConfigs> samples_lower, const GaudinModel& m) {
    check_penalty_args(p, pen, samples_p, samples_lower);
    const Eigen::VectorXcd e = local_energies(p, samples_p, m);
    cplx loss = 0.0;
    for (std::size_t i = 0; i < samples_p.configs.size(); ++i)
        loss += samples_p.weights[i] * e[Eigen::Index(i)];
    for (std::size_t j = 0; j < pen.size(); ++j) {
        const PenaltyTerm t =
            penalty_term(p, pen.lower_states[j], samples_p, samples_lower[j]);
        loss += pen.coefficients[j] * t.overlap_product;
    }
    return loss.real();  // imaginary residue is statistical noise
}

Eigen::VectorXcd penalty_gradient(const RbmParameters& p, const PenaltySpec& pen,
                                  const WeightedConfigs& samples_p,
                                  std::span<const WeightedConfigs> samples_lower,
                                  const GaudinModel& m) {
    check_penalty_args(p, pen, samples_p, samples_lower);
    const BatchEval b = evaluate_batch(p, samples_p, m);
    Eigen::VectorXcd grad = force_from_batch(b);
    for (std::size_t j = 0; j < pen.size(); ++j) {
        const PenaltyTerm t =
            penalty_term(p, pen.lower_states[j], samples_p, samples_lower[j]);
        const Eigen::VectorXcd weighted = b.weights.cast<cplx>().cwiseProduct(t.centered);
        grad.noalias() += pen.coefficients[j] * t.lower_factor * (b.o.adjoint() * weighted);
    }
    return grad;
}

MeanEstimate energy_estimate(const RbmParameters& p, const SampleSet& samples,
                             const GaudinModel& m) {
    check_provenance(p, samples.source_params, "energy_estimate");
    const WeightedConfigs wc = compress(samples);
    const Eigen::VectorXcd e = local_energies(p, wc, m);
    std::unordered_map<u64, cplx> lut;
    lut.reserve(wc.configs.size());
    for (std::size_t i = 0; i < wc.configs.size(); ++i) lut[wc.configs[i]] = e[Eigen::Index(i)];
    std::vector<cplx> series;
    series.reserve(samples.sequence.size());
    for (u64 c : samples.sequence) series.push_back(lut.at(c));
    return estimate_mean(series);
}

}  // namespace gaudin
