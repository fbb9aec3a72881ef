// Copyright 2026 The gaudin-nqs Authors
// SPDX-License-Identifier: Apache-2.0

#include "gaudin/oracle.hpp"

#include <bit>
#include <cmath>

namespace gaudin {

namespace {

void check_guard(std::size_t n_spins, const char* who) {
    if (n_spins > kOracleMaxSpins)
        throw SizeGuardError(std::string(who) +
                             ": dense oracle capped at N+1 <= " +
                             std::to_string(kOracleMaxSpins) +
                             " spins; use sector_spectrum for larger systems");
}

}  // namespace

Eigen::MatrixXd dense_hamiltonian(const GaudinModel& m) {
    check_guard(m.n_spins(), "dense_hamiltonian");
    const Eigen::Index dim = Eigen::Index(1) << m.n_spins();
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
    std::vector<ConnectedBits> row;
    for (Eigen::Index c = 0; c < dim; ++c) {
        connected_bits(u64(c), m, row);
        for (const ConnectedBits& e : row) h(Eigen::Index(e.bits), c) += e.amplitude;
    }
    return h;
}

DenseSpectrum full_spectrum(const GaudinModel& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(dense_hamiltonian(m));
    if (solver.info() != Eigen::Success)
        throw NumericalError("full_spectrum: dense eigensolver failed");
    return {solver.eigenvalues(), solver.eigenvectors()};
}

SectorBasis sector_basis(std::size_t n_spins, std::size_t n_down) {
    if (n_down > n_spins)
        throw InvalidParameterError("sector_basis: n_down exceeds the spin count");
    SectorBasis b;
    b.n_down = n_down;
    const u64 dim = u64{1} << n_spins;
    for (u64 c = 0; c < dim; ++c)
        if (n_spins - std::size_t(std::popcount(c)) == n_down) b.members.push_back(c);
    return b;
}

SectorSpectrum sector_spectrum(const GaudinModel& m, std::size_t n_down) {
    check_guard(m.n_spins(), "sector_spectrum");
    SectorSpectrum s;
    s.basis = sector_basis(m.n_spins(), n_down);
    const Eigen::Index dim = Eigen::Index(s.basis.members.size());
    std::vector<Eigen::Index> index_of(std::size_t(1) << m.n_spins(), -1);
    for (Eigen::Index i = 0; i < dim; ++i) index_of[s.basis.members[std::size_t(i)]] = i;

    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
    std::vector<ConnectedBits> row;
    for (Eigen::Index c = 0; c < dim; ++c) {
        connected_bits(s.basis.members[std::size_t(c)], m, row);
        for (const ConnectedBits& e : row) {
            const Eigen::Index r = index_of[e.bits];
            if (r < 0)
                throw NumericalError("sector_spectrum: H connects across J^z sectors");
            h(r, c) += e.amplitude;
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h);
    if (solver.info() != Eigen::Success)
        throw NumericalError("sector_spectrum: dense eigensolver failed");
    s.eigenvalues = solver.eigenvalues();
    s.eigenvectors = solver.eigenvectors();
    return s;
}

Eigen::VectorXcd rbm_dense_state(const RbmParameters& p) {
    const std::size_t n_spins = std::size_t(p.n_visible());
    check_guard(n_spins, "rbm_dense_state");
    const Eigen::Index dim = Eigen::Index(1) << n_spins;
    Eigen::VectorXcd logs(dim);
    double max_re = -1e300;
    for (Eigen::Index c = 0; c < dim; ++c) {
        logs[c] = log_psi_bits(p, u64(c));
        max_re = std::max(max_re, logs[c].real());
    }
    Eigen::VectorXcd psi(dim);
    for (Eigen::Index c = 0; c < dim; ++c) psi[c] = std::exp(logs[c] - max_re);
    return psi / psi.norm();
}

double rbm_fidelity(const RbmParameters& p, const Eigen::VectorXcd& v) {
    const Eigen::VectorXcd psi = rbm_dense_state(p);
    if (v.size() != psi.size())
        throw InvalidParameterError("rbm_fidelity: dense-state dimension mismatch");
    return std::norm(v.dot(psi)) / v.squaredNorm();
}

Eigen::VectorXcd apply_s0_plus(const Eigen::VectorXcd& v) {
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(v.size());
    for (Eigen::Index c = 1; c < v.size(); c += 2) out[c] = v[c ^ 1];  // bit0: 0 -> 1
    return out;
}

Eigen::VectorXcd apply_s0_minus(const Eigen::VectorXcd& v) {
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(v.size());
    for (Eigen::Index c = 0; c < v.size(); c += 2) out[c] = v[c ^ 1];  // bit0: 1 -> 0
    return out;
}

SpectrumBundle dense_bundle(const GaudinModel& m, const DenseSpectrum& s, double omega_max,
                            double gamma) {
    SpectrumBundle b;
    b.gamma = gamma;
    b.omega_max = omega_max;
    b.ground_energy = s.eigenvalues[0];
    const Eigen::VectorXd v0 = s.eigenvectors.col(0);
    Eigen::VectorXd sp = Eigen::VectorXd::Zero(v0.size());
    Eigen::VectorXd sm = Eigen::VectorXd::Zero(v0.size());
    for (Eigen::Index c = 0; c < v0.size(); ++c) {
        if (c & 1)
            sp[c] = v0[c ^ 1];
        else
            sm[c] = v0[c ^ 1];
    }
    const double tiny = 1e-12 * std::max(1.0, std::fabs(b.ground_energy));
    for (Eigen::Index j = 1; j < s.eigenvalues.size(); ++j) {
        const double delta = s.eigenvalues[j] - b.ground_energy;
        if (delta <= tiny) continue;
        if (omega_max > 0.0 && delta > omega_max) continue;
        SpectrumLevel lvl;
        lvl.delta = delta;
        const double mp = s.eigenvectors.col(j).dot(sp);
        const double mm = s.eigenvectors.col(j).dot(sm);
        lvl.m_plus_sq = mp * mp;
        lvl.m_minus_sq = mm * mm;
        b.levels.push_back(lvl);
    }
    if (omega_max > 0.0) {
        // Exact polarized eigenstate |central down, bath up> -> peak at
        // (B + sum_k A_k/2)/2 with weight |<all-up|S_0^+|0>|^2 = |v0(P)|^2.
        double half_sum = 0.0;
        for (double a : m.couplings) half_sum += 0.5 * a;
        const u64 p_bits = ((u64{1} << m.n_spins()) - 1) ^ 1;
        SpectrumLevel pol;
        pol.delta = 0.5 * (m.B + half_sum) - b.ground_energy;
        pol.m_plus_sq = v0[Eigen::Index(p_bits)] * v0[Eigen::Index(p_bits)];
        b.polarized = pol;
    }
    b.validate();
    return b;
}

std::vector<double> time_evolve(const GaudinModel& m, const DrivePulse& drive,
                                const Eigen::VectorXcd& psi0, std::span<const double> t_grid,
                                const TimeEvolveOptions& opts) {
    check_guard(m.n_spins(), "time_evolve");
    const Eigen::Index dim = Eigen::Index(1) << m.n_spins();
    if (psi0.size() != dim)
        throw InvalidParameterError("time_evolve: initial-state dimension mismatch");
    if (t_grid.size() < 1) throw InvalidParameterError("time_evolve: empty time grid");
    if (t_grid.size() >= 2) {
        const double dt = t_grid[1] - t_grid[0];
        for (std::size_t i = 1; i < t_grid.size(); ++i) {
            if (std::fabs((t_grid[i] - t_grid[i - 1]) - dt) > 1e-9 * std::fabs(dt))
                throw InvalidParameterError("time_evolve: time grid must be uniform");
        }
    }

    const Eigen::MatrixXd h = dense_hamiltonian(m);
    const double max_step = opts.max_step > 0.0 ? opts.max_step : 2.5e-3 / m.energy_unit();

    // dpsi/dt = -i (H + B_y(t) S_0^y) psi;  (S_0^y psi)(c) = -+ (i/2) psi(c^1).
    Eigen::VectorXcd tmp(dim);
    auto rhs = [&](double t, const Eigen::VectorXcd& psi, Eigen::VectorXcd& out) {
        tmp.noalias() = h * psi;
        const double by = drive_field(t, drive);
        const cplx half_i(0.0, 0.5);
        for (Eigen::Index c = 0; c < dim; ++c) {
            const cplx sy = (c & 1 ? -half_i : half_i) * psi[c ^ 1];
            out[c] = cplx(0.0, -1.0) * (tmp[c] + by * sy);
        }
    };

    auto sx_of = [&](const Eigen::VectorXcd& psi) {
        double sx = 0.0;
        for (Eigen::Index c = 0; c < dim; ++c)
            sx += 0.5 * std::real(std::conj(psi[c]) * psi[c ^ 1]);
        return sx;
    };

    std::vector<double> out;
    out.reserve(t_grid.size());
    Eigen::VectorXcd psi = psi0 / psi0.norm();
    Eigen::VectorXcd k1(dim), k2(dim), k3(dim), k4(dim), stage(dim);
    out.push_back(sx_of(psi));
    for (std::size_t i = 1; i < t_grid.size(); ++i) {
        const double span = t_grid[i] - t_grid[i - 1];
        const auto nsub = std::max<std::size_t>(1, std::size_t(std::ceil(span / max_step)));
        const double hstep = span / double(nsub);
        double t = t_grid[i - 1];
        for (std::size_t s = 0; s < nsub; ++s) {
            rhs(t, psi, k1);
            stage = psi + 0.5 * hstep * k1;
            rhs(t + 0.5 * hstep, stage, k2);
            stage = psi + 0.5 * hstep * k2;
            rhs(t + 0.5 * hstep, stage, k3);
            stage = psi + hstep * k3;
            rhs(t + hstep, stage, k4);
            psi += (hstep / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            t += hstep;
        }
        if (std::fabs(psi.norm() - 1.0) > 1e-6)
            throw NumericalError("time_evolve: norm drift above 1e-6; reduce max_step");
        out.push_back(sx_of(psi));
    }
    return out;
}

}  // namespace gaudin
