// Copyright 2026 The gaudin-nqs Authors
// SPDX-License-Identifier: Apache-2.0

#include "gaudin/model.hpp"

#include <cmath>

namespace gaudin {

SpinConfiguration::SpinConfiguration(std::vector<std::int8_t> values)
    : values_(std::move(values)) {
    if (values_.empty())
        throw InvalidParameterError("SpinConfiguration: empty configuration");
    for (auto v : values_)
        if (v != 1 && v != -1)
            throw InvalidParameterError("SpinConfiguration: entries must be +1 or -1");
}

SpinConfiguration SpinConfiguration::from_bits(u64 bits, std::size_t n_spins) {
    if (n_spins == 0 || n_spins > 64)
        throw InvalidParameterError("SpinConfiguration: bad spin count");
    std::vector<std::int8_t> v(n_spins);
    for (std::size_t j = 0; j < n_spins; ++j)
        v[j] = (bits >> j) & 1 ? 1 : -1;
    return SpinConfiguration(std::move(v));
}

u64 SpinConfiguration::bits() const {
    u64 b = 0;
    for (std::size_t j = 0; j < values_.size(); ++j)
        if (values_[j] > 0) b |= u64{1} << j;
    return b;
}

double total_sz(const SpinConfiguration& sigma) {
    int s = 0;
    for (std::size_t j = 0; j < sigma.size(); ++j) s += sigma[j];
    return 0.5 * s;
}

std::vector<double> build_couplings(double A, std::size_t N, double N0) {
    if (N < 1) throw InvalidParameterError("build_couplings: N must be >= 1");
    if (!(N0 > 0.0)) throw InvalidParameterError("build_couplings: N0 must be > 0");
    if (A == 0.0) throw InvalidParameterError("build_couplings: A must be nonzero");
    std::vector<double> a(N);
    for (std::size_t k = 1; k <= N; ++k)
        a[k - 1] = (A / N0) * std::exp(-(double(k) - 1.0) / N0);
    return a;
}

GaudinModel make_exponential_model(double A, std::size_t N, double N0, double B) {
    return GaudinModel{B, build_couplings(A, N, N0), A, N0};
}

double diagonal_energy_bits(u64 bits, const GaudinModel& m) {
    const double s0 = (bits & 1) ? 1.0 : -1.0;
    double e = 0.5 * m.B * s0;
    for (std::size_t k = 1; k <= m.n_env(); ++k) {
        const double sk = (bits >> k) & 1 ? 1.0 : -1.0;
        e += 0.25 * m.couplings[k - 1] * s0 * sk;
    }
    return e;
}

double diagonal_energy(const SpinConfiguration& sigma, const GaudinModel& m) {
    if (sigma.size() != m.n_spins())
        throw InvalidParameterError("diagonal_energy: configuration/model size mismatch");
    return diagonal_energy_bits(sigma.bits(), m);
}

void connected_bits(u64 bits, const GaudinModel& m, std::vector<ConnectedBits>& out) {
    out.clear();
    out.push_back({bits, diagonal_energy_bits(bits, m)});
    const u64 s0 = bits & 1;
    for (std::size_t k = 1; k <= m.n_env(); ++k) {
        if (((bits >> k) & 1) != s0)  // flip-flop needs anti-aligned spins
            out.push_back({bits ^ 1 ^ (u64{1} << k), 0.5 * m.couplings[k - 1]});
    }
}

std::vector<ConnectedElement> connected_configurations(const SpinConfiguration& sigma,
                                                       const GaudinModel& m) {
    if (sigma.size() != m.n_spins())
        throw InvalidParameterError("connected_configurations: size mismatch");
    std::vector<ConnectedBits> rows;
    connected_bits(sigma.bits(), m, rows);
    std::vector<ConnectedElement> out;
    out.reserve(rows.size());
    for (const auto& r : rows)
        out.push_back({SpinConfiguration::from_bits(r.bits, sigma.size()), r.amplitude});
    return out;
}

}  // namespace gaudin
