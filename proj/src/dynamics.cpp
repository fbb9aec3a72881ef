// Copyright 2026 The gaudin-nqs Authors
// SPDX-License-Identifier: Apache-2.0

#include "gaudin/dynamics.hpp"

#include <fftw3.h>

#include <cmath>
#include <fstream>
#include <numbers>
#include <unordered_map>

#include <json.hpp>

#include "gaudin/sampler.hpp"

namespace gaudin {

void SpectrumBundle::validate() const {
    double prev = 0.0;
    for (const SpectrumLevel& l : levels) {
        if (!(l.delta > 0.0))
            throw InvalidParameterError("SpectrumBundle: excitation energies must be positive");
        if (l.delta <= prev + 1e-12 * std::max(1.0, l.delta))
            throw InvalidParameterError(
                "SpectrumBundle: excitation energies must be ascending and non-degenerate");
        if (l.m_plus_sq < -4.0 * l.m_plus_sq_err || l.m_minus_sq < -4.0 * l.m_minus_sq_err)
            throw InvalidParameterError(
                "SpectrumBundle: squared matrix element below -4 stderr");
        prev = l.delta;
    }
    if (polarized && !(polarized->delta > 0.0))
        throw InvalidParameterError("SpectrumBundle: polarized peak must sit above the ground "
                                    "energy");
}

double drive_field(double t, const DrivePulse& pulse) {
    if (!(pulse.tau1 > 0.0) || !(pulse.tau2 > 0.0))
        throw InvalidParameterError("drive_field: pulse widths must be positive");
    auto g = [](double x, double s) {
        return std::exp(-0.5 * x * x / (s * s)) / (std::sqrt(2.0 * std::numbers::pi) * s);
    };
    const double x = t - pulse.t_bar;
    return pulse.b1 * g(x, pulse.tau1) * std::cos(pulse.carrier * t) +
           pulse.b2 * g(x, pulse.tau2);
}

namespace {

double lorentzian(double w, double gamma) {
    return (gamma / std::numbers::pi) / (w * w + gamma * gamma);
}

}  // namespace

std::vector<double> spectral_function(const SpectrumBundle& bundle,
                                      std::span<const double> omega_grid) {
    if (!(bundle.gamma > 0.0))
        throw InvalidParameterError("spectral_function: broadening gamma must be positive");
    if (bundle.levels.empty() && !bundle.polarized)
        throw InvalidParameterError("spectral_function: empty bundle");
    bundle.validate();
    std::vector<double> out(omega_grid.size(), 0.0);
    auto add_level = [&](const SpectrumLevel& l) {
        for (std::size_t i = 0; i < omega_grid.size(); ++i) {
            const double w = omega_grid[i];
            out[i] += 2.0 * std::numbers::pi *
                      (l.m_plus_sq * lorentzian(w - l.delta, bundle.gamma) -
                       l.m_minus_sq * lorentzian(w + l.delta, bundle.gamma));
        }
    };
    for (const SpectrumLevel& l : bundle.levels) add_level(l);
    if (bundle.polarized) add_level(*bundle.polarized);
    return out;
}

std::vector<double> default_omega_grid(const SpectrumBundle& bundle, const GaudinModel& m,
                                       std::size_t n_points) {
    if (n_points < 2) throw InvalidParameterError("default_omega_grid: need >= 2 points");
    double half_sum = 0.0;
    for (double a : m.couplings) half_sum += 0.5 * a;
    const double lo = -1.2 * bundle.omega_max;
    const double hi = 1.2 * (m.B + half_sum);
    std::vector<double> grid(n_points);
    for (std::size_t i = 0; i < n_points; ++i)
        grid[i] = lo + (hi - lo) * double(i) / double(n_points - 1);
    return grid;
}

double susceptibility_xy(const SpectrumBundle& bundle, double t) {
    if (t < 0.0) return 0.0;
    double chi = 0.0;
    for (const SpectrumLevel& l : bundle.levels)
        chi += (l.m_plus_sq - l.m_minus_sq) * std::cos(l.delta * t);
    if (bundle.polarized)
        chi += (bundle.polarized->m_plus_sq - bundle.polarized->m_minus_sq) *
               std::cos(bundle.polarized->delta * t);
    return -0.5 * chi * std::exp(-bundle.gamma * t);
}

namespace {

// Linear convolution c[j] = sum_m a[m] b[j-m] of two length-n arrays,
// returning the first n coefficients, evaluated by zero-padded FFT.
std::vector<double> fft_convolve(const std::vector<double>& a, const std::vector<double>& b) {
    const std::size_t n = a.size();
    std::size_t len = 1;
    while (len < 2 * n) len <<= 1;
    const std::size_t nc = len / 2 + 1;

    double* in = fftw_alloc_real(len);
    fftw_complex* fa = fftw_alloc_complex(nc);
    fftw_complex* fb = fftw_alloc_complex(nc);
    fftw_plan fwd = fftw_plan_dft_r2c_1d(int(len), in, fa, FFTW_ESTIMATE);

    std::fill(in, in + len, 0.0);
    std::copy(a.begin(), a.end(), in);
    fftw_execute_dft_r2c(fwd, in, fa);
    std::fill(in, in + len, 0.0);
    std::copy(b.begin(), b.end(), in);
    fftw_execute_dft_r2c(fwd, in, fb);

    for (std::size_t i = 0; i < nc; ++i) {
        const double re = fa[i][0] * fb[i][0] - fa[i][1] * fb[i][1];
        const double im = fa[i][0] * fb[i][1] + fa[i][1] * fb[i][0];
        fa[i][0] = re / double(len);
        fa[i][1] = im / double(len);
    }
    fftw_plan bwd = fftw_plan_dft_c2r_1d(int(len), fa, in, FFTW_ESTIMATE);
    fftw_execute_dft_c2r(bwd, fa, in);

    std::vector<double> out(in, in + n);
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(bwd);
    fftw_free(in);
    fftw_free(fa);
    fftw_free(fb);
    return out;
}

}  // namespace

std::vector<double> discrete_convolution(std::span<const double> chi,
                                         std::span<const double> drive, double dt,
                                         const ResponseOptions& opts) {
    if (chi.size() != drive.size())
        throw InvalidParameterError("discrete_convolution: array-size mismatch");
    const std::size_t n = chi.size();
    if (n == 0) throw InvalidParameterError("discrete_convolution: empty input");
    // S(t_j) = dt * sum_{m=1}^{j} chi(t_m) B_y(t_{j-m}); chi slot 0 is zeroed
    // so both evaluation paths share the same convolution kernel.
    std::vector<double> a(chi.begin(), chi.end());
    a[0] = 0.0;
    std::vector<double> out;
    if (opts.use_fft) {
        const std::vector<double> b(drive.begin(), drive.end());
        out = fft_convolve(a, b);
        for (double& v : out) v *= dt;
    } else {
        out.assign(n, 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t m = 1; m <= j; ++m) s += a[m] * drive[j - m];
            out[j] = s * dt;
        }
    }
    return out;
}

std::vector<double> linear_response(const SpectrumBundle& bundle, const DrivePulse& pulse,
                                    std::span<const double> t_grid,
                                    const ResponseOptions& opts) {
    bundle.validate();
    const std::size_t n = t_grid.size();
    if (n < 2) throw InvalidParameterError("linear_response: need >= 2 grid points");
    if (std::fabs(t_grid[0]) > 1e-12)
        throw InvalidParameterError("linear_response: time grid must start at t = 0");
    const double dt = t_grid[1] - t_grid[0];
    if (!(dt > 0.0)) throw InvalidParameterError("linear_response: grid must be increasing");
    for (std::size_t i = 1; i < n; ++i)
        if (std::fabs((t_grid[i] - t_grid[i - 1]) - dt) > 1e-9 * dt)
            throw InvalidParameterError("linear_response: time grid must be uniform");

    std::vector<double> chi(n), by(n);
    for (std::size_t i = 0; i < n; ++i) chi[i] = susceptibility_xy(bundle, t_grid[i]);
    for (std::size_t i = 0; i < n; ++i) by[i] = drive_field(t_grid[i], pulse);
    return discrete_convolution(chi, by, dt, opts);
}

SpectrumLevel polarized_level(const RbmParameters& w0, const GaudinModel& m,
                              double ground_energy) {
    if (std::size_t(w0.n_visible()) != m.n_spins())
        throw InvalidParameterError("polarized_level: parameter/model size mismatch");
    const WeightedConfigs pi = exact_summation_weights(w0);
    const u64 p_bits = ((u64{1} << m.n_spins()) - 1) ^ 1;  // central down, bath up
    double half_sum = 0.0;
    for (double a : m.couplings) half_sum += 0.5 * a;
    SpectrumLevel lvl;
    lvl.delta = 0.5 * (m.B + half_sum) - ground_energy;
    lvl.m_plus_sq = pi.weights[p_bits];  // Born probability of the all-up target
    lvl.source_params = w0.id();
    return lvl;
}

namespace {

// log Psi on the configurations a chain visited, by table when the space is
// small and directly otherwise.
class LogPsiLookup {
  public:
    explicit LogPsiLookup(const RbmParameters& p) : p_(p) {
        const u64 dim = u64{1} << p.n_visible();
        if (dim <= kLogPsiTableMaxDim) table_ = build_log_psi_table(p);
    }
    cplx operator()(u64 bits) {
        if (!table_.values.empty()) return table_.values[bits];
        auto [it, fresh] = cache_.try_emplace(bits);
        if (fresh) it->second = log_psi_bits(p_, bits);
        return it->second;
    }

  private:
    const RbmParameters& p_;
    LogPsiTable table_;
    std::unordered_map<u64, cplx> cache_;
};

struct CrossEstimate {
    cplx mean;
    double stderr;
};

// Mean of [sigma_0 has `need_up`] * exp(L_other(sigma^0) - L_self(sigma))
// over a chain, with the scale shifts applied by the caller inside L_*.
CrossEstimate cross_estimate(const SampleSet& chain, LogPsiLookup& self, LogPsiLookup& other,
                             double c_self, double c_other, bool need_up) {
    std::unordered_map<u64, cplx> lut;
    lut.reserve(256);
    std::vector<cplx> series(chain.sequence.size());
    for (std::size_t i = 0; i < chain.sequence.size(); ++i) {
        const u64 bits = chain.sequence[i];
        auto [it, fresh] = lut.try_emplace(bits);
        if (fresh) {
            if (((bits & 1) != 0) != need_up)
                it->second = 0.0;
            else
                it->second = std::exp((other(bits ^ 1) - c_other) - (self(bits) - c_self));
        }
        series[i] = it->second;
    }
    const MeanEstimate e = estimate_mean(series);
    return {e.mean, e.stderr};
}

}  // namespace

TransitionElements transition_elements(const RbmParameters& w0, const RbmParameters& wj,
                                       std::size_t n_samples, u64 seed,
                                       double rel_stderr_bound) {
    if (w0.n_visible() != wj.n_visible())
        throw InvalidParameterError("transition_elements: parameter-size mismatch");
    LogPsiLookup l0(w0), lj(wj);

    const std::size_t burn = n_samples / 10;
    const SampleSet chain0 = metropolis_chain(w0, n_samples, burn, 1, derive_seed(seed, 0xA0));
    const SampleSet chainj = metropolis_chain(wj, n_samples, burn, 1, derive_seed(seed, 0xA1));

    // Scale shifts cancel in each cross-estimator product.
    const double c0 = l0(chain0.sequence.front()).real();
    const double cj = lj(chainj.sequence.front()).real();

    // <W^j|S_0^+|W^0>/<W^j|W^j> needs sigma_0 up on the pi_j chain, etc.
    const CrossEstimate xp = cross_estimate(chainj, lj, l0, cj, c0, true);
    const CrossEstimate xm = cross_estimate(chainj, lj, l0, cj, c0, false);
    const CrossEstimate ym = cross_estimate(chain0, l0, lj, c0, cj, false);
    const CrossEstimate yp = cross_estimate(chain0, l0, lj, c0, cj, true);

    auto product = [](const CrossEstimate& x, const CrossEstimate& y, double& err) {
        err = std::sqrt(std::norm(y.mean) * x.stderr * x.stderr +
                        std::norm(x.mean) * y.stderr * y.stderr);
        return std::real(x.mean * y.mean);
    };
    TransitionElements t;
    t.m_plus_sq = product(xp, ym, t.m_plus_sq_err);
    t.m_minus_sq = product(xm, yp, t.m_minus_sq_err);
    auto significant_and_noisy = [&](double m, double err) {
        return std::fabs(m) > 4.0 * err && err > rel_stderr_bound * std::fabs(m);
    };
    t.stderr_warning = significant_and_noisy(t.m_plus_sq, t.m_plus_sq_err) ||
                       significant_and_noisy(t.m_minus_sq, t.m_minus_sq_err);
    return t;
}

namespace {

nlohmann::json level_to_json(const SpectrumLevel& l) {
    return {{"delta", l.delta},
            {"m_plus_sq", l.m_plus_sq},
            {"m_minus_sq", l.m_minus_sq},
            {"m_plus_sq_err", l.m_plus_sq_err},
            {"m_minus_sq_err", l.m_minus_sq_err},
            {"occupation", l.occupation},
            {"source_params", l.source_params},
            {"stderr_warning", l.stderr_warning}};
}

SpectrumLevel level_from_json(const nlohmann::json& j) {
    SpectrumLevel l;
    l.delta = j.at("delta").get<double>();
    l.m_plus_sq = j.at("m_plus_sq").get<double>();
    l.m_minus_sq = j.at("m_minus_sq").get<double>();
    l.m_plus_sq_err = j.at("m_plus_sq_err").get<double>();
    l.m_minus_sq_err = j.at("m_minus_sq_err").get<double>();
    l.occupation = j.at("occupation").get<double>();
    l.source_params = j.at("source_params").get<u64>();
    l.stderr_warning = j.at("stderr_warning").get<bool>();
    return l;
}

}  // namespace

void save_bundle(const std::string& path, const SpectrumBundle& bundle) {
    nlohmann::json j;
    j["version"] = 1;
    j["ground_energy"] = bundle.ground_energy;
    j["gamma"] = bundle.gamma;
    j["omega_max"] = bundle.omega_max;
    j["levels"] = nlohmann::json::array();
    for (const SpectrumLevel& l : bundle.levels) j["levels"].push_back(level_to_json(l));
    if (bundle.polarized) j["polarized"] = level_to_json(*bundle.polarized);
    std::ofstream out(path);
    if (!out) throw MissingArtifactError("save_bundle: cannot open " + path);
    out << j.dump(2) << "\n";
}

SpectrumBundle load_bundle(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw MissingArtifactError("load_bundle: cannot open " + path);
    nlohmann::json j;
    in >> j;
    if (j.at("version").get<int>() != 1)
        throw InvalidParameterError("load_bundle: unsupported bundle version");
    SpectrumBundle b;
    b.ground_energy = j.at("ground_energy").get<double>();
    b.gamma = j.at("gamma").get<double>();
    b.omega_max = j.at("omega_max").get<double>();
    for (const auto& l : j.at("levels")) b.levels.push_back(level_from_json(l));
    if (j.contains("polarized")) b.polarized = level_from_json(j.at("polarized"));
    b.validate();
    return b;
}

}  // namespace gaudin
