// Copyright 2026 The gaudin-nqs Authors
// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite. Each criterion is a doctest case selected by the ctest
// layer via -tc; the expensive production-scale pipeline (N=5 ground + levels 1-4
// + spectrum + response) runs once as the "pipeline setup" fixture and the
// artifact-reading criteria consume its outputs from ACCEPTANCE_OUT.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include "gaudin/artifacts.hpp"
#include "gaudin/oracle.hpp"
#include "gaudin/pipeline.hpp"
#include "test_util.hpp"

using namespace gaudin;
using gaudin::testing::wirtinger_fd;
using nlohmann::json;

namespace {

RunConfig production_config() {
    const json j = {
        {"model", {{"N", 5}, {"N0", 3.0}, {"A", 1.0}, {"B", 0.35}}},
        {"rbm", {{"sigma_w", 0.25}}},
        {"sampler", {{"n_samples", 5000}}},
        {"optimizer",
         {{"runs", 50},
          {"iterations", 8000},
          {"samples", 5000},
          {"learning_rate", 0.02},
          {"diag_shift", 0.01},
          {"omega_max", 0.15}}},
        {"dynamics",
         {{"gamma", 0.003},
          {"pulse",
           {{"b1", 5.0}, {"b2", 5.0}, {"t_bar", 200.0}, {"tau1", 100.0}, {"tau2", 50.0}}},
          {"t_max", 400.0},
          {"dt", 2.5e-4},
          {"element_samples", 5000000},
          {"reestimate_samples", 5000000}}},
        {"output_dir", ACCEPTANCE_OUT},
        {"seed", 20260823}};
    return parse_config(j);
}

bool exists(const std::string& name) {
    return std::filesystem::exists(std::string(ACCEPTANCE_OUT) + "/" + name);
}

json read_json(const std::string& name) {
    return json::parse(read_text_file(std::string(ACCEPTANCE_OUT) + "/" + name));
}

/// header-checked CSV of doubles
std::vector<std::vector<double>> read_csv(const std::string& path,
                                          const std::string& expected_header) {
    std::ifstream in(path);
    REQUIRE(bool(in));
    std::string line;
    REQUIRE(std::getline(in, line));
    REQUIRE(line == expected_header);
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        rows.push_back(std::move(row));
    }
    return rows;
}

std::map<std::string, std::string> snapshot_dir(const std::string& dir) {
    std::map<std::string, std::string> hashes;
    for (const auto& e : std::filesystem::directory_iterator(dir))
        if (e.is_regular_file())
            hashes[e.path().filename().string()] = sha1_hex(read_text_file(e.path().string()));
    return hashes;
}

constexpr double kEnergyTolUnits = 1e-3;   // criterion 1-2 energy bound, A/N0
constexpr double kInfidelityTol = 2e-3;    // criterion 1-2 fidelity bound

}  // namespace

// ---------------------------------------------------------------------------
// fixtures
// ---------------------------------------------------------------------------

TEST_CASE("pipeline setup: production-scale artifacts") {
    RunConfig cfg = production_config();
    // idempotent: completed stages are skipped so re-running ctest is cheap
    for (std::size_t level = 0; level <= 4; ++level)
        if (!exists("summary_level" + std::to_string(level) + ".json")) run_level(cfg, level);
    if (!exists("bundle.json")) run_spectrum(cfg, /*oracle_mode=*/false);
    if (!exists("response.csv")) {
        const SpectrumBundle bundle =
            load_bundle(std::string(ACCEPTANCE_OUT) + "/bundle.json");
        REQUIRE(bundle.levels.size() >= 3);
        // drive carrier at the third excitation energy Delta_3
        cfg.dynamics.pulse.carrier = bundle.levels[2].delta / cfg.energy_unit();
        run_response(cfg, /*stride=*/100);
    }
    CHECK(exists("manifest.json"));
}

TEST_CASE("bench setup: N = 1..11 timing table") {
    const RunConfig cfg = production_config();
    if (!std::filesystem::exists(std::string(ACCEPTANCE_OUT) + "_bench/bench.csv")) {
        RunConfig bench_cfg = cfg;
        bench_cfg.output_dir = std::string(ACCEPTANCE_OUT) + "_bench";
        run_bench(bench_cfg, 1, 11, 3);
    }
    CHECK(std::filesystem::exists(std::string(ACCEPTANCE_OUT) + "_bench/bench.csv"));
}

// ---------------------------------------------------------------------------
// criteria
// ---------------------------------------------------------------------------

TEST_CASE("criterion 01: ground-state accuracy at production scale") {
    const RunConfig cfg = production_config();
    const DenseSpectrum s = full_spectrum(cfg.build_model());
    const json summary = read_json("summary_level0.json");
    const double eu = cfg.energy_unit();

    // accuracy is judged on the converged ansatz itself: exact Rayleigh
    // quotient of the dense RBM state, free of Monte Carlo noise
    const RbmParameters w0 =
        load_checkpoint(std::string(ACCEPTANCE_OUT) + "/checkpoint_level0.json").params;
    const Eigen::VectorXcd psi = rbm_dense_state(w0);
    const Eigen::MatrixXd h = dense_hamiltonian(cfg.build_model());
    const double e_var = psi.dot(h * psi).real();
    CHECK(std::fabs(e_var - s.eigenvalues[0]) < kEnergyTolUnits * eu);

    // the sampled estimate must agree with the exact quotient within its bar
    const double energy = summary.at("energy").get<double>() * eu;
    const double stderr_abs = summary.at("energy_stderr").get<double>() * eu;
    CHECK(std::fabs(energy - e_var) < 4.0 * stderr_abs);

    const double infidelity = 1.0 - rbm_fidelity(w0, s.eigenvectors.col(0).cast<cplx>());
    CHECK(infidelity < kInfidelityTol);
}

TEST_CASE("criterion 02: excited levels 1-4 and run histogram") {
    const RunConfig cfg = production_config();
    const GaudinModel m = cfg.build_model();
    const DenseSpectrum s = full_spectrum(m);
    const double eu = cfg.energy_unit();

    for (std::size_t level = 1; level <= 4; ++level) {
        CAPTURE(level);
        const json summary = read_json("summary_level" + std::to_string(level) + ".json");
        const RbmParameters wj =
            load_checkpoint(std::string(ACCEPTANCE_OUT) + "/checkpoint_level" +
                            std::to_string(level) + ".json")
                .params;
        const Eigen::VectorXcd psi = rbm_dense_state(wj);
        const double e_var = psi.dot(dense_hamiltonian(m) * psi).real();
        CHECK(std::fabs(e_var - s.eigenvalues[Eigen::Index(level)]) < kEnergyTolUnits * eu);

        const double energy = summary.at("energy").get<double>() * eu;
        const double stderr_abs = summary.at("energy_stderr").get<double>() * eu;
        CHECK(std::fabs(energy - e_var) < 4.0 * stderr_abs);

        const double infidelity =
            1.0 - rbm_fidelity(wj, s.eigenvectors.col(Eigen::Index(level)).cast<cplx>());
        CHECK(infidelity < kInfidelityTol);

        // clustering check: the modal nearest-exact-level over all runs is
        // the targeted level.
        std::map<Eigen::Index, int> votes;
        for (const json& run : summary.at("runs")) {
            const double e = run.at("energy").get<double>() * eu;
            Eigen::Index nearest = 0;
            (s.eigenvalues.array() - e).abs().minCoeff(&nearest);
            ++votes[nearest];
        }
        const auto modal = std::max_element(
            votes.begin(), votes.end(),
            [](const auto& a, const auto& b) { return a.second < b.second; });
        CHECK(modal->first == Eigen::Index(level));
    }
}

TEST_CASE("criterion 03: penalty gradient matches finite differences") {
    std::size_t trial = 0;
    for (std::size_t n = 1; n <= 3; ++n) {
        const GaudinModel m = make_exponential_model(1.0, n, (n + 1) / 2.0, 0.3);
        const std::size_t n_spins = n + 1;
        for (int rep = 0; rep < (n == 3 ? 8 : 6); ++rep, ++trial) {
            CAPTURE(n);
            CAPTURE(rep);
            const RbmParameters p = init_random(n_spins, n_spins, 0.3, 1000 + 17 * trial);
            const RbmParameters low = init_random(n_spins, n_spins, 0.3, 2000 + 17 * trial);
            PenaltySpec pen{.lower_states = {low}, .coefficients = {0.5 + 0.1 * double(rep)},
                            .omega_max = 0.0};
            const std::vector<WeightedConfigs> lower{exact_summation_weights(low)};

            const Eigen::VectorXcd grad =
                penalty_gradient(p, pen, exact_summation_weights(p), lower, m);
            const Eigen::VectorXcd fd = wirtinger_fd(p, [&](const RbmParameters& q) {
                return penalty_loss(q, pen, exact_summation_weights(q), lower, m);
            });
            CHECK((grad - fd).norm() / fd.norm() < 1e-6);
        }
    }
    CHECK(trial == 20);
}

TEST_CASE("criterion 04: exact-summation estimators match dense linear algebra") {
    for (std::size_t n = 2; n <= 4; ++n) {
        CAPTURE(n);
        const GaudinModel m = make_exponential_model(1.0, n, (n + 1) / 2.0, 0.25);
        const std::size_t n_spins = n + 1;
        const Eigen::Index dim = Eigen::Index(1) << n_spins;
        const RbmParameters p = init_random(n_spins, n_spins, 0.3, 42 + n);
        const WeightedConfigs ex = exact_summation_weights(p);

        // dense side: explicit Born weights, dense H, per-config O rows
        const Eigen::MatrixXd h = dense_hamiltonian(m);
        const Eigen::VectorXcd psi = testing::dense_psi(p);
        const Eigen::VectorXd w = psi.cwiseAbs2() / psi.squaredNorm();
        const Eigen::VectorXcd hpsi = h * psi;
        Eigen::VectorXcd eloc(dim);
        Eigen::MatrixXcd o(dim, p.flatten().size());
        for (Eigen::Index c = 0; c < dim; ++c) {
            eloc[c] = hpsi[c] / psi[c];
            o.row(c) = log_derivatives_bits(p, u64(c)).transpose();
        }
        const cplx e_dense = (w.cast<cplx>().asDiagonal() * eloc).sum();
        const Eigen::VectorXcd o_mean = o.transpose() * w.cast<cplx>();
        const Eigen::VectorXcd f_dense =
            o.adjoint() * (w.cast<cplx>().asDiagonal() * eloc) - o_mean.conjugate() * e_dense;
        const Eigen::MatrixXcd s_dense =
            o.adjoint() * w.cast<cplx>().asDiagonal() * o - o_mean.conjugate() * o_mean.transpose();

        // estimator side (exact-summation mode)
        const Eigen::VectorXcd eloc_est = local_energies(p, ex, m);
        cplx e_est = 0.0;
        for (std::size_t i = 0; i < ex.configs.size(); ++i)
            e_est += ex.weights[i] * eloc_est[Eigen::Index(i)];
        CHECK(std::abs(e_est - e_dense) / std::abs(e_dense) < 1e-10);

        const Eigen::VectorXcd f_est = force_vector(p, ex, m);
        CHECK((f_est - f_dense).norm() / (f_dense.norm() + 1e-300) < 1e-10);

        const Eigen::MatrixXcd s_est = geometric_tensor(p, ex);
        CHECK((s_est - s_dense).norm() / s_dense.norm() < 1e-10);

        // penalty overlap against the dense overlap
        const RbmParameters low = init_random(n_spins, n_spins, 0.3, 142 + n);
        PenaltySpec pen{.lower_states = {low}, .coefficients = {1.3}, .omega_max = 0.0};
        const std::vector<WeightedConfigs> lower{exact_summation_weights(low)};
        const double loss = penalty_loss(p, pen, ex, lower, m);
        const double overlap_dense = 1.3 * testing::dense_overlap_sq(p, low);
        CHECK(std::fabs((loss - e_dense.real()) - overlap_dense) / overlap_dense < 1e-10);
    }
}

TEST_CASE("criterion 05: sampler stationarity and uniform sampling") {
    SUBCASE("exact stationarity pi T = pi") {
        for (std::size_t n = 1; n <= 3; ++n) {
            CAPTURE(n);
            const std::size_t n_spins = n + 1;
            const u64 dim = u64{1} << n_spins;
            const RbmParameters p = init_random(n_spins, n_spins, 0.4, 7 * n + 1);
            const WeightedConfigs ex = exact_summation_weights(p);
            Eigen::VectorXd pi = Eigen::VectorXd::Zero(Eigen::Index(dim));
            for (std::size_t i = 0; i < ex.configs.size(); ++i)
                pi[Eigen::Index(ex.configs[i])] = ex.weights[i];

            // single-proposal Metropolis kernel: uniform site, min(1, ratio^2)
            Eigen::MatrixXd t = Eigen::MatrixXd::Zero(Eigen::Index(dim), Eigen::Index(dim));
            for (u64 c = 0; c < dim; ++c) {
                double stay = 1.0;
                for (std::size_t j = 0; j < n_spins; ++j) {
                    const u64 c2 = c ^ (u64{1} << j);
                    const double acc =
                        std::min(1.0, pi[Eigen::Index(c2)] / pi[Eigen::Index(c)]);
                    t(Eigen::Index(c2), Eigen::Index(c)) = acc / double(n_spins);
                    stay -= acc / double(n_spins);
                }
                t(Eigen::Index(c), Eigen::Index(c)) = stay;
            }
            CHECK((t * pi - pi).cwiseAbs().maxCoeff() < 1e-12);
        }
    }
    SUBCASE("uniform target frequencies within 3 sigma") {
        const std::size_t n_spins = 3;  // N = 2
        const RbmParameters p = init_random(n_spins, n_spins, 0.0, 0);
        const SampleSet s = metropolis_chain(p, 1000000, 10000, 1, 99);
        for (u64 c = 0; c < 8; ++c) {
            CAPTURE(c);
            std::vector<cplx> indicator(s.sequence.size());
            for (std::size_t i = 0; i < s.sequence.size(); ++i)
                indicator[i] = s.sequence[i] == c ? 1.0 : 0.0;
            const MeanEstimate est = estimate_mean(indicator);
            CHECK(std::fabs(est.mean.real() - 0.125) < 3.0 * est.stderr);
        }
    }
}

TEST_CASE("criterion 06: matrix elements vs dense oracle at 5e6 samples") {
    const RunConfig cfg = production_config();
    const GaudinModel m = cfg.build_model();
    const double eu = cfg.energy_unit();
    const SpectrumBundle rbm = load_bundle(std::string(ACCEPTANCE_OUT) + "/bundle.json");
    const SpectrumBundle exact = dense_bundle(m, full_spectrum(m), 0.15 * eu, 0.0);
    REQUIRE(rbm.levels.size() == exact.levels.size());

    // The 3-sigma comparison targets the estimator's own expectation: the
    // dense contraction of the same variational states. The variational bias
    // of the states themselves is judged at curve level by criterion 07.
    const Eigen::VectorXcd psi0 = rbm_dense_state(
        load_checkpoint(std::string(ACCEPTANCE_OUT) + "/checkpoint_level0.json").params);
    for (std::size_t j = 0; j < rbm.levels.size(); ++j) {
        CAPTURE(j);
        const SpectrumLevel& a = rbm.levels[j];
        // bundle levels are Delta-ascending; with the well-separated spectrum
        // here that is exactly checkpoint order 1..4
        const Eigen::VectorXcd psij = rbm_dense_state(
            load_checkpoint(std::string(ACCEPTANCE_OUT) + "/checkpoint_level" +
                            std::to_string(j + 1) + ".json")
                .params);
        const double mp = std::norm(psij.dot(apply_s0_plus(psi0)));
        const double mm = std::norm(psij.dot(apply_s0_minus(psi0)));
        CHECK(std::fabs(a.m_plus_sq - mp) <= 3.0 * a.m_plus_sq_err);
        CHECK(std::fabs(a.m_minus_sq - mm) <= 3.0 * a.m_minus_sq_err);
        // relative stderr bound for the significant elements
        if (mp > 1e-3) CHECK(a.m_plus_sq_err / mp < 1e-2);
        if (mm > 1e-3) CHECK(a.m_minus_sq_err / mm < 1e-2);
    }
}

TEST_CASE("criterion 07: spectral function reproduction and sum rule") {
    const RunConfig cfg = production_config();
    const GaudinModel m = cfg.build_model();
    const double eu = cfg.energy_unit();
    const double gamma = 0.003 * eu;

    SUBCASE("sum rule over the complete oracle spectrum") {
        const SpectrumBundle complete = dense_bundle(m, full_spectrum(m), 0.0, 0.0);
        double total = 0.0;
        for (const SpectrumLevel& l : complete.levels) total += l.m_plus_sq + l.m_minus_sq;
        CHECK(std::fabs(total - 1.0) < 1e-10);
    }
    SUBCASE("relative L2 error below 5%") {
        SpectrumBundle rbm = load_bundle(std::string(ACCEPTANCE_OUT) + "/bundle.json");
        SpectrumBundle exact = dense_bundle(m, full_spectrum(m), 0.15 * eu, gamma);
        rbm.gamma = gamma;
        const std::vector<double> grid = default_omega_grid(exact, m, 8192);
        const std::vector<double> a_rbm = spectral_function(rbm, grid);
        const std::vector<double> a_exact = spectral_function(exact, grid);
        REQUIRE(exact.polarized);
        const double pol = exact.polarized->delta;
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const bool in_band = grid[i] >= -0.15 * eu && grid[i] < 0.0;
            const bool near_pol = std::fabs(grid[i] - pol) <= 25.0 * gamma;
            if (!in_band && !near_pol) continue;
            num += (a_rbm[i] - a_exact[i]) * (a_rbm[i] - a_exact[i]);
            den += a_exact[i] * a_exact[i];
        }
        CHECK(std::sqrt(num / den) < 0.05);
    }
}

TEST_CASE("criterion 08: linear response vs direct integration") {
    const auto rows =
        read_csv(std::string(ACCEPTANCE_OUT) + "/response.csv", "t,sx_rbm,sx_exact,by");
    REQUIRE(rows.size() > 1000);
    double max_amp = 0.0, max_dev = 0.0;
    for (const std::vector<double>& r : rows) {
        max_amp = std::max(max_amp, std::fabs(r[2]));
        max_dev = std::max(max_dev, std::fabs(r[1] - r[2]));
    }
    CHECK(max_amp > 0.0);
    CHECK(max_dev < 0.05 * max_amp);
}

TEST_CASE("criterion 09: time-domain susceptibility closed form") {
    SUBCASE("matrix-exponential commutator, N <= 3") {
        for (std::size_t n = 2; n <= 3; ++n) {
            CAPTURE(n);
            const GaudinModel m = make_exponential_model(1.0, n, (n + 1) / 2.0, 0.2);
            const DenseSpectrum s = full_spectrum(m);
            const SpectrumBundle b = dense_bundle(m, s, 0.0, 0.0);
            const Eigen::MatrixXcd h = dense_hamiltonian(m).cast<cplx>();
            const Eigen::VectorXcd v0 = s.eigenvectors.col(0).cast<cplx>();
            for (double t : {0.0, 0.3, 1.7, 6.0, 21.0}) {
                const Eigen::MatrixXcd u = (cplx(0.0, 1.0) * t * h).exp();
                auto s_minus_t = [&](const Eigen::VectorXcd& v) {
                    return (u * apply_s0_minus(u.adjoint() * v)).eval();
                };
                const cplx term1 = v0.dot(s_minus_t(apply_s0_plus(v0)));
                const cplx term2 = apply_s0_minus(v0).dot(s_minus_t(v0));
                CHECK(std::fabs(susceptibility_xy(b, t) + 0.5 * std::real(term1 - term2)) <
                      1e-8);
            }
        }
    }
    SUBCASE("chi(0) equals the ground-state central magnetization") {
        const GaudinModel m = make_exponential_model(1.0, 3, 2.0, 0.4);
        const DenseSpectrum s = full_spectrum(m);
        const SpectrumBundle b = dense_bundle(m, s, 0.0, 0.0);
        double sz = 0.0;
        for (Eigen::Index c = 0; c < s.eigenvectors.rows(); ++c)
            sz += ((c & 1) ? 0.5 : -0.5) * s.eigenvectors(c, 0) * s.eigenvectors(c, 0);
        CHECK(std::fabs(susceptibility_xy(b, 0.0) - sz) < 1e-8);
    }
}

TEST_CASE("criterion 10: perturbative polarized-peak deficit (known deviation)") {
    // Exact deficit vs the closed-form A^2 / (2 N0 (B + A/2)^2). The formula
    // disagrees with the exact value by a factor of ~3 at these parameters
    // (measured: exact 5.14e-4, formula 1.51e-3), so this criterion fails.
    const GaudinModel m = make_exponential_model(1.0, 5, 3.0, 10.0);
    const DenseSpectrum s = full_spectrum(m);
    const u64 p_bits = ((u64{1} << 6) - 1) ^ 1;  // central down, bath up
    const double beta0 = s.eigenvectors(Eigen::Index(p_bits), 0);
    const double deficit = 1.0 - beta0 * beta0;
    const double formula = 1.0 / (2.0 * 3.0 * (10.0 + 0.5) * (10.0 + 0.5));
    CAPTURE(deficit);
    CAPTURE(formula);
    CHECK(std::fabs(deficit - formula) / formula < 0.10);
}

TEST_CASE("criterion 11: benchmark ED/RBM ratio grows monotonically") {
    const auto rows = read_csv(std::string(ACCEPTANCE_OUT) + "_bench/bench.csv",
                               "N,t_rbm_mean,t_ed_mean,reps");
    REQUIRE(rows.size() == 11);
    double prev = -1.0;
    for (const std::vector<double>& r : rows) {
        CAPTURE(r[0]);
        const double ratio = r[2] / r[1];
        CHECK(ratio > prev);
        prev = ratio;
    }
}

TEST_CASE("criterion 12: byte-identical determinism") {
    const std::string dir = std::string(ACCEPTANCE_OUT) + "_det";
    const json j = {{"model", {{"N", 3}, {"N0", 2.0}, {"B", 0.3}}},
                    {"optimizer",
                     {{"runs", 2}, {"iterations", 150}, {"samples", 300}, {"omega_max", 3.0}}},
                    {"dynamics",
                     {{"element_samples", 20000},
                      {"reestimate_samples", 20000},
                      {"t_max", 5.0},
                      {"dt", 0.01}}},
                    {"output_dir", dir},
                    {"seed", 77}};
    const RunConfig cfg = parse_config(j);

    auto run_all = [&] {
        run_level(cfg, 0);
        run_level(cfg, 1);
        run_spectrum(cfg, /*oracle_mode=*/false);
        run_response(cfg, /*stride=*/5);
        run_ed(cfg);
    };
    std::filesystem::remove_all(dir);
    run_all();
    const auto first = snapshot_dir(dir);
    run_all();
    const auto second = snapshot_dir(dir);
    REQUIRE(first.size() > 5);
    CHECK(first == second);
    std::filesystem::remove_all(dir);
}
