// Copyright 2026 The gaudin-nqs Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gaudin/optimizer.hpp"
#include "test_util.hpp"

using namespace gaudin;

namespace {

const GaudinModel kTwoSpin{.B = 0.0, .couplings = {1.0}};

double exact_penalty_loss(const RbmParameters& p, const PenaltySpec& pen,
                          const GaudinModel& m, const Eigen::MatrixXd& h) {
    double loss = testing::rayleigh_quotient(p, h);
    for (std::size_t j = 0; j < pen.size(); ++j)
        loss += pen.coefficients[j] * testing::dense_overlap_sq(p, pen.lower_states[j]);
    return loss;
}

}  // namespace

TEST_CASE("local_energy: closed forms") {
    SUBCASE("uniform state is the triplet eigenstate of the two-spin model") {
        const RbmParameters z = init_random(2, 2, 0.0, 1);
        for (u64 bits = 0; bits < 4; ++bits) {
            const cplx e = local_energy(z, SpinConfiguration::from_bits(bits, 2), kTwoSpin);
            CHECK(std::abs(e - cplx(0.25)) < 1e-12);
        }
    }
    SUBCASE("fully polarized basis state has diagonal-only local energy") {
        const GaudinModel m{.B = 0.8, .couplings = {0.9, 0.4}};
        const RbmParameters p = testing::basis_state_params(0b111, 3, 3);
        const cplx e = local_energy(p, SpinConfiguration::from_bits(0b111, 3), m);
        CHECK(std::abs(e - cplx(0.8 / 2.0 + (0.9 + 0.4) / 4.0)) < 1e-12);
    }
    SUBCASE("exact-summation mean equals the dense Rayleigh quotient") {
        const GaudinModel m = make_exponential_model(1.0, 3, 2.0, 0.5);
        const Eigen::MatrixXd h = testing::kron_hamiltonian(m);
        for (u64 seed : {4u, 5u}) {
            const RbmParameters p = init_random(m.n_spins(), m.n_spins(), 0.25, seed);
            const WeightedConfigs w = exact_summation_weights(p);
            const Eigen::VectorXcd e = local_energies(p, w, m);
            cplx mean = 0.0;
            for (std::size_t c = 0; c < w.configs.size(); ++c)
                mean += w.weights[c] * e[Eigen::Index(c)];
            const double exact = testing::rayleigh_quotient(p, h);
            CHECK(std::abs(mean - cplx(exact)) / std::fabs(exact) < 1e-10);
        }
    }
}

TEST_CASE("force_vector") {
    SUBCASE("zero Hamiltonian gives a zero force") {
        const GaudinModel zero_h{.B = 0.0, .couplings = {0.0}};
        const RbmParameters p = init_random(2, 2, 0.25, 3);
        const Eigen::VectorXcd f = force_vector(p, exact_summation_weights(p), zero_h);
        CHECK(f.norm() < 1e-14);
    }
    SUBCASE("zero-variance principle at a basis-state eigenstate") {
        const GaudinModel m{.B = 1.0, .couplings = {0.7, 0.3}};
        const RbmParameters p = testing::basis_state_params(0b111, 3, 3);
        const Eigen::VectorXcd f = force_vector(p, exact_summation_weights(p), m);
        CHECK(f.norm() < 1e-8);
    }
    SUBCASE("matches the Wirtinger finite-difference gradient of the Rayleigh quotient") {
        const Eigen::MatrixXd h = testing::kron_hamiltonian(kTwoSpin);
        for (u64 seed : {11u, 12u, 13u}) {
            const RbmParameters p = init_random(2, 3, 0.25, seed);
            const Eigen::VectorXcd f = force_vector(p, exact_summation_weights(p), kTwoSpin);
            const Eigen::VectorXcd fd = testing::wirtinger_fd(
                p, [&](const RbmParameters& q) { return testing::rayleigh_quotient(q, h); });
            CHECK((f - fd).cwiseAbs().maxCoeff() < 1e-6);
        }
    }
    SUBCASE("provenance mismatch is rejected") {
        const RbmParameters p = init_random(2, 2, 0.25, 1);
        const RbmParameters q = init_random(2, 2, 0.25, 2);
        CHECK_THROWS_AS(force_vector(p, exact_summation_weights(q), kTwoSpin),
                        ProvenanceError);
    }
}

TEST_CASE("geometric_tensor") {
    SUBCASE("Hermitian positive semi-definite") {
        const RbmParameters p = init_random(3, 3, 0.25, 8);
        const Eigen::MatrixXcd s = geometric_tensor(p, exact_summation_weights(p));
        CHECK((s - s.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(s);
        CHECK(es.eigenvalues().minCoeff() > -1e-12);
    }
    SUBCASE("all-zero parameters: unit a-block variance, vanishing b/w blocks") {
        const RbmParameters z = init_random(2, 2, 0.0, 1);
        const Eigen::MatrixXcd s = geometric_tensor(z, exact_summation_weights(z));
        for (Eigen::Index i = 0; i < s.rows(); ++i) {
            for (Eigen::Index k = 0; k < s.cols(); ++k) {
                const double expect = (i == k && i < 2) ? 1.0 : 0.0;
                CHECK(std::abs(s(i, k) - cplx(expect)) < 1e-12);
            }
        }
    }
    SUBCASE("single repeated sample gives S = 0") {
        const RbmParameters p = init_random(2, 2, 0.25, 4);
        SampleSet one;
        one.n_spins = 2;
        one.sequence = std::vector<u64>(50, 2);
        one.source_params = p.id();
        CHECK(geometric_tensor(p, one).cwiseAbs().maxCoeff() < 1e-14);
    }
}

TEST_CASE("sr_step") {
    const RbmParameters p = init_random(2, 2, 0.25, 6);
    const Eigen::Index np = p.n_params();
    SrConfig cfg;
    cfg.learning_rate = 0.02;
    cfg.diag_shift = 0.01;
    SUBCASE("zero force leaves parameters unchanged") {
        const Eigen::MatrixXcd s = Eigen::MatrixXcd::Identity(np, np);
        const RbmParameters q = sr_step(p, Eigen::VectorXcd::Zero(np), s, cfg);
        CHECK((q.flatten() - p.flatten()).norm() == 0.0);
    }
    SUBCASE("zero tensor reduces to a plain scaled gradient step") {
        const Eigen::VectorXcd f = init_random(2, 2, 0.3, 7).flatten();
        const RbmParameters q = sr_step(p, f, Eigen::MatrixXcd::Zero(np, np), cfg);
        CHECK((q.flatten() - (p.flatten() - 2.0 * f)).norm() < 1e-12);
    }
    SUBCASE("solver residual is small on random instances") {
        const RbmParameters pr = init_random(3, 3, 0.25, 10);
        const Eigen::MatrixXcd s = geometric_tensor(pr, exact_summation_weights(pr));
        const GaudinModel m = make_exponential_model(1.0, 3, 2.0, 0.4);
        const Eigen::VectorXcd f = force_vector(pr, exact_summation_weights(pr), m);
        const RbmParameters q = sr_step(pr, f, s, cfg);
        const Eigen::VectorXcd x = (pr.flatten() - q.flatten()) / cfg.learning_rate;
        const Eigen::MatrixXcd reg =
            s + cfg.diag_shift * Eigen::MatrixXcd::Identity(s.rows(), s.cols());
        CHECK((reg * x - f).norm() / f.norm() < 1e-8);
    }
    SUBCASE("singular unregularized system is a numerical error") {
        SrConfig bare = cfg;
        bare.diag_shift = 0.0;
        const Eigen::VectorXcd f = Eigen::VectorXcd::Ones(np);
        CHECK_THROWS_AS(sr_step(p, f, Eigen::MatrixXcd::Zero(np, np), bare), NumericalError);
    }
}

TEST_CASE("penalty_loss") {
    const Eigen::MatrixXd h = testing::kron_hamiltonian(kTwoSpin);
    SUBCASE("self-overlap gives exactly beta") {
        const RbmParameters p = init_random(2, 3, 0.25, 20);
        PenaltySpec pen{.lower_states = {p}, .coefficients = {0.3}, .omega_max = 0.15};
        const WeightedConfigs w = exact_summation_weights(p);
        const std::vector<WeightedConfigs> lower = {w};
        const double loss = penalty_loss(p, pen, w, lower, kTwoSpin);
        CHECK(loss == doctest::Approx(testing::rayleigh_quotient(p, h) + 0.3).epsilon(1e-12));
    }
    SUBCASE("orthogonal basis states have zero penalty") {
        const RbmParameters p = testing::basis_state_params(0b01, 2, 2);
        const RbmParameters q = testing::basis_state_params(0b10, 2, 2);
        PenaltySpec pen{.lower_states = {q}, .coefficients = {5.0}, .omega_max = 0.15};
        const std::vector<WeightedConfigs> lower = {exact_summation_weights(q)};
        const double loss = penalty_loss(p, pen, exact_summation_weights(p), lower, kTwoSpin);
        const double energy = testing::rayleigh_quotient(p, h);
        CHECK(std::fabs(loss - energy) < 1e-8);
    }
    SUBCASE("random pair matches the dense-overlap oracle") {
        for (u64 seed : {30u, 31u}) {
            const RbmParameters p = init_random(2, 3, 0.25, seed);
            const RbmParameters q = init_random(2, 3, 0.25, seed + 50);
            PenaltySpec pen{.lower_states = {q}, .coefficients = {0.7}, .omega_max = 0.15};
            const std::vector<WeightedConfigs> lower = {exact_summation_weights(q)};
            const double loss =
                penalty_loss(p, pen, exact_summation_weights(p), lower, kTwoSpin);
            const double expect = testing::rayleigh_quotient(p, h) +
                                  0.7 * testing::dense_overlap_sq(p, q);
            CHECK(std::fabs(loss - expect) / std::fabs(expect) < 1e-10);
        }
    }
}

TEST_CASE("penalty_gradient") {
    SUBCASE("beta = 0 reduces to the plain force") {
        const RbmParameters p = init_random(2, 3, 0.25, 40);
        const RbmParameters q = init_random(2, 3, 0.25, 41);
        PenaltySpec pen{.lower_states = {q}, .coefficients = {0.0}, .omega_max = 0.15};
        const WeightedConfigs w = exact_summation_weights(p);
        const std::vector<WeightedConfigs> lower = {exact_summation_weights(q)};
        const Eigen::VectorXcd g = penalty_gradient(p, pen, w, lower, kTwoSpin);
        const Eigen::VectorXcd f = force_vector(p, w, kTwoSpin);
        CHECK((g - f).cwiseAbs().maxCoeff() < 1e-14);
    }
    SUBCASE("matches Wirtinger finite differences of the exactly-summed loss") {
        const Eigen::MatrixXd h = testing::kron_hamiltonian(kTwoSpin);
        for (u64 seed : {42u, 43u, 44u}) {
            const RbmParameters p = init_random(2, 3, 0.25, seed);
            const RbmParameters q = init_random(2, 3, 0.25, seed + 100);
            PenaltySpec pen{.lower_states = {q}, .coefficients = {0.5}, .omega_max = 0.15};
            const std::vector<WeightedConfigs> lower = {exact_summation_weights(q)};
            const Eigen::VectorXcd g =
                penalty_gradient(p, pen, exact_summation_weights(p), lower, kTwoSpin);
            const Eigen::VectorXcd fd = testing::wirtinger_fd(
                p, [&](const RbmParameters& r) {
                    return exact_penalty_loss(r, pen, kTwoSpin, h);
                });
            CHECK((g - fd).cwiseAbs().maxCoeff() < 1e-6);
        }
    }
    SUBCASE("orthogonal lower state contributes nothing") {
        const RbmParameters p = testing::basis_state_params(0b01, 2, 2);
        const RbmParameters q = testing::basis_state_params(0b10, 2, 2);
        PenaltySpec pen{.lower_states = {q}, .coefficients = {3.0}, .omega_max = 0.15};
        const WeightedConfigs w = exact_summation_weights(p);
        const std::vector<WeightedConfigs> lower = {exact_summation_weights(q)};
        const Eigen::VectorXcd g = penalty_gradient(p, pen, w, lower, kTwoSpin);
        const Eigen::VectorXcd f = force_vector(p, w, kTwoSpin);
        CHECK((g - f).cwiseAbs().maxCoeff() < 1e-8);
    }
}
