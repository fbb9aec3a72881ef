// Copyright 2026 The gaudin-nqs Authors
// SPDX-License-Identifier: Apache-2.0

#include "gaudin/optimizer.hpp"

#include <atomic>
#include <cmath>
#include <thread>

namespace gaudin {

namespace {

// Seed-stream keys (see derive_seed): one stream per (level, run, purpose).
enum SeedPurpose : u64 { kInit = 1, kChain = 2, kLowerChain = 3, kPostselect = 4 };

u64 run_key(std::size_t level, std::size_t run) {
    return (u64(level) << 32) | u64(run);
}

u64 purpose_key(SeedPurpose purpose, u64 iteration, u64 extra = 0) {
    return (u64(purpose) << 56) | (extra << 40) | iteration;
}

struct RunOutcome {
    EigenstateEstimate estimate;
    IterationTrace trace;
    bool finite = false;
    std::string failure;
};

RunOutcome single_run(std::size_t level, std::size_t run, const PenaltySpec& pen,
                      const GaudinModel& m, const SrConfig& cfg, std::size_t n_hidden,
                      u64 master_seed) {
    const u64 run_seed = derive_seed(master_seed, run_key(level, run));
    RunOutcome out;
    out.trace.reserve(cfg.iterations);
    out.estimate.run_index = run;
    out.estimate.seed = run_seed;

    RbmParameters params = init_random(m.n_spins(), n_hidden, cfg.init_spread,
                                       derive_seed(run_seed, purpose_key(kInit, 0)));
    const std::size_t burn = cfg.effective_burn_in();
    ChainOptions chain_opts;  // first iteration starts from a random configuration

    try {
        std::vector<WeightedConfigs> lower_wc(pen.size());
        for (std::size_t l = 1; l <= cfg.iterations; ++l) {
            SampleSet own = metropolis_chain(params, cfg.samples_per_iteration, burn, cfg.thin,
                                             derive_seed(run_seed, purpose_key(kChain, l)),
                                             chain_opts);
            chain_opts.start_bits = own.sequence.back();  // carry the chain between iterations
            const WeightedConfigs own_wc = compress(own);
            for (std::size_t j = 0; j < pen.size(); ++j) {
                lower_wc[j] = compress(metropolis_chain(
                    pen.lower_states[j], cfg.samples_per_iteration, burn, cfg.thin,
                    derive_seed(run_seed, purpose_key(kLowerChain, l, j))));
            }

            const Eigen::VectorXcd e = local_energies(params, own_wc, m);
            cplx energy = 0.0;
            for (std::size_t i = 0; i < own_wc.configs.size(); ++i)
                energy += own_wc.weights[i] * e[Eigen::Index(i)];
            const double loss = penalty_loss(params, pen, own_wc, lower_wc, m);
            const Eigen::VectorXcd grad = penalty_gradient(params, pen, own_wc, lower_wc, m);
            const Eigen::MatrixXcd s = geometric_tensor(params, own_wc);

            out.trace.push_back({loss, energy.real(), energy.imag(), grad.norm(),
                                 own.acceptance_rate});
            params = sr_step(params, grad, s, cfg);
        }

        // Postselection re-estimate with more samples.
        const std::size_t n_post = cfg.effective_postselect();
        SampleSet post = metropolis_chain(params, n_post, n_post / 10, cfg.thin,
                                          derive_seed(run_seed, purpose_key(kPostselect, 0)),
                                          chain_opts);
        const MeanEstimate e_post = energy_estimate(params, post, m);
        double loss_post = e_post.mean.real();
        if (pen.size() > 0) {
            std::vector<WeightedConfigs> lower_post(pen.size());
            for (std::size_t j = 0; j < pen.size(); ++j) {
                lower_post[j] = compress(metropolis_chain(
                    pen.lower_states[j], n_post, n_post / 10, cfg.thin,
                    derive_seed(run_seed, purpose_key(kPostselect, 1, j))));
            }
            loss_post = penalty_loss(params, pen, compress(post), lower_post, m);
        }
        out.estimate.params = std::move(params);
        out.estimate.energy = e_post.mean;
        out.estimate.energy_stderr = e_post.stderr;
        out.estimate.loss = loss_post;
        out.finite = std::isfinite(loss_post) && std::isfinite(e_post.mean.real()) &&
                     std::isfinite(e_post.mean.imag());
    } catch (const NumericalError& err) {
        out.finite = false;
        out.failure = err.what();
    }
    return out;
}

}  // namespace

OptimizeResult optimize_eigenstate(std::size_t level, const PenaltySpec& pen,
                                   const GaudinModel& m, const SrConfig& cfg,
                                   std::size_t n_hidden, u64 master_seed) {
    if (pen.size() != level)
        throw InvalidParameterError("optimize_eigenstate: level n requires n lower states");
    if (cfg.runs < 1 || cfg.iterations < 1)
        throw InvalidParameterError("optimize_eigenstate: runs and iterations must be >= 1");

    std::vector<RunOutcome> outcomes(cfg.runs);
    const std::size_t workers = std::max<std::size_t>(1, std::min(cfg.workers, cfg.runs));
    if (workers == 1) {
        for (std::size_t r = 0; r < cfg.runs; ++r)
            outcomes[r] = single_run(level, r, pen, m, cfg, n_hidden, master_seed);
    } else {
        std::atomic<std::size_t> next{0};
        auto work = [&] {
            for (std::size_t r = next.fetch_add(1); r < cfg.runs; r = next.fetch_add(1))
                outcomes[r] = single_run(level, r, pen, m, cfg, n_hidden, master_seed);
        };
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }

    OptimizeResult res;
    std::string failures;
    for (auto& o : outcomes) {
        res.traces.push_back(std::move(o.trace));
        if (o.finite)
            res.all_runs.push_back(o.estimate);
        else if (!o.failure.empty())
            failures += " [run " + std::to_string(o.estimate.run_index) + "] " + o.failure;
    }
    if (res.all_runs.empty())
        throw NumericalError("optimize_eigenstate: all " + std::to_string(cfg.runs) +
                             " runs produced non-finite loss;" + failures);

    const EigenstateEstimate* best = &res.all_runs.front();
    for (const auto& e : res.all_runs) {
        if (e.loss < best->loss ||
            (e.loss == best->loss && e.energy_stderr < best->energy_stderr))
            best = &e;
    }
    res.best = *best;
    return res;
}

}  // namespace gaudin
