// Copyright 2026 The gaudin-nqs Authors
// SPDX-License-Identifier: Apache-2.0

#include "gaudin/config.hpp"

#include <fstream>

namespace gaudin {

namespace {

using nlohmann::json;

[[noreturn]] void missing(const std::string& key) {
    throw InvalidParameterError("missing config key: " + key);
}

const json& section(const json& j, const char* name, bool required = false) {
    static const json empty = json::object();
    auto it = j.find(name);
    if (it == j.end()) {
        if (required) missing(name);
        return empty;
    }
    if (!it->is_object())
        throw InvalidParameterError(std::string("config section is not an object: ") + name);
    return *it;
}

template <typename T>
T require(const json& sec, const std::string& prefix, const char* key) {
    auto it = sec.find(key);
    if (it == sec.end()) missing(prefix + "." + key);
    return it->get<T>();
}

template <typename T>
void maybe(const json& sec, const char* key, T& out) {
    auto it = sec.find(key);
    if (it != sec.end()) out = it->get<T>();
}

}  // namespace

static GaudinModel model_from(const ModelConfig& mc) {
    const double unit = mc.a / mc.n0;
    if (mc.couplings) {
        GaudinModel m{.B = mc.b * unit, .couplings = *mc.couplings, .A = mc.a, .N0 = mc.n0};
        if (m.couplings.size() != mc.n)
            throw InvalidParameterError("model.couplings length does not match model.N");
        return m;
    }
    return make_exponential_model(mc.a, mc.n, mc.n0, mc.b * unit);
}

GaudinModel RunConfig::build_model() const { return model_from(model); }

SrConfig RunConfig::sr_config() const {
    SrConfig cfg;
    cfg.learning_rate = optimizer.learning_rate;
    cfg.diag_shift = optimizer.diag_shift;
    cfg.iterations = optimizer.iterations;
    cfg.samples_per_iteration = optimizer.samples;
    cfg.runs = optimizer.runs;
    cfg.postselect_samples = optimizer.postselect_samples;
    cfg.init_spread = rbm.sigma_w;
    cfg.burn_in = sampler.burn_in;
    cfg.thin = sampler.thin;
    cfg.workers = optimizer.workers;
    return cfg;
}

std::vector<double> RunConfig::beta_absolute(std::size_t level) const {
    std::vector<double> beta = optimizer.beta;
    if (beta.empty()) beta.assign(level, 2.0 * optimizer.omega_max);
    if (beta.size() != level)
        throw InvalidParameterError("optimizer.beta length does not match the level");
    for (double& b : beta) b *= energy_unit();
    return beta;
}

DrivePulse RunConfig::pulse_absolute() const {
    const double eu = energy_unit();
    DrivePulse p = dynamics.pulse;
    p.b1 *= eu;
    p.b2 *= eu;
    p.t_bar /= eu;
    p.tau1 /= eu;
    p.tau2 /= eu;
    p.carrier *= eu;
    return p;
}

RunConfig parse_config(const nlohmann::json& j) {
    RunConfig cfg;

    const json& jm = section(j, "model", /*required=*/true);
    cfg.model.n = require<std::size_t>(jm, "model", "N");
    cfg.model.n0 = require<double>(jm, "model", "N0");
    maybe(jm, "A", cfg.model.a);
    cfg.model.b = require<double>(jm, "model", "B");
    if (jm.contains("couplings"))
        cfg.model.couplings = jm.at("couplings").get<std::vector<double>>();

    const json& jr = section(j, "rbm");
    maybe(jr, "M", cfg.rbm.m);
    maybe(jr, "sigma_w", cfg.rbm.sigma_w);

    const json& js = section(j, "sampler");
    maybe(js, "n_samples", cfg.sampler.n_samples);
    maybe(js, "burn_in", cfg.sampler.burn_in);
    maybe(js, "thin", cfg.sampler.thin);
    maybe(js, "n_chains", cfg.sampler.n_chains);

    const json& jo = section(j, "optimizer");
    maybe(jo, "level", cfg.optimizer.level);
    maybe(jo, "runs", cfg.optimizer.runs);
    maybe(jo, "iterations", cfg.optimizer.iterations);
    maybe(jo, "samples", cfg.optimizer.samples);
    maybe(jo, "learning_rate", cfg.optimizer.learning_rate);
    maybe(jo, "diag_shift", cfg.optimizer.diag_shift);
    maybe(jo, "beta", cfg.optimizer.beta);
    maybe(jo, "omega_max", cfg.optimizer.omega_max);
    maybe(jo, "postselect_samples", cfg.optimizer.postselect_samples);
    maybe(jo, "workers", cfg.optimizer.workers);

    const json& jd = section(j, "dynamics");
    maybe(jd, "gamma", cfg.dynamics.gamma);
    if (jd.contains("pulse")) {
        const json& jp = jd.at("pulse");
        maybe(jp, "b1", cfg.dynamics.pulse.b1);
        maybe(jp, "b2", cfg.dynamics.pulse.b2);
        maybe(jp, "t_bar", cfg.dynamics.pulse.t_bar);
        maybe(jp, "tau1", cfg.dynamics.pulse.tau1);
        maybe(jp, "tau2", cfg.dynamics.pulse.tau2);
        maybe(jp, "carrier", cfg.dynamics.pulse.carrier);
    }
    maybe(jd, "t_max", cfg.dynamics.t_max);
    maybe(jd, "dt", cfg.dynamics.dt);
    maybe(jd, "n_omega", cfg.dynamics.n_omega);
    maybe(jd, "element_samples", cfg.dynamics.element_samples);
    maybe(jd, "reestimate_samples", cfg.dynamics.reestimate_samples);
    maybe(jd, "use_fft", cfg.dynamics.use_fft);

    maybe(j, "output_dir", cfg.output_dir);
    if (!j.contains("seed")) missing("seed");
    cfg.seed = j.at("seed").get<u64>();

    // range validation
    if (cfg.model.n < 1) throw InvalidParameterError("model.N must be >= 1");
    if (cfg.model.n0 <= 0.0) throw InvalidParameterError("model.N0 must be > 0");
    if (cfg.model.a == 0.0) throw InvalidParameterError("model.A must be nonzero");
    if (cfg.rbm.sigma_w <= 0.0) throw InvalidParameterError("rbm.sigma_w must be > 0");
    if (cfg.sampler.n_samples == 0) throw InvalidParameterError("sampler.n_samples must be > 0");
    if (cfg.sampler.thin == 0) throw InvalidParameterError("sampler.thin must be >= 1");
    if (cfg.optimizer.runs == 0) throw InvalidParameterError("optimizer.runs must be > 0");
    if (cfg.optimizer.iterations == 0)
        throw InvalidParameterError("optimizer.iterations must be > 0");
    if (cfg.optimizer.samples == 0) throw InvalidParameterError("optimizer.samples must be > 0");
    if (cfg.optimizer.learning_rate <= 0.0)
        throw InvalidParameterError("optimizer.learning_rate must be > 0");
    if (cfg.optimizer.diag_shift < 0.0)
        throw InvalidParameterError("optimizer.diag_shift must be >= 0");
    if (cfg.optimizer.omega_max <= 0.0)
        throw InvalidParameterError("optimizer.omega_max must be > 0");
    for (double b : cfg.optimizer.beta)
        if (b < 0.0) throw InvalidParameterError("optimizer.beta entries must be >= 0");
    if (cfg.optimizer.workers == 0) throw InvalidParameterError("optimizer.workers must be > 0");
    if (cfg.dynamics.gamma < 0.0) throw InvalidParameterError("dynamics.gamma must be >= 0");
    if (cfg.dynamics.dt <= 0.0) throw InvalidParameterError("dynamics.dt must be > 0");
    if (cfg.dynamics.t_max <= 0.0) throw InvalidParameterError("dynamics.t_max must be > 0");
    if (cfg.dynamics.n_omega < 2) throw InvalidParameterError("dynamics.n_omega must be >= 2");
    if (cfg.output_dir.empty()) throw InvalidParameterError("output_dir must be nonempty");

    (void)cfg.build_model();  // validates couplings override length / signs
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidParameterError("cannot open config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidParameterError(std::string("config parse error: ") + e.what());
    }
    try {
        return parse_config(j);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidParameterError(std::string("config type error: ") + e.what());
    }
}

nlohmann::json resolved_config(const RunConfig& cfg) {
    nlohmann::json j;
    j["model"] = {{"N", cfg.model.n}, {"N0", cfg.model.n0}, {"A", cfg.model.a},
                  {"B", cfg.model.b}};
    if (cfg.model.couplings) j["model"]["couplings"] = *cfg.model.couplings;
    j["rbm"] = {{"M", cfg.n_hidden()}, {"sigma_w", cfg.rbm.sigma_w}};
    j["sampler"] = {{"n_samples", cfg.sampler.n_samples},
                    {"burn_in", cfg.sampler.burn_in},
                    {"thin", cfg.sampler.thin},
                    {"n_chains", cfg.sampler.n_chains}};
    j["optimizer"] = {{"level", cfg.optimizer.level},
                      {"runs", cfg.optimizer.runs},
                      {"iterations", cfg.optimizer.iterations},
                      {"samples", cfg.optimizer.samples},
                      {"learning_rate", cfg.optimizer.learning_rate},
                      {"diag_shift", cfg.optimizer.diag_shift},
                      {"beta", cfg.optimizer.beta},
                      {"omega_max", cfg.optimizer.omega_max},
                      {"postselect_samples", cfg.optimizer.postselect_samples},
                      {"workers", cfg.optimizer.workers}};
    j["dynamics"] = {{"gamma", cfg.dynamics.gamma},
                     {"pulse",
                      {{"b1", cfg.dynamics.pulse.b1},
                       {"b2", cfg.dynamics.pulse.b2},
                       {"t_bar", cfg.dynamics.pulse.t_bar},
                       {"tau1", cfg.dynamics.pulse.tau1},
                       {"tau2", cfg.dynamics.pulse.tau2},
                       {"carrier", cfg.dynamics.pulse.carrier}}},
                     {"t_max", cfg.dynamics.t_max},
                     {"dt", cfg.dynamics.dt},
                     {"n_omega", cfg.dynamics.n_omega},
                     {"element_samples", cfg.dynamics.element_samples},
                     {"reestimate_samples", cfg.dynamics.reestimate_samples},
                     {"use_fft", cfg.dynamics.use_fft}};
    j["output_dir"] = cfg.output_dir;
    j["seed"] = cfg.seed;
    return j;
}

}  // namespace gaudin
