// Copyright 2026 The gaudin-nqs Authors
// SPDX-License-Identifier: Apache-2.0

#include "gaudin/rbm.hpp"

#include <fstream>
#include <random>

#include <json.hpp>

namespace gaudin {

namespace {

Eigen::VectorXd sign_vector(u64 bits, Eigen::Index n) {
    Eigen::VectorXd s(n);
    for (Eigen::Index j = 0; j < n; ++j) s[j] = (bits >> j) & 1 ? 1.0 : -1.0;
    return s;
}

void check_dims(const RbmParameters& p) {
    if (p.b.size() < 1) throw InvalidParameterError("RbmParameters: M must be >= 1");
    if (p.w.rows() != p.a.size() || p.w.cols() != p.b.size())
        throw InvalidParameterError("RbmParameters: weight matrix shape mismatch");
}

}  // namespace

Eigen::VectorXcd RbmParameters::flatten() const {
    Eigen::VectorXcd v(n_params());
    v.head(a.size()) = a;
    v.segment(a.size(), b.size()) = b;
    Eigen::Index o = a.size() + b.size();
    for (Eigen::Index j = 0; j < w.rows(); ++j, o += w.cols())
        v.segment(o, w.cols()) = w.row(j);
    return v;
}

RbmParameters RbmParameters::unflatten(const Eigen::VectorXcd& v, Eigen::Index n_visible,
                                       Eigen::Index n_hidden) {
    if (v.size() != n_visible + n_hidden + n_visible * n_hidden)
        throw InvalidParameterError("unflatten: parameter vector length mismatch");
    RbmParameters p;
    p.a = v.head(n_visible);
    p.b = v.segment(n_visible, n_hidden);
    p.w.resize(n_visible, n_hidden);
    Eigen::Index o = n_visible + n_hidden;
    for (Eigen::Index j = 0; j < n_visible; ++j, o += n_hidden)
        p.w.row(j) = v.segment(o, n_hidden);
    return p;
}

u64 RbmParameters::id() const {
    u64 h = fnv1a64(a.data(), sizeof(cplx) * a.size());
    h = fnv1a64(b.data(), sizeof(cplx) * b.size(), h);
    h = fnv1a64(w.data(), sizeof(cplx) * w.size(), h);
    return h;
}

u64 hidden_angles_checksum(const RbmParameters& p, u64 config_bits) {
    const u64 pid = p.id();
    u64 h = fnv1a64(&pid, sizeof pid);
    return fnv1a64(&config_bits, sizeof config_bits, h);
}

HiddenAngles compute_hidden_angles_bits(const RbmParameters& p, u64 bits) {
    check_dims(p);
    const Eigen::VectorXd s = sign_vector(bits, p.n_visible());
    HiddenAngles h;
    h.theta = p.b + p.w.transpose() * s.cast<cplx>();
    h.checksum = hidden_angles_checksum(p, bits);
    return h;
}

HiddenAngles compute_hidden_angles(const RbmParameters& p, const SpinConfiguration& sigma) {
    if (Eigen::Index(sigma.size()) != p.n_visible())
        throw InvalidParameterError("compute_hidden_angles: size mismatch");
    return compute_hidden_angles_bits(p, sigma.bits());
}

cplx log_psi_bits(const RbmParameters& p, u64 bits) {
    check_dims(p);
    const Eigen::VectorXd s = sign_vector(bits, p.n_visible());
    cplx r = p.a.cwiseProduct(s.cast<cplx>()).sum();  // sum_j a_j sigma_j
    const Eigen::VectorXcd theta = p.b + p.w.transpose() * s.cast<cplx>();
    for (Eigen::Index i = 0; i < theta.size(); ++i) r += log2cosh(theta[i]);
    return r;
}

cplx log_psi(const RbmParameters& p, const SpinConfiguration& sigma) {
    if (Eigen::Index(sigma.size()) != p.n_visible())
        throw InvalidParameterError("log_psi: configuration/parameter size mismatch");
    return log_psi_bits(p, sigma.bits());
}

cplx amplitude_ratio(const RbmParameters& p, const HiddenAngles& angles,
                     const SpinConfiguration& sigma, std::span<const std::size_t> flips) {
    if (flips.empty() || flips.size() > 2)
        throw InvalidParameterError("amplitude_ratio: 1 or 2 flips supported");
    if (angles.checksum != hidden_angles_checksum(p, sigma.bits()))
        throw ProvenanceError("amplitude_ratio: stale HiddenAngles cache");
    cplx dlog = 0.0;
    Eigen::VectorXcd theta = angles.theta;
    for (std::size_t j : flips) {
        if (j >= sigma.size()) throw InvalidParameterError("amplitude_ratio: flip index out of range");
        const double sj = sigma[j];
        dlog -= 2.0 * p.a[Eigen::Index(j)] * sj;
        theta -= 2.0 * sj * p.w.row(Eigen::Index(j)).transpose();
    }
    for (Eigen::Index i = 0; i < theta.size(); ++i)
        dlog += log2cosh(theta[i]) - log2cosh(angles.theta[i]);
    return std::exp(dlog);
}

Eigen::VectorXcd log_derivatives_bits(const RbmParameters& p, u64 bits) {
    check_dims(p);
    const Eigen::Index nv = p.n_visible(), nh = p.n_hidden();
    const Eigen::VectorXd s = sign_vector(bits, nv);
    const Eigen::VectorXcd theta = p.b + p.w.transpose() * s.cast<cplx>();
    Eigen::VectorXcd t(nh);
    for (Eigen::Index i = 0; i < nh; ++i) t[i] = std::tanh(theta[i]);

    Eigen::VectorXcd o(nv + nh + nv * nh);
    o.head(nv) = s.cast<cplx>();
    o.segment(nv, nh) = t;
    Eigen::Index off = nv + nh;
    for (Eigen::Index j = 0; j < nv; ++j, off += nh) o.segment(off, nh) = s[j] * t;
    return o;
}

Eigen::VectorXcd log_derivatives(const RbmParameters& p, const SpinConfiguration& sigma) {
    if (Eigen::Index(sigma.size()) != p.n_visible())
        throw InvalidParameterError("log_derivatives: size mismatch");
    return log_derivatives_bits(p, sigma.bits());
}

RbmParameters init_random(std::size_t n_visible, std::size_t n_hidden, double spread, u64 seed) {
    if (spread < 0.0) throw InvalidParameterError("init_random: spread must be >= 0");
    if (n_hidden < 1) throw InvalidParameterError("init_random: M must be >= 1");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, spread > 0.0 ? spread : 1.0);
    auto draw = [&]() -> cplx {
        if (spread == 0.0) return 0.0;
        const double re = gauss(rng);
        const double im = gauss(rng);
        return {re, im};
    };
    RbmParameters p;
    p.a.resize(Eigen::Index(n_visible));
    p.b.resize(Eigen::Index(n_hidden));
    p.w.resize(Eigen::Index(n_visible), Eigen::Index(n_hidden));
    for (Eigen::Index j = 0; j < p.a.size(); ++j) p.a[j] = draw();
    for (Eigen::Index i = 0; i < p.b.size(); ++i) p.b[i] = draw();
    for (Eigen::Index j = 0; j < p.w.rows(); ++j)
        for (Eigen::Index i = 0; i < p.w.cols(); ++i) p.w(j, i) = draw();
    return p;
}

void save_checkpoint(const std::string& path, const RbmParameters& p, u64 seed,
                     const std::string& metadata_json) {
    check_dims(p);
    nlohmann::json j;
    j["version"] = 1;
    j["N"] = p.n_visible() - 1;
    j["M"] = p.n_hidden();
    auto put = [&](const char* re, const char* im, const cplx* data, Eigen::Index n) {
        std::vector<double> vre(n), vim(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            vre[i] = data[i].real();
            vim[i] = data[i].imag();
        }
        j[re] = vre;
        j[im] = vim;
    };
    put("a_re", "a_im", p.a.data(), p.a.size());
    put("b_re", "b_im", p.b.data(), p.b.size());
    // w row-major by visible index
    Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> wr = p.w;
    put("w_re", "w_im", wr.data(), wr.size());
    j["seed"] = seed;
    j["metadata"] = nlohmann::json::parse(metadata_json);
    std::ofstream out(path);
    if (!out) throw InvalidParameterError("save_checkpoint: cannot open " + path);
    out << j.dump(2) << "\n";
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw MissingArtifactError("load_checkpoint: cannot open " + path);
    nlohmann::json j = nlohmann::json::parse(in);
    if (j.at("version").get<int>() != 1)
        throw InvalidParameterError("load_checkpoint: unsupported version");
    const Eigen::Index nv = j.at("N").get<Eigen::Index>() + 1;
    const Eigen::Index nh = j.at("M").get<Eigen::Index>();
    auto get = [&](const char* re, const char* im, cplx* data, Eigen::Index n) {
        const auto vre = j.at(re).get<std::vector<double>>();
        const auto vim = j.at(im).get<std::vector<double>>();
        if (Eigen::Index(vre.size()) != n || Eigen::Index(vim.size()) != n)
            throw InvalidParameterError("load_checkpoint: array length mismatch");
        for (Eigen::Index i = 0; i < n; ++i) data[i] = {vre[i], vim[i]};
    };
    Checkpoint c;
    c.params.a.resize(nv);
    c.params.b.resize(nh);
    get("a_re", "a_im", c.params.a.data(), nv);
    get("b_re", "b_im", c.params.b.data(), nh);
    Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> wr(nv, nh);
    get("w_re", "w_im", wr.data(), nv * nh);
    c.params.w = wr;
    c.seed = j.at("seed").get<u64>();
    c.metadata_json = j.value("metadata", nlohmann::json::object()).dump();
    return c;
}

}  // namespace gaudin
