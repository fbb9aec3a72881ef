// Copyright 2026 The gaudin-nqs Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>

namespace gaudin {

using cplx = std::complex<double>;
using u64 = std::uint64_t;

/// Bad user-facing input (shapes, ranges, config values).
struct InvalidParameterError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// A sample set (or cache) was paired with parameters it was not built from.
struct ProvenanceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Linear algebra or integration failure (singular system, norm drift, ...).
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Requested dense-oracle dimension above the memory guard.
struct SizeGuardError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A pipeline stage is missing an artifact a previous stage should have made.
struct MissingArtifactError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// log(2 cosh z) on the principal branch, stable for large |Re z|.
inline cplx log2cosh(cplx z) {
    if (z.real() < 0.0) z = -z;  // cosh is even
    return z + std::log(1.0 + std::exp(-2.0 * z));
}

/// Re log(2 cosh(x + iy)) without complex transcendentals.
/// |2 cosh z|^2 = 2 cosh(2x) + 2 cos(2y).
inline double re_log2cosh(double x, double y) {
    const double ax = std::fabs(x);
    const double e2 = std::exp(-2.0 * ax);
    return ax + 0.5 * std::log1p(e2 * (e2 + 2.0 * std::cos(2.0 * y)));
}

inline u64 splitmix64(u64 x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed-splitting rule: independent streams are derived from the master
/// seed XOR a stream key, pushed through a 64-bit mix.
inline u64 derive_seed(u64 master, u64 key) {
    return splitmix64(master ^ splitmix64(key));
}

inline u64 fnv1a64(const void* data, std::size_t n, u64 h = 0xcbf29ce484222325ULL) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace gaudin
