#pragma once

#include "veriloc/common.hpp"

#include <cstddef>

// Data-parallel inner loops shared by the channel and receiver chains.
// A scalar reference implementation always exists; an AVX2 variant is
// selected at runtime when the CPU supports it. Both variants satisfy the
// same contracts and are equivalence-tested against each other.
namespace veriloc::kern {

enum class Backend { Scalar, Avx2 };

/// Backend currently in use.
Backend active_backend();

/// Override the dispatch decision (tests, benchmarking). Throws ParamError
/// if the requested backend is not supported on this CPU.
void force_backend(Backend b);

/// True if the CPU supports the AVX2 variant.
bool avx2_supported();

/// sum_i conj(a[i]) * b[i]
cd cdot_conj(const cd* a, const cd* b, std::size_t n);

/// sum_i |x[i]|^2
double energy(const cd* x, std::size_t n);

/// y[i] += alpha * x[i]
void axpy(cd alpha, const cd* x, cd* y, std::size_t n);

/// out[i] = x[i] * exp(j*(phase0 + i*dphase)). In-place allowed (out == x).
void mix(const cd* x, cd* out, std::size_t n, double phase0, double dphase);

/// out[i] = |x[i]|^2
void abs2(const cd* x, double* out, std::size_t n);

/// Function table a backend provides.
struct Ops {
    cd (*cdot_conj)(const cd*, const cd*, std::size_t);
    double (*energy)(const cd*, std::size_t);
    void (*axpy)(cd, const cd*, cd*, std::size_t);
    void (*mix)(const cd*, cd*, std::size_t, double, double);
    void (*abs2)(const cd*, double*, std::size_t);
};

const Ops& scalar_ops();
const Ops& avx2_ops();  // valid only when avx2_supported()

}  // namespace veriloc::kern
