#include "veriloc/kernels.hpp"

#include <cmath>

namespace veriloc::kern {
namespace {

cd s_cdot_conj(const cd* a, const cd* b, std::size_t n) {
    double re = 0.0, im = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double ar = a[i].real(), ai = a[i].imag();
        const double br = b[i].real(), bi = b[i].imag();
        re += ar * br + ai * bi;
        im += ar * bi - ai * br;
    }
    return {re, im};
}

double s_energy(const cd* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        acc += x[i].real() * x[i].real() + x[i].imag() * x[i].imag();
    return acc;
}

void s_axpy(cd alpha, const cd* x, cd* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

// Rotator recurrence, re-seeded from sincos every block to stop error growth.
constexpr std::size_t kMixBlock = 256;

void s_mix(const cd* x, cd* out, std::size_t n, double phase0, double dphase) {
    const cd step = std::polar(1.0, dphase);
    for (std::size_t base = 0; base < n; base += kMixBlock) {
        cd rot = std::polar(1.0, phase0 + static_cast<double>(base) * dphase);
        const std::size_t end = std::min(n, base + kMixBlock);
        for (std::size_t i = base; i < end; ++i) {
            out[i] = x[i] * rot;
            rot *= step;
        }
    }
}

void s_abs2(const cd* x, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        out[i] = x[i].real() * x[i].real() + x[i].imag() * x[i].imag();
}

}  // namespace

const Ops& scalar_ops() {
    static const Ops ops{s_cdot_conj, s_energy, s_axpy, s_mix, s_abs2};
    return ops;
}

}  // namespace veriloc::kern
