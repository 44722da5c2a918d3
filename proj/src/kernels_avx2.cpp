#include "veriloc/kernels.hpp"

#ifdef __AVX2__
#include <immintrin.h>

#include <cmath>

namespace veriloc::kern {
namespace {

// Complex doubles are interleaved [re0 im0 re1 im1] per __m256d lane pair.

// Elementwise complex product of the two complex pairs in u and v.
inline __m256d cmul(__m256d u, __m256d v) {
    const __m256d ur = _mm256_movedup_pd(u);        // [ur0 ur0 ur1 ur1]
    const __m256d ui = _mm256_permute_pd(u, 0xF);   // [ui0 ui0 ui1 ui1]
    const __m256d vs = _mm256_permute_pd(v, 0x5);   // [vi0 vr0 vi1 vr1]
    return _mm256_fmaddsub_pd(ur, v, _mm256_mul_pd(ui, vs));
}

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

cd a_cdot_conj(const cd* a, const cd* b, std::size_t n) {
    const auto* pa = reinterpret_cast<const double*>(a);
    const auto* pb = reinterpret_cast<const double*>(b);
    __m256d acc_re = _mm256_setzero_pd();
    __m256d acc_im = _mm256_setzero_pd();
    const __m256d sign = _mm256_set_pd(-1.0, 1.0, -1.0, 1.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const __m256d va = _mm256_loadu_pd(pa + 2 * i);
        const __m256d vb = _mm256_loadu_pd(pb + 2 * i);
        acc_re = _mm256_fmadd_pd(va, vb, acc_re);
        const __m256d vbs = _mm256_permute_pd(vb, 0x5);  // [bi br ...]
        // [ar*bi, -ai*br, ...] pairs sum to the imaginary part
        acc_im = _mm256_fmadd_pd(_mm256_mul_pd(va, sign), vbs, acc_im);
    }
    double re = hsum(acc_re), im = hsum(acc_im);
    for (; i < n; ++i) {
        const double ar = a[i].real(), ai = a[i].imag();
        const double br = b[i].real(), bi = b[i].imag();
        re += ar * br + ai * bi;
        im += ar * bi - ai * br;
    }
    return {re, im};
}

double a_energy(const cd* x, std::size_t n) {
    const auto* px = reinterpret_cast<const double*>(x);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const __m256d v = _mm256_loadu_pd(px + 2 * i);
        acc = _mm256_fmadd_pd(v, v, acc);
    }
    double s = hsum(acc);
    for (; i < n; ++i) s += std::norm(x[i]);
    return s;
}

void a_axpy(cd alpha, const cd* x, cd* y, std::size_t n) {
    const auto* px = reinterpret_cast<const double*>(x);
    auto* py = reinterpret_cast<double*>(y);
    const __m256d va = _mm256_set_pd(alpha.imag(), alpha.real(), alpha.imag(), alpha.real());
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const __m256d vx = _mm256_loadu_pd(px + 2 * i);
        const __m256d vy = _mm256_loadu_pd(py + 2 * i);
        _mm256_storeu_pd(py + 2 * i, _mm256_add_pd(vy, cmul(va, vx)));
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

constexpr std::size_t kMixBlock = 256;  // same re-seed cadence as the scalar path

void a_mix(const cd* x, cd* out, std::size_t n, double phase0, double dphase) {
    const auto* px = reinterpret_cast<const double*>(x);
    auto* po = reinterpret_cast<double*>(out);
    const cd step2 = std::polar(1.0, 2.0 * dphase);
    const __m256d vstep = _mm256_set_pd(step2.imag(), step2.real(), step2.imag(), step2.real());
    for (std::size_t base = 0; base < n; base += kMixBlock) {
        const cd r0 = std::polar(1.0, phase0 + static_cast<double>(base) * dphase);
        const cd r1 = std::polar(1.0, phase0 + static_cast<double>(base + 1) * dphase);
        __m256d rot = _mm256_set_pd(r1.imag(), r1.real(), r0.imag(), r0.real());
        const std::size_t end = std::min(n, base + kMixBlock);
        std::size_t i = base;
        for (; i + 2 <= end; i += 2) {
            const __m256d vx = _mm256_loadu_pd(px + 2 * i);
            _mm256_storeu_pd(po + 2 * i, cmul(vx, rot));
            rot = cmul(rot, vstep);
        }
        for (; i < end; ++i)
            out[i] = x[i] * std::polar(1.0, phase0 + static_cast<double>(i) * dphase);
    }
}

void a_abs2(const cd* x, double* out, std::size_t n) {
    const auto* px = reinterpret_cast<const double*>(x);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const __m256d v = _mm256_loadu_pd(px + 2 * i);
        const __m256d sq = _mm256_mul_pd(v, v);
        // [re0^2+im0^2, re1^2+im1^2]
        const __m128d lo = _mm256_castpd256_pd128(sq);
        const __m128d hi = _mm256_extractf128_pd(sq, 1);
        const __m128d pair = _mm_hadd_pd(lo, hi);
        _mm_storeu_pd(out + i, pair);
    }
    for (; i < n; ++i) out[i] = std::norm(x[i]);
}

}  // namespace

const Ops& avx2_ops() {
    static const Ops ops{a_cdot_conj, a_energy, a_axpy, a_mix, a_abs2};
    return ops;
}

}  // namespace veriloc::kern

#else

namespace veriloc::kern {
const Ops& avx2_ops() { return scalar_ops(); }
}  // namespace veriloc::kern

#endif
