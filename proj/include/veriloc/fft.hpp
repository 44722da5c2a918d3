#pragma once

#include "veriloc/common.hpp"

namespace veriloc::fft {

/// In-place complex FFT. Forward is unscaled; inverse is scaled by 1/N.
void transform(cvec& x, bool inverse);

cvec forward(cvec x);
cvec inverse(cvec x);

std::size_t next_pow2(std::size_t n);

/// Precomputed state for fast cross-correlation against a fixed replica:
/// r[lag] = sum_k conj(replica[k]) * sig[lag + k],  lag = 0 .. max_lag.
struct XcorrPlan {
    std::size_t fft_len = 0;
    std::size_t replica_len = 0;
    std::size_t max_lag = 0;
    cvec replica_spec;  // conj(FFT(zero-padded replica))
};

XcorrPlan make_xcorr_plan(const cvec& replica, std::size_t max_lag);

/// FFT of the first plan.fft_len samples of sig (zero-padded if shorter).
/// Reusable across replicas sharing the same fft_len.
cvec signal_spectrum(const cvec& sig, std::size_t fft_len);

/// Correlation lags 0..max_lag given a signal spectrum from signal_spectrum().
cvec xcorr(const XcorrPlan& plan, const cvec& sig_spec);

}  // namespace veriloc::fft
