#include "veriloc/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>

namespace veriloc::fft {
namespace {

struct PlanPair {
    fftw_plan fwd = nullptr;
    fftw_plan inv = nullptr;
    fftw_complex* buf = nullptr;
};

// FFTW planning is not thread-safe; execution on distinct buffers is, but we
// share one scratch buffer per size, so the whole call is serialized.
std::mutex g_mutex;
std::map<std::size_t, PlanPair>& plan_cache() {
    static std::map<std::size_t, PlanPair> cache;
    return cache;
}

PlanPair& plans_for(std::size_t n) {
    auto& cache = plan_cache();
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    PlanPair p;
    p.buf = fftw_alloc_complex(n);
    p.fwd = fftw_plan_dft_1d(static_cast<int>(n), p.buf, p.buf, FFTW_FORWARD, FFTW_ESTIMATE);
    p.inv = fftw_plan_dft_1d(static_cast<int>(n), p.buf, p.buf, FFTW_BACKWARD, FFTW_ESTIMATE);
    return cache.emplace(n, p).first->second;
}

}  // namespace

void transform(cvec& x, bool inverse) {
    const std::size_t n = x.size();
    if (n == 0) return;
    std::lock_guard<std::mutex> lock(g_mutex);
    PlanPair& p = plans_for(n);
    auto* buf = reinterpret_cast<cd*>(p.buf);
    std::copy(x.begin(), x.end(), buf);
    fftw_execute(inverse ? p.inv : p.fwd);
    if (inverse) {
        const double scale = 1.0 / static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) x[i] = buf[i] * scale;
    } else {
        std::copy(buf, buf + n, x.begin());
    }
}

cvec forward(cvec x) {
    transform(x, false);
    return x;
}

cvec inverse(cvec x) {
    transform(x, true);
    return x;
}

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

XcorrPlan make_xcorr_plan(const cvec& replica, std::size_t max_lag) {
    if (replica.empty()) throw ParamError("xcorr: empty replica");
    XcorrPlan plan;
    plan.replica_len = replica.size();
    plan.max_lag = max_lag;
    plan.fft_len = next_pow2(replica.size() + max_lag + 1);
    cvec padded(plan.fft_len, cd{0.0, 0.0});
    std::copy(replica.begin(), replica.end(), padded.begin());
    transform(padded, false);
    for (auto& v : padded) v = std::conj(v);
    plan.replica_spec = std::move(padded);
    return plan;
}

cvec signal_spectrum(const cvec& sig, std::size_t fft_len) {
    cvec x(fft_len, cd{0.0, 0.0});
    std::copy(sig.begin(), sig.begin() + std::min(sig.size(), fft_len), x.begin());
    transform(x, false);
    return x;
}

cvec xcorr(const XcorrPlan& plan, const cvec& sig_spec) {
    if (sig_spec.size() != plan.fft_len) throw ParamError("xcorr: spectrum length mismatch");
    cvec prod(plan.fft_len);
    for (std::size_t i = 0; i < plan.fft_len; ++i) prod[i] = plan.replica_spec[i] * sig_spec[i];
    transform(prod, true);
    prod.resize(plan.max_lag + 1);
    return prod;
}

}  // namespace veriloc::fft
