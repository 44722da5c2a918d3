#include "veriloc/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

namespace veriloc::kern {
namespace {

std::atomic<const Ops*> g_ops{nullptr};
std::atomic<Backend> g_backend{Backend::Scalar};

const Ops* init_dispatch() {
    Backend want = avx2_supported() ? Backend::Avx2 : Backend::Scalar;
    if (const char* env = std::getenv("VERILOC_KERNELS")) {
        if (std::strcmp(env, "scalar") == 0) want = Backend::Scalar;
        else if (std::strcmp(env, "avx2") == 0 && avx2_supported()) want = Backend::Avx2;
    }
    const Ops* ops = (want == Backend::Avx2) ? &avx2_ops() : &scalar_ops();
    g_backend.store(want);
    g_ops.store(ops);
    return ops;
}

inline const Ops& ops() {
    const Ops* p = g_ops.load(std::memory_order_acquire);
    return p ? *p : *init_dispatch();
}

}  // namespace

bool avx2_supported() {
#ifdef __x86_64__
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

Backend active_backend() {
    ops();
    return g_backend.load();
}

void force_backend(Backend b) {
    if (b == Backend::Avx2 && !avx2_supported())
        throw ParamError("AVX2 backend not supported on this CPU");
    g_backend.store(b);
    g_ops.store(b == Backend::Avx2 ? &avx2_ops() : &scalar_ops());
}

cd cdot_conj(const cd* a, const cd* b, std::size_t n) { return ops().cdot_conj(a, b, n); }
double energy(const cd* x, std::size_t n) { return ops().energy(x, n); }
void axpy(cd alpha, const cd* x, cd* y, std::size_t n) { ops().axpy(alpha, x, y, n); }
void mix(const cd* x, cd* out, std::size_t n, double phase0, double dphase) {
    ops().mix(x, out, n, phase0, dphase);
}
void abs2(const cd* x, double* out, std::size_t n) { ops().abs2(x, out, n); }

}  // namespace veriloc::kern
