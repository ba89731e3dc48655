#include "flowent/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace flowent::gfp {
namespace {

const RowKernels& pick() {
#if defined(__x86_64__) || defined(_M_X64)
    const char* env = std::getenv("FLOWCTL_KERNEL");
    if (env != nullptr) {
        if (std::strcmp(env, "scalar") == 0) return scalar_kernels();
        if (std::strcmp(env, "avx2") == 0 && cpu_has_avx2_fma()) return avx2_kernels();
    }
    if (cpu_has_avx2_fma()) return avx2_kernels();
#endif
    return scalar_kernels();
}

}  // namespace

const RowKernels& active_kernels() {
    static const RowKernels& k = pick();
    return k;
}

void row_axpy(uint32_t* dst, const uint32_t* src, uint32_t c, size_t n, uint32_t p) {
    const RowKernels& k = p <= kSimdMaxModulus ? active_kernels() : scalar_kernels();
    k.axpy(dst, src, c, n, p);
}

void row_scale(uint32_t* dst, uint32_t c, size_t n, uint32_t p) {
    const RowKernels& k = p <= kSimdMaxModulus ? active_kernels() : scalar_kernels();
    k.scale(dst, c, n, p);
}

}  // namespace flowent::gfp
