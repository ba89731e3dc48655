#pragma once

#include <cstddef>
#include <cstdint>

namespace flowent::gfp {

// Row kernels for dense GF(p) arithmetic. Entries are canonical residues
// in [0, p). These are the inner loops of rref/matmul; everything above
// them is representation-independent.
//
// axpy: dst[i] = (dst[i] + c * src[i]) mod p
// scale: dst[i] = (c * dst[i]) mod p
using AxpyFn = void (*)(uint32_t* dst, const uint32_t* src, uint32_t c, size_t n, uint32_t p);
using ScaleFn = void (*)(uint32_t* dst, uint32_t c, size_t n, uint32_t p);

struct RowKernels {
    AxpyFn axpy;
    ScaleFn scale;
    const char* name;
};

/// Portable reference kernels, valid for any p <= 2^31 - 1.
const RowKernels& scalar_kernels();

// The vectorized kernels reduce through double precision; products must
// stay below 2^53, so they are only used for p <= kSimdMaxModulus.
inline constexpr uint32_t kSimdMaxModulus = (1u << 26) - 1;

#if defined(__x86_64__) || defined(_M_X64)
const RowKernels& avx2_kernels();
bool cpu_has_avx2_fma();
#endif

/// Kernel set picked at first use from CPU features; the environment
/// variable FLOWCTL_KERNEL=scalar|avx2 forces a choice.
const RowKernels& active_kernels();

void row_axpy(uint32_t* dst, const uint32_t* src, uint32_t c, size_t n, uint32_t p);
void row_scale(uint32_t* dst, uint32_t c, size_t n, uint32_t p);

}  // namespace flowent::gfp
