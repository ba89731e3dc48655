#include "flowent/kernels.hpp"

namespace flowent::gfp {
namespace {

void axpy_scalar(uint32_t* dst, const uint32_t* src, uint32_t c, size_t n, uint32_t p) {
    for (size_t i = 0; i < n; ++i)
        dst[i] = static_cast<uint32_t>((dst[i] + static_cast<uint64_t>(c) * src[i]) % p);
}

void scale_scalar(uint32_t* dst, uint32_t c, size_t n, uint32_t p) {
    for (size_t i = 0; i < n; ++i)
        dst[i] = static_cast<uint32_t>(static_cast<uint64_t>(c) * dst[i] % p);
}

}  // namespace

const RowKernels& scalar_kernels() {
    static constexpr RowKernels k{axpy_scalar, scale_scalar, "scalar"};
    return k;
}

}  // namespace flowent::gfp
