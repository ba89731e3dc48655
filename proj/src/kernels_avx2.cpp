#include "flowent/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

namespace flowent::gfp {
namespace {

// Exact x mod p on packed doubles holding integer values < p^2 + p <= 2^52.
// q may be off by one in either direction, so r lands in (-p, 2p) and two
// conditional corrections finish the reduction.
__attribute__((target("avx2,fma"))) inline __m256d mod_pd(__m256d x, __m256d pd, __m256d inv_p) {
    __m256d q = _mm256_floor_pd(_mm256_mul_pd(x, inv_p));
    __m256d r = _mm256_fnmadd_pd(q, pd, x);  // r = x - q*p, exact below 2^53
    r = _mm256_add_pd(r, _mm256_and_pd(pd, _mm256_cmp_pd(r, _mm256_setzero_pd(), _CMP_LT_OQ)));
    r = _mm256_sub_pd(r, _mm256_and_pd(pd, _mm256_cmp_pd(r, pd, _CMP_GE_OQ)));
    return r;
}

__attribute__((target("avx2,fma"))) void axpy_avx2(uint32_t* dst, const uint32_t* src,
                                                   uint32_t c, size_t n, uint32_t p) {
    const __m256d pd = _mm256_set1_pd(static_cast<double>(p));
    const __m256d inv_p = _mm256_set1_pd(1.0 / static_cast<double>(p));
    const __m256d cd = _mm256_set1_pd(static_cast<double>(c));
    size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d d = _mm256_cvtepi32_pd(_mm_loadu_si128(reinterpret_cast<const __m128i*>(dst + i)));
        __m256d s = _mm256_cvtepi32_pd(_mm_loadu_si128(reinterpret_cast<const __m128i*>(src + i)));
        __m256d t = _mm256_fmadd_pd(cd, s, d);  // integer valued, < p^2 + p
        __m128i r = _mm256_cvtpd_epi32(mod_pd(t, pd, inv_p));
        _mm_storeu_si128(reinterpret_cast<__m128i*>(dst + i), r);
    }
    for (; i < n; ++i)
        dst[i] = static_cast<uint32_t>((dst[i] + static_cast<uint64_t>(c) * src[i]) % p);
}

__attribute__((target("avx2,fma"))) void scale_avx2(uint32_t* dst, uint32_t c, size_t n,
                                                    uint32_t p) {
    const __m256d pd = _mm256_set1_pd(static_cast<double>(p));
    const __m256d inv_p = _mm256_set1_pd(1.0 / static_cast<double>(p));
    const __m256d cd = _mm256_set1_pd(static_cast<double>(c));
    size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d d = _mm256_cvtepi32_pd(_mm_loadu_si128(reinterpret_cast<const __m128i*>(dst + i)));
        __m128i r = _mm256_cvtpd_epi32(mod_pd(_mm256_mul_pd(cd, d), pd, inv_p));
        _mm_storeu_si128(reinterpret_cast<__m128i*>(dst + i), r);
    }
    for (; i < n; ++i)
        dst[i] = static_cast<uint32_t>(static_cast<uint64_t>(c) * dst[i] % p);
}

}  // namespace

bool cpu_has_avx2_fma() {
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}

const RowKernels& avx2_kernels() {
    static constexpr RowKernels k{axpy_avx2, scale_avx2, "avx2"};
    return k;
}

}  // namespace flowent::gfp

#endif
