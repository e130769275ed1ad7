#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cmath>

#include "moranifs/common.hpp"
#include "moranifs/kernels.hpp"

// AVX2 kernel variants. scale_offset/scale_anchor_offset/cell_keys execute
// the same mul/add/floor sequence as the scalar reference and are bitwise
// identical to it; moran_mixed_sum uses the vector exp below (Cody-Waite
// reduction + rational approximation, ~1 ulp) and is tolerance-equivalent.

namespace moran::kernels::avx2 {

namespace {

// exp for four doubles, arguments expected in [-746, 709].
inline __m256d exp4(__m256d x) {
  const __m256d log2e = _mm256_set1_pd(1.4426950408889634073599);
  const __m256d ln2_hi = _mm256_set1_pd(6.93145751953125e-1);
  const __m256d ln2_lo = _mm256_set1_pd(1.42860682030941723212e-6);

  const __m256d p0 = _mm256_set1_pd(1.26177193074810590878e-4);
  const __m256d p1 = _mm256_set1_pd(3.02994407707441961300e-2);
  const __m256d p2 = _mm256_set1_pd(9.99999999999999999910e-1);
  const __m256d q0 = _mm256_set1_pd(3.00198505138664455042e-6);
  const __m256d q1 = _mm256_set1_pd(2.52448340349684104192e-3);
  const __m256d q2 = _mm256_set1_pd(2.27265548208155028766e-1);
  const __m256d q3 = _mm256_set1_pd(2.00000000000000000005e0);

  const __m256d underflow = _mm256_set1_pd(-708.0);
  const __m256d overflow = _mm256_set1_pd(709.0);
  __m256d zero_mask = _mm256_cmp_pd(x, underflow, _CMP_LT_OQ);
  x = _mm256_min_pd(x, overflow);
  x = _mm256_max_pd(x, underflow);

  __m256d n = _mm256_round_pd(_mm256_mul_pd(x, log2e),
                              _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_sub_pd(x, _mm256_mul_pd(n, ln2_hi));
  r = _mm256_sub_pd(r, _mm256_mul_pd(n, ln2_lo));
  __m256d r2 = _mm256_mul_pd(r, r);

  __m256d px = _mm256_add_pd(_mm256_mul_pd(p0, r2), p1);
  px = _mm256_add_pd(_mm256_mul_pd(px, r2), p2);
  px = _mm256_mul_pd(px, r);
  __m256d qx = _mm256_add_pd(_mm256_mul_pd(q0, r2), q1);
  qx = _mm256_add_pd(_mm256_mul_pd(qx, r2), q2);
  qx = _mm256_add_pd(_mm256_mul_pd(qx, r2), q3);

  __m256d e = _mm256_div_pd(px, _mm256_sub_pd(qx, px));
  e = _mm256_add_pd(_mm256_set1_pd(1.0), _mm256_add_pd(e, e));

  // 2^n via exponent bits; n is within [-1023, 1024) here.
  __m128i n32 = _mm256_cvtpd_epi32(n);
  __m256i n64 = _mm256_cvtepi32_epi64(n32);
  __m256i bits = _mm256_slli_epi64(
      _mm256_add_epi64(n64, _mm256_set1_epi64x(1023)), 52);
  e = _mm256_mul_pd(e, _mm256_castsi256_pd(bits));

  return _mm256_andnot_pd(zero_mask, e);
}

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(lo) + _mm_cvtsd_f64(_mm_unpackhi_pd(lo, lo));
}

inline double hmax(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_max_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_max_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

}  // namespace

void scale_offset(const double* x, std::size_t n, double s, double t,
                  double* out) {
  const __m256d vs = _mm256_set1_pd(s);
  const __m256d vt = _mm256_set1_pd(t);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d v = _mm256_loadu_pd(x + i);
    _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_mul_pd(vs, v), vt));
  }
  for (; i < n; ++i) out[i] = s * x[i] + t;
}

void scale_anchor_offset(const double* s, const double* t, std::size_t n,
                         double c, double* out) {
  const __m256d vc = _mm256_set1_pd(c);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vs = _mm256_loadu_pd(s + i);
    __m256d vt = _mm256_loadu_pd(t + i);
    _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_mul_pd(vs, vc), vt));
  }
  for (; i < n; ++i) out[i] = s[i] * c + t[i];
}

double moran_mixed_sum(double s, const double* lr, const double* mult,
                       const std::size_t* offsets, std::size_t num_layers) {
  const __m256d vs = _mm256_set1_pd(s);
  KahanSum acc;
  for (std::size_t li = 0; li < num_layers; ++li) {
    const std::size_t begin = offsets[li];
    const std::size_t end = offsets[li + 1];
    const std::size_t cnt = end - begin;

    double m = -HUGE_VAL;
    std::size_t j = begin;
    if (cnt >= 4) {
      __m256d vm = _mm256_set1_pd(-HUGE_VAL);
      for (; j + 4 <= end; j += 4) {
        __m256d v = _mm256_mul_pd(vs, _mm256_loadu_pd(lr + j));
        vm = _mm256_max_pd(vm, v);
      }
      m = hmax(vm);
    }
    for (; j < end; ++j) m = std::max(m, s * lr[j]);

    double inner = 0.0;
    j = begin;
    if (cnt >= 4) {
      const __m256d vmm = _mm256_set1_pd(m);
      __m256d vsum = _mm256_setzero_pd();
      for (; j + 4 <= end; j += 4) {
        __m256d v = _mm256_mul_pd(vs, _mm256_loadu_pd(lr + j));
        __m256d e = exp4(_mm256_sub_pd(v, vmm));
        vsum = _mm256_add_pd(vsum, _mm256_mul_pd(_mm256_loadu_pd(mult + j), e));
      }
      inner = hsum(vsum);
    }
    for (; j < end; ++j) inner += mult[j] * std::exp(s * lr[j] - m);

    acc.add(m + std::log(inner));
  }
  return acc.value();
}

void cell_keys(const double* x, std::size_t n, double origin, double inv_delta,
               std::int64_t* keys) {
  // floor() first, then exact conversion of the integral double through the
  // 1.5*2^52 bias trick (valid for |key| < 2^51).
  const __m256d vo = _mm256_set1_pd(origin);
  const __m256d vd = _mm256_set1_pd(inv_delta);
  const __m256d bias = _mm256_set1_pd(6755399441055744.0);  // 1.5 * 2^52
  const __m256i bias_bits = _mm256_castpd_si256(bias);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d v = _mm256_mul_pd(_mm256_sub_pd(_mm256_loadu_pd(x + i), vo), vd);
    v = _mm256_floor_pd(v);
    __m256i k = _mm256_sub_epi64(
        _mm256_castpd_si256(_mm256_add_pd(v, bias)), bias_bits);
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(keys + i), k);
  }
  for (; i < n; ++i) {
    keys[i] =
        static_cast<std::int64_t>(std::floor((x[i] - origin) * inv_delta));
  }
}

}  // namespace moran::kernels::avx2

#endif  // x86_64
