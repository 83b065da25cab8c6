// AVX2/FMA kernel variants. This translation unit is compiled with -mavx2
// -mfma and must only be entered after the runtime CPU check in dispatch.cpp.

#include "drivestat/simd/kernels.hpp"

#include <immintrin.h>

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace drivestat::simd::avx2 {
namespace {

inline __m256d polevl(__m256d x, const double* c, int degree) {
  __m256d acc = _mm256_set1_pd(c[0]);
  for (int i = 1; i <= degree; ++i) acc = _mm256_fmadd_pd(acc, x, _mm256_set1_pd(c[i]));
  return acc;
}

// Leading coefficient 1 is implicit.
inline __m256d p1evl(__m256d x, const double* c, int degree) {
  __m256d acc = _mm256_add_pd(x, _mm256_set1_pd(c[0]));
  for (int i = 1; i < degree; ++i) acc = _mm256_fmadd_pd(acc, x, _mm256_set1_pd(c[i]));
  return acc;
}

// Cephes-style exp: range reduction by ln2 then a (3,4) Pade form.
// Results below the normal range are flushed to zero.
inline __m256d exp_pd(__m256d x) {
  static constexpr double kP[] = {1.26177193074810590878e-4, 3.02994407707441961300e-2,
                                  9.99999999999999999910e-1};
  static constexpr double kQ[] = {3.00198505138664455042e-6, 2.52448340349684104192e-3,
                                  2.27265548208155028766e-1, 2.00000000000000000009e0};
  const __m256d lo = _mm256_set1_pd(-708.0);
  const __m256d hi = _mm256_set1_pd(709.0);
  const __m256d underflow = _mm256_cmp_pd(x, lo, _CMP_LT_OQ);
  x = _mm256_min_pd(_mm256_max_pd(x, lo), hi);

  const __m256d fx = _mm256_round_pd(_mm256_mul_pd(x, _mm256_set1_pd(1.4426950408889634073599)),
                                     _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(fx, _mm256_set1_pd(6.93145751953125e-1), x);
  r = _mm256_fnmadd_pd(fx, _mm256_set1_pd(1.42860682030941723212e-6), r);
  const __m256d rr = _mm256_mul_pd(r, r);
  const __m256d px = _mm256_mul_pd(r, polevl(rr, kP, 2));
  const __m256d qx = polevl(rr, kQ, 3);
  __m256d e = _mm256_div_pd(px, _mm256_sub_pd(qx, px));
  e = _mm256_fmadd_pd(_mm256_set1_pd(2.0), e, _mm256_set1_pd(1.0));

  const __m128i n32 = _mm256_cvtpd_epi32(fx);
  __m256i n64 = _mm256_cvtepi32_epi64(n32);
  n64 = _mm256_add_epi64(n64, _mm256_set1_epi64x(1023));
  const __m256d scale = _mm256_castsi256_pd(_mm256_slli_epi64(n64, 52));
  return _mm256_andnot_pd(underflow, _mm256_mul_pd(e, scale));
}

// Cephes-style log for positive normal inputs.
inline __m256d log_pd(__m256d x) {
  static constexpr double kP[] = {1.01875663804580931796e-4, 4.97494994976747001425e-1,
                                  4.70579119878881725854e0,  1.44989225341610930846e1,
                                  1.79368678507819816313e1,  7.70838733755885391666e0};
  static constexpr double kQ[] = {1.12873587189167450590e1, 4.52279145837532221105e1,
                                  8.29875266912776603211e1, 7.11544750618563894466e1,
                                  2.31251620126765340583e1};
  const __m256i bits = _mm256_castpd_si256(x);
  const __m256i biased = _mm256_srli_epi64(bits, 52);
  const __m256d magic = _mm256_set1_pd(4503599627370496.0);  // 2^52
  __m256d e = _mm256_sub_pd(
      _mm256_castsi256_pd(_mm256_or_si256(biased, _mm256_castpd_si256(magic))), magic);
  e = _mm256_sub_pd(e, _mm256_set1_pd(1022.0));

  const __m256i mant_mask = _mm256_set1_epi64x(0x000fffffffffffffLL);
  const __m256i half_bits = _mm256_set1_epi64x(0x3fe0000000000000LL);
  __m256d m = _mm256_castsi256_pd(_mm256_or_si256(_mm256_and_si256(bits, mant_mask), half_bits));

  const __m256d small = _mm256_cmp_pd(m, _mm256_set1_pd(0.70710678118654752440), _CMP_LT_OQ);
  e = _mm256_sub_pd(e, _mm256_and_pd(small, _mm256_set1_pd(1.0)));
  const __m256d xr = _mm256_add_pd(_mm256_sub_pd(m, _mm256_set1_pd(1.0)), _mm256_and_pd(small, m));

  const __m256d z = _mm256_mul_pd(xr, xr);
  __m256d y = _mm256_div_pd(_mm256_mul_pd(z, polevl(xr, kP, 5)), p1evl(xr, kQ, 5));
  y = _mm256_mul_pd(xr, y);
  y = _mm256_fmadd_pd(e, _mm256_set1_pd(-2.121944400546905827679e-4), y);
  y = _mm256_fnmadd_pd(_mm256_set1_pd(0.5), z, y);
  __m256d result = _mm256_add_pd(xr, y);
  result = _mm256_fmadd_pd(e, _mm256_set1_pd(0.693359375), result);

  // x == 0 -> -inf, x < 0 or NaN -> NaN, +inf -> +inf
  const __m256d zero = _mm256_setzero_pd();
  const __m256d is_zero = _mm256_cmp_pd(x, zero, _CMP_EQ_OQ);
  const __m256d is_bad = _mm256_cmp_pd(x, zero, _CMP_NGE_UQ);
  const __m256d is_inf = _mm256_cmp_pd(x, _mm256_set1_pd(INFINITY), _CMP_EQ_OQ);
  result = _mm256_blendv_pd(result, _mm256_set1_pd(-INFINITY), is_zero);
  result = _mm256_blendv_pd(result, _mm256_set1_pd(NAN), _mm256_andnot_pd(is_zero, is_bad));
  result = _mm256_blendv_pd(result, x, is_inf);
  return result;
}

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d pair = _mm_add_pd(lo, hi);  // (l0 + l2, l1 + l3)
  return _mm_cvtsd_f64(pair) + _mm_cvtsd_f64(_mm_unpackhi_pd(pair, pair));
}

void gauss_sum(std::span<const double> nodes, std::span<const double> samples, double inv_h,
               std::span<double> out) {
  const std::size_t n = samples.size();
  const std::size_t body = n & ~std::size_t{3};
  const __m256d vinv = _mm256_set1_pd(inv_h);
  const __m256d neg_half = _mm256_set1_pd(-0.5);
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    const __m256d node = _mm256_set1_pd(nodes[j]);
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t i = 0; i < body; i += 4) {
      const __m256d z = _mm256_mul_pd(_mm256_sub_pd(node, _mm256_loadu_pd(samples.data() + i)), vinv);
      acc = _mm256_add_pd(acc, exp_pd(_mm256_mul_pd(neg_half, _mm256_mul_pd(z, z))));
    }
    double total = hsum(acc);
    for (std::size_t i = body; i < n; ++i) {
      const double z = (nodes[j] - samples[i]) * inv_h;
      total += std::exp(-0.5 * z * z);
    }
    out[j] = total;
  }
}

double dot(const double* a, const double* b, std::size_t n) {
  const std::size_t body = n & ~std::size_t{3};
  __m256d acc = _mm256_setzero_pd();
  for (std::size_t i = 0; i < body; i += 4)
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
  double total = hsum(acc);
  for (std::size_t i = body; i < n; ++i) total += a[i] * b[i];
  return total;
}

double sum_log1p_scaled(std::span<const double> x, double tau) {
  const std::size_t n = x.size();
  const std::size_t body = n & ~std::size_t{3};
  const __m256d vtau = _mm256_set1_pd(tau);
  const __m256d one = _mm256_set1_pd(1.0);
  __m256d acc = _mm256_setzero_pd();
  for (std::size_t i = 0; i < body; i += 4) {
    const __m256d u = _mm256_mul_pd(vtau, _mm256_loadu_pd(x.data() + i));
    const __m256d w = _mm256_add_pd(one, u);
    // log1p(u) = log(w) + (u - (w - 1)) / w
    const __m256d corr = _mm256_div_pd(_mm256_sub_pd(u, _mm256_sub_pd(w, one)), w);
    acc = _mm256_add_pd(acc, _mm256_add_pd(log_pd(w), corr));
  }
  double total = hsum(acc);
  for (std::size_t i = body; i < n; ++i) total += std::log1p(tau * x[i]);
  return total;
}

double kl_terms(std::span<const double> p, std::span<const double> q, double floor) {
  const std::size_t n = p.size();
  const std::size_t body = n & ~std::size_t{3};
  const __m256d vfloor = _mm256_set1_pd(floor);
  __m256d acc = _mm256_setzero_pd();
  for (std::size_t i = 0; i < body; i += 4) {
    const __m256d pc = _mm256_max_pd(_mm256_loadu_pd(p.data() + i), vfloor);
    const __m256d qc = _mm256_max_pd(_mm256_loadu_pd(q.data() + i), vfloor);
    acc = _mm256_fmadd_pd(pc, log_pd(_mm256_div_pd(pc, qc)), acc);
  }
  double total = hsum(acc);
  for (std::size_t i = body; i < n; ++i) {
    const double pc = std::max(p[i], floor);
    const double qc = std::max(q[i], floor);
    total += pc * std::log(pc / qc);
  }
  return total;
}

void exp_elementwise(std::span<const double> x, std::span<double> out) {
  const std::size_t n = x.size();
  const std::size_t body = n & ~std::size_t{3};
  for (std::size_t i = 0; i < body; i += 4)
    _mm256_storeu_pd(out.data() + i, exp_pd(_mm256_loadu_pd(x.data() + i)));
  for (std::size_t i = body; i < n; ++i) out[i] = std::exp(x[i]);
}

}  // namespace

const KernelTable& table() {
  static const KernelTable t{"avx2", gauss_sum, dot, sum_log1p_scaled, kl_terms, exp_elementwise};
  return t;
}

}  // namespace drivestat::simd::avx2
