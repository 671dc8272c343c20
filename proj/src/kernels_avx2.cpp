// AVX2/FMA kernel variants. Compiled with -mavx2 -mfma on x86-64 only; the
// dispatcher checks CPU support before handing these out. Complex numbers are
// interleaved (re,im), so one __m256d holds two complex values.

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include "dmx/kernels.hpp"

namespace dmx::kernels {
namespace {

inline const double* dp(const cplx* p) {
  return reinterpret_cast<const double*>(p);
}
inline double* dp(cplx* p) { return reinterpret_cast<double*>(p); }

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

// Complex product of the two complexes in a with the broadcast complex
// (br, bi): even lanes get re, odd lanes get im.
inline __m256d cmul(__m256d a, __m256d br, __m256d bi) {
  __m256d u = _mm256_mul_pd(_mm256_permute_pd(a, 0x5), bi);
  return _mm256_fmaddsub_pd(a, br, u);
}

void apply_mode_matrices_v(const cplx* mats, const cplx* x, cplx* y,
                           std::size_t nmodes) {
  for (std::size_t k = 0; k < nmodes; ++k) {
    const double* m = dp(mats + 16 * k);
    const double* v = dp(x + 4 * k);
    __m256d y01 = _mm256_setzero_pd();
    __m256d y23 = _mm256_setzero_pd();
    for (int c = 0; c < 4; ++c) {
      const __m256d re = _mm256_broadcast_sd(v + 2 * c);
      const __m256d im = _mm256_broadcast_sd(v + 2 * c + 1);
      const __m256d col01 = _mm256_loadu_pd(m + 8 * c);
      const __m256d col23 = _mm256_loadu_pd(m + 8 * c + 4);
      y01 = _mm256_add_pd(y01, cmul(col01, re, im));
      y23 = _mm256_add_pd(y23, cmul(col23, re, im));
    }
    _mm256_storeu_pd(dp(y + 4 * k), y01);
    _mm256_storeu_pd(dp(y + 4 * k) + 4, y23);
  }
}

// Conjugated dot of 4 contiguous complexes against 4 contiguous complexes.
inline cplx cdot4(const double* a, const double* b) {
  const __m256d a01 = _mm256_loadu_pd(a), a23 = _mm256_loadu_pd(a + 4);
  const __m256d b01 = _mm256_loadu_pd(b), b23 = _mm256_loadu_pd(b + 4);
  // re = sum over lanes of a*b; im = sum of swap(a)*b with even lanes negated.
  __m256d t = _mm256_fmadd_pd(a01, b01, _mm256_mul_pd(a23, b23));
  __m256d u = _mm256_fmadd_pd(_mm256_permute_pd(a01, 0x5), b01,
                              _mm256_mul_pd(_mm256_permute_pd(a23, 0x5), b23));
  u = _mm256_addsub_pd(_mm256_setzero_pd(), u);
  return {hsum(t), hsum(u)};
}

void apply_mode_matrices_adj_v(const cplx* mats, const cplx* x, cplx* y,
                               std::size_t nmodes) {
  for (std::size_t k = 0; k < nmodes; ++k) {
    const double* m = dp(mats + 16 * k);
    const double* v = dp(x + 4 * k);
    cplx* o = y + 4 * k;
    for (int r = 0; r < 4; ++r) o[r] = cdot4(m + 8 * r, v);
  }
}

cplx weighted_dot4_v(const double* w, const cplx* x, const cplx* y,
                     std::size_t nmodes) {
  __m256d t = _mm256_setzero_pd();
  __m256d u = _mm256_setzero_pd();
  for (std::size_t k = 0; k < nmodes; ++k) {
    const __m256d wv = _mm256_broadcast_sd(w + k);
    const double* a = dp(x + 4 * k);
    const double* b = dp(y + 4 * k);
    const __m256d a01 = _mm256_loadu_pd(a), a23 = _mm256_loadu_pd(a + 4);
    const __m256d b01 = _mm256_mul_pd(_mm256_loadu_pd(b), wv);
    const __m256d b23 = _mm256_mul_pd(_mm256_loadu_pd(b + 4), wv);
    t = _mm256_fmadd_pd(a01, b01, t);
    t = _mm256_fmadd_pd(a23, b23, t);
    u = _mm256_fmadd_pd(_mm256_permute_pd(a01, 0x5), b01, u);
    u = _mm256_fmadd_pd(_mm256_permute_pd(a23, 0x5), b23, u);
  }
  u = _mm256_addsub_pd(_mm256_setzero_pd(), u);
  return {hsum(t), hsum(u)};
}

void scale_per_mode4_v(const double* s, const cplx* x, cplx* y,
                       std::size_t nmodes) {
  for (std::size_t k = 0; k < nmodes; ++k) {
    const __m256d sv = _mm256_broadcast_sd(s + k);
    const double* a = dp(x + 4 * k);
    _mm256_storeu_pd(dp(y + 4 * k), _mm256_mul_pd(_mm256_loadu_pd(a), sv));
    _mm256_storeu_pd(dp(y + 4 * k) + 4,
                     _mm256_mul_pd(_mm256_loadu_pd(a + 4), sv));
  }
}

void scale_flat_real_v(const double* s, const cplx* x, cplx* y,
                       std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    // expand (s_i, s_{i+1}) to (s_i, s_i, s_{i+1}, s_{i+1})
    const __m256d sv = _mm256_permute4x64_pd(
        _mm256_castpd128_pd256(_mm_loadu_pd(s + i)), 0x50);
    _mm256_storeu_pd(dp(y + i), _mm256_mul_pd(_mm256_loadu_pd(dp(x + i)), sv));
  }
  for (; i < n; ++i) y[i] = s[i] * x[i];
}

cplx dot_v(const cplx* x, const cplx* y, std::size_t n) {
  __m256d t = _mm256_setzero_pd();
  __m256d u = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d a = _mm256_loadu_pd(dp(x + i));
    const __m256d b = _mm256_loadu_pd(dp(y + i));
    t = _mm256_fmadd_pd(a, b, t);
    u = _mm256_fmadd_pd(_mm256_permute_pd(a, 0x5), b, u);
  }
  u = _mm256_addsub_pd(_mm256_setzero_pd(), u);
  cplx acc{hsum(t), hsum(u)};
  for (; i < n; ++i) acc += std::conj(x[i]) * y[i];
  return acc;
}

void axpy_v(cplx a, const cplx* x, cplx* y, std::size_t n) {
  const __m256d re = _mm256_set1_pd(a.real());
  const __m256d im = _mm256_set1_pd(a.imag());
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d xv = _mm256_loadu_pd(dp(x + i));
    const __m256d yv = _mm256_loadu_pd(dp(y + i));
    _mm256_storeu_pd(dp(y + i), _mm256_add_pd(yv, cmul(xv, re, im)));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void scal_v(cplx a, cplx* x, std::size_t n) {
  const __m256d re = _mm256_set1_pd(a.real());
  const __m256d im = _mm256_set1_pd(a.imag());
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d xv = _mm256_loadu_pd(dp(x + i));
    _mm256_storeu_pd(dp(x + i), cmul(xv, re, im));
  }
  for (; i < n; ++i) x[i] *= a;
}

void beta_density_v(const cplx* psi, cplx* rho, std::size_t nsites) {
  for (std::size_t i = 0; i < nsites; ++i) {
    const double* p = dp(psi + 4 * i);
    const __m256d v01 = _mm256_loadu_pd(p);
    const __m256d v23 = _mm256_loadu_pd(p + 4);
    rho[i] = hsum(_mm256_fnmadd_pd(v23, v23, _mm256_mul_pd(v01, v01)));
  }
}

void abs_density_v(const cplx* psi, cplx* rho, std::size_t nsites) {
  for (std::size_t i = 0; i < nsites; ++i) {
    const double* p = dp(psi + 4 * i);
    const __m256d v01 = _mm256_loadu_pd(p);
    const __m256d v23 = _mm256_loadu_pd(p + 4);
    rho[i] = hsum(_mm256_fmadd_pd(v23, v23, _mm256_mul_pd(v01, v01)));
  }
}

const Ops kAvx2Ops = {
    "avx2",          apply_mode_matrices_v, apply_mode_matrices_adj_v,
    weighted_dot4_v, scale_per_mode4_v,     scale_flat_real_v,
    dot_v,           axpy_v,                scal_v,
    beta_density_v,  abs_density_v,
};

}  // namespace

const Ops* avx2_ops_impl() { return &kAvx2Ops; }

}  // namespace dmx::kernels

#endif  // x86-64
