// AVX2 + FMA variants. This translation unit is compiled with -mavx2 -mfma
// and must only be entered after cpu_supports_avx2() returned true.
// Four points are processed per 256-bit lane group; remainders fall back to
// the scalar reference kernels.

#include "wdmix/kernels.hpp"

#include <immintrin.h>

#include <vector>

namespace wdmix::kernels {

namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

void mahalanobis_sq_avx2(PointBlock p, const double* mean, const double* chol, double* out) {
  const std::size_t d = p.dim;
  thread_local std::vector<double> z;
  z.resize(4 * d);
  std::size_t i = 0;
  for (; i + 4 <= p.count; i += 4) {
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t j = 0; j < d; ++j) {
      __m256d r = _mm256_sub_pd(_mm256_loadu_pd(p.data + j * p.stride + i), _mm256_set1_pd(mean[j]));
      for (std::size_t l = 0; l < j; ++l) {
        r = _mm256_fnmadd_pd(_mm256_set1_pd(chol[l * d + j]), _mm256_loadu_pd(&z[4 * l]), r);
      }
      r = _mm256_div_pd(r, _mm256_set1_pd(chol[j * d + j]));
      _mm256_storeu_pd(&z[4 * j], r);
      acc = _mm256_fmadd_pd(r, r, acc);
    }
    _mm256_storeu_pd(out + i, acc);
  }
  if (i < p.count) scalar_kernels().mahalanobis_sq(p.slice(i, p.count), mean, chol, out + i);
}

void mahalanobis_sq_diag_avx2(PointBlock p, const double* mean, const double* inv_var, double* out) {
  const std::size_t head = p.count - p.count % 4;
  for (std::size_t i = 0; i < head; i += 4) {
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t j = 0; j < p.dim; ++j) {
      const __m256d r = _mm256_sub_pd(_mm256_loadu_pd(p.data + j * p.stride + i), _mm256_set1_pd(mean[j]));
      acc = _mm256_fmadd_pd(_mm256_mul_pd(r, r), _mm256_set1_pd(inv_var[j]), acc);
    }
    _mm256_storeu_pd(out + i, acc);
  }
  if (head < p.count) scalar_kernels().mahalanobis_sq_diag(p.slice(head, p.count), mean, inv_var, out + head);
}

void squared_distances_avx2(PointBlock p, const double* query, double* out) {
  const std::size_t head = p.count - p.count % 4;
  for (std::size_t i = 0; i < head; i += 4) {
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t j = 0; j < p.dim; ++j) {
      const __m256d r = _mm256_sub_pd(_mm256_loadu_pd(p.data + j * p.stride + i), _mm256_set1_pd(query[j]));
      acc = _mm256_fmadd_pd(r, r, acc);
    }
    _mm256_storeu_pd(out + i, acc);
  }
  if (head < p.count) scalar_kernels().squared_distances(p.slice(head, p.count), query, out + head);
}

void weighted_sum_avx2(PointBlock p, const double* w, double* out) {
  const std::size_t head = p.count - p.count % 4;
  for (std::size_t j = 0; j < p.dim; ++j) {
    const double* col = p.data + j * p.stride;
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t i = 0; i < head; i += 4) {
      acc = _mm256_fmadd_pd(_mm256_loadu_pd(w + i), _mm256_loadu_pd(col + i), acc);
    }
    double s = hsum(acc);
    for (std::size_t i = head; i < p.count; ++i) s += w[i] * col[i];
    out[j] = s;
  }
}

void weighted_scatter_avx2(PointBlock p, const double* w, const double* center, double* scatter) {
  const std::size_t d = p.dim;
  const std::size_t head = p.count - p.count % 4;
  for (std::size_t a = 0; a < d; ++a) {
    const double* ca = p.data + a * p.stride;
    const __m256d ma = _mm256_set1_pd(center[a]);
    for (std::size_t b = 0; b <= a; ++b) {
      const double* cb = p.data + b * p.stride;
      const __m256d mb = _mm256_set1_pd(center[b]);
      __m256d acc = _mm256_setzero_pd();
      for (std::size_t i = 0; i < head; i += 4) {
        const __m256d ra = _mm256_sub_pd(_mm256_loadu_pd(ca + i), ma);
        const __m256d rb = _mm256_sub_pd(_mm256_loadu_pd(cb + i), mb);
        acc = _mm256_fmadd_pd(_mm256_mul_pd(_mm256_loadu_pd(w + i), ra), rb, acc);
      }
      double s = hsum(acc);
      for (std::size_t i = head; i < p.count; ++i) s += w[i] * (ca[i] - center[a]) * (cb[i] - center[b]);
      scatter[b * d + a] = s;
      scatter[a * d + b] = s;
    }
  }
}

constexpr KernelTable kAvx2{
    "avx2",
    &mahalanobis_sq_avx2,
    &mahalanobis_sq_diag_avx2,
    &squared_distances_avx2,
    &weighted_sum_avx2,
    &weighted_scatter_avx2,
};

}  // namespace

const KernelTable* avx2_kernels() noexcept { return &kAvx2; }

}  // namespace wdmix::kernels
