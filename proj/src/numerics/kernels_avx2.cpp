#include "tlb/numerics/kernels.hpp"

#include <immintrin.h>

#include <vector>

namespace tlb::kernels {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    _mm256_storeu_pd(y + i + 4, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4)));
  }
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

// Four rows of B per pass so each C row is loaded/stored once per four FMAs.
void gemm_row_update(const double* arow, std::size_t k, const double* b, std::size_t n, double* crow) {
  std::size_t p = 0;
  for (; p + 4 <= k; p += 4) {
    const __m256d a0 = _mm256_set1_pd(arow[p]);
    const __m256d a1 = _mm256_set1_pd(arow[p + 1]);
    const __m256d a2 = _mm256_set1_pd(arow[p + 2]);
    const __m256d a3 = _mm256_set1_pd(arow[p + 3]);
    const double* b0 = b + p * n;
    const double* b1 = b0 + n;
    const double* b2 = b1 + n;
    const double* b3 = b2 + n;
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
      __m256d c = _mm256_loadu_pd(crow + j);
      c = _mm256_fmadd_pd(a0, _mm256_loadu_pd(b0 + j), c);
      c = _mm256_fmadd_pd(a1, _mm256_loadu_pd(b1 + j), c);
      c = _mm256_fmadd_pd(a2, _mm256_loadu_pd(b2 + j), c);
      c = _mm256_fmadd_pd(a3, _mm256_loadu_pd(b3 + j), c);
      _mm256_storeu_pd(crow + j, c);
    }
    for (; j < n; ++j) {
      crow[j] += arow[p] * b0[j] + arow[p + 1] * b1[j] + arow[p + 2] * b2[j] + arow[p + 3] * b3[j];
    }
  }
  for (; p < k; ++p) axpy_avx2(arow[p], b + p * n, crow, n);
}

void gemm_nn_avx2(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c) {
  for (std::size_t i = 0; i < m; ++i) gemm_row_update(a + i * k, k, b, n, c + i * n);
}

// Four dot products per pass share the loads of the A row.
void gemm_nt_avx2(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    double* crow = c + i * n;
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
      const double* b0 = b + j * k;
      const double* b1 = b0 + k;
      const double* b2 = b1 + k;
      const double* b3 = b2 + k;
      __m256d s0 = _mm256_setzero_pd(), s1 = _mm256_setzero_pd();
      __m256d s2 = _mm256_setzero_pd(), s3 = _mm256_setzero_pd();
      std::size_t p = 0;
      for (; p + 4 <= k; p += 4) {
        const __m256d x = _mm256_loadu_pd(arow + p);
        s0 = _mm256_fmadd_pd(x, _mm256_loadu_pd(b0 + p), s0);
        s1 = _mm256_fmadd_pd(x, _mm256_loadu_pd(b1 + p), s1);
        s2 = _mm256_fmadd_pd(x, _mm256_loadu_pd(b2 + p), s2);
        s3 = _mm256_fmadd_pd(x, _mm256_loadu_pd(b3 + p), s3);
      }
      // Horizontal sums of s0..s3 into one vector.
      const __m256d h01 = _mm256_hadd_pd(s0, s1);
      const __m256d h23 = _mm256_hadd_pd(s2, s3);
      const __m256d sums = _mm256_add_pd(_mm256_permute2f128_pd(h01, h23, 0x20), _mm256_permute2f128_pd(h01, h23, 0x31));
      alignas(32) double out[4];
      _mm256_store_pd(out, sums);
      for (; p < k; ++p) {
        out[0] += arow[p] * b0[p];
        out[1] += arow[p] * b1[p];
        out[2] += arow[p] * b2[p];
        out[3] += arow[p] * b3[p];
      }
      for (std::size_t t = 0; t < 4; ++t) crow[j + t] += out[t];
    }
    for (; j < n; ++j) crow[j] += dot_avx2(arow, b + j * k, k);
  }
}

void gemm_tn_avx2(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c) {
  std::vector<double> column(k);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) column[p] = a[p * m + i];
    gemm_row_update(column.data(), k, b, n, c + i * n);
  }
}

}  // namespace

const KernelTable* avx2_table_unchecked() {
  static const KernelTable table{"avx2", dot_avx2, axpy_avx2, gemm_nn_avx2, gemm_nt_avx2, gemm_tn_avx2};
  return &table;
}

}  // namespace tlb::kernels
