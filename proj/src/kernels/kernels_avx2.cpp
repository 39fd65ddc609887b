// AVX2+FMA variants. This TU is compiled with -mavx2 -mfma; nothing here may
// run unless avx2_kernels() reported support at runtime.

#include "cograph/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#define COGRAPH_HAVE_AVX2_BUILD 1
#include <immintrin.h>
#else
#define COGRAPH_HAVE_AVX2_BUILD 0
#endif

namespace cograph::kern {

#if COGRAPH_HAVE_AVX2_BUILD

namespace {

inline float hsum256(__m256 v) {
  __m128 lo = _mm256_castps256_ps128(v);
  __m128 hi = _mm256_extractf128_ps(v, 1);
  lo = _mm_add_ps(lo, hi);
  lo = _mm_add_ps(lo, _mm_movehl_ps(lo, lo));
  lo = _mm_add_ss(lo, _mm_shuffle_ps(lo, lo, 1));
  return _mm_cvtss_f32(lo);
}

float dot_avx2(const float* a, const float* b, std::size_t n) {
  __m256 acc0 = _mm256_setzero_ps();
  __m256 acc1 = _mm256_setzero_ps();
  __m256 acc2 = _mm256_setzero_ps();
  __m256 acc3 = _mm256_setzero_ps();
  std::size_t i = 0;
  for (; i + 32 <= n; i += 32) {
    acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i), acc0);
    acc1 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i + 8), _mm256_loadu_ps(b + i + 8), acc1);
    acc2 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i + 16), _mm256_loadu_ps(b + i + 16), acc2);
    acc3 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i + 24), _mm256_loadu_ps(b + i + 24), acc3);
  }
  for (; i + 8 <= n; i += 8)
    acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i), acc0);
  float s = hsum256(_mm256_add_ps(_mm256_add_ps(acc0, acc1), _mm256_add_ps(acc2, acc3)));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

float sum_sq_diff_avx2(const float* a, const float* b, std::size_t n) {
  __m256 acc0 = _mm256_setzero_ps();
  __m256 acc1 = _mm256_setzero_ps();
  std::size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    __m256 d0 = _mm256_sub_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i));
    __m256 d1 = _mm256_sub_ps(_mm256_loadu_ps(a + i + 8), _mm256_loadu_ps(b + i + 8));
    acc0 = _mm256_fmadd_ps(d0, d0, acc0);
    acc1 = _mm256_fmadd_ps(d1, d1, acc1);
  }
  for (; i + 8 <= n; i += 8) {
    __m256 d = _mm256_sub_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i));
    acc0 = _mm256_fmadd_ps(d, d, acc0);
  }
  float s = hsum256(_mm256_add_ps(acc0, acc1));
  for (; i < n; ++i) {
    float d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

float reduce_sum_avx2(const float* a, std::size_t n) {
  __m256 acc = _mm256_setzero_ps();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) acc = _mm256_add_ps(acc, _mm256_loadu_ps(a + i));
  float s = hsum256(acc);
  for (; i < n; ++i) s += a[i];
  return s;
}

void axpy_avx2(float alpha, const float* x, float* y, std::size_t n) {
  __m256 va = _mm256_set1_ps(alpha);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(y + i, _mm256_fmadd_ps(va, _mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void scal_avx2(float alpha, float* x, std::size_t n) {
  __m256 va = _mm256_set1_ps(alpha);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) _mm256_storeu_ps(x + i, _mm256_mul_ps(va, _mm256_loadu_ps(x + i)));
  for (; i < n; ++i) x[i] *= alpha;
}

void relu_fwd_avx2(const float* x, float* y, std::size_t n) {
  __m256 zero = _mm256_setzero_ps();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) _mm256_storeu_ps(y + i, _mm256_max_ps(zero, _mm256_loadu_ps(x + i)));
  for (; i < n; ++i) y[i] = x[i] > 0.0f ? x[i] : 0.0f;
}

void relu_bwd_avx2(const float* x, const float* dy, float* dx, std::size_t n) {
  __m256 zero = _mm256_setzero_ps();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 mask = _mm256_cmp_ps(_mm256_loadu_ps(x + i), zero, _CMP_GT_OQ);
    _mm256_storeu_ps(dx + i, _mm256_and_ps(mask, _mm256_loadu_ps(dy + i)));
  }
  for (; i < n; ++i) dx[i] = x[i] > 0.0f ? dy[i] : 0.0f;
}

// Broadcast-A row update: C[i,:] += A[i,p] * B[p,:]. Two k-steps in flight.
void gemm_nn_avx2(std::size_t m, std::size_t n, std::size_t k, const float* a, const float* b,
                  float* c) {
  for (std::size_t i = 0; i < m; ++i) {
    const float* arow = a + i * k;
    float* crow = c + i * n;
    std::size_t p = 0;
    for (; p + 2 <= k; p += 2) {
      __m256 a0 = _mm256_set1_ps(arow[p]);
      __m256 a1 = _mm256_set1_ps(arow[p + 1]);
      const float* b0 = b + p * n;
      const float* b1 = b0 + n;
      std::size_t j = 0;
      for (; j + 8 <= n; j += 8) {
        __m256 acc = _mm256_loadu_ps(crow + j);
        acc = _mm256_fmadd_ps(a0, _mm256_loadu_ps(b0 + j), acc);
        acc = _mm256_fmadd_ps(a1, _mm256_loadu_ps(b1 + j), acc);
        _mm256_storeu_ps(crow + j, acc);
      }
      for (; j < n; ++j) crow[j] += arow[p] * b0[j] + arow[p + 1] * b1[j];
    }
    for (; p < k; ++p) {
      float av = arow[p];
      const float* brow = b + p * n;
      std::size_t j = 0;
      __m256 va = _mm256_set1_ps(av);
      for (; j + 8 <= n; j += 8)
        _mm256_storeu_ps(crow + j,
                         _mm256_fmadd_ps(va, _mm256_loadu_ps(brow + j), _mm256_loadu_ps(crow + j)));
      for (; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

void gemm_nt_avx2(std::size_t m, std::size_t n, std::size_t k, const float* a, const float* b,
                  float* c) {
  for (std::size_t i = 0; i < m; ++i) {
    const float* arow = a + i * k;
    float* crow = c + i * n;
    std::size_t j = 0;
    // Two output columns per pass share the A row loads.
    for (; j + 2 <= n; j += 2) {
      const float* b0 = b + j * k;
      const float* b1 = b0 + k;
      __m256 s00 = _mm256_setzero_ps(), s01 = _mm256_setzero_ps();
      __m256 s10 = _mm256_setzero_ps(), s11 = _mm256_setzero_ps();
      std::size_t p = 0;
      for (; p + 16 <= k; p += 16) {
        __m256 av0 = _mm256_loadu_ps(arow + p);
        __m256 av1 = _mm256_loadu_ps(arow + p + 8);
        s00 = _mm256_fmadd_ps(av0, _mm256_loadu_ps(b0 + p), s00);
        s01 = _mm256_fmadd_ps(av1, _mm256_loadu_ps(b0 + p + 8), s01);
        s10 = _mm256_fmadd_ps(av0, _mm256_loadu_ps(b1 + p), s10);
        s11 = _mm256_fmadd_ps(av1, _mm256_loadu_ps(b1 + p + 8), s11);
      }
      for (; p + 8 <= k; p += 8) {
        __m256 av = _mm256_loadu_ps(arow + p);
        s00 = _mm256_fmadd_ps(av, _mm256_loadu_ps(b0 + p), s00);
        s10 = _mm256_fmadd_ps(av, _mm256_loadu_ps(b1 + p), s10);
      }
      float r0 = hsum256(_mm256_add_ps(s00, s01));
      float r1 = hsum256(_mm256_add_ps(s10, s11));
      for (; p < k; ++p) {
        r0 += arow[p] * b0[p];
        r1 += arow[p] * b1[p];
      }
      crow[j] += r0;
      crow[j + 1] += r1;
    }
    for (; j < n; ++j) crow[j] += dot_avx2(arow, b + j * k, k);
  }
}

void gemm_tn_avx2(std::size_t m, std::size_t n, std::size_t k, const float* a, const float* b,
                  float* c) {
  // A is [K, M], B is [K, N]: C[i,:] += A[p,i] * B[p,:].
  for (std::size_t p = 0; p < k; ++p) {
    const float* arow = a + p * m;
    const float* brow = b + p * n;
    for (std::size_t i = 0; i < m; ++i) {
      float av = arow[i];
      if (av == 0.0f) continue;
      float* crow = c + i * n;
      __m256 va = _mm256_set1_ps(av);
      std::size_t j = 0;
      for (; j + 8 <= n; j += 8)
        _mm256_storeu_ps(crow + j,
                         _mm256_fmadd_ps(va, _mm256_loadu_ps(brow + j), _mm256_loadu_ps(crow + j)));
      for (; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

bool cpu_supported() {
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}

}  // namespace

const Kernels* avx2_kernels() {
  if (!cpu_supported()) return nullptr;
  static const Kernels k{
      "avx2",        dot_avx2,      sum_sq_diff_avx2, reduce_sum_avx2,
      axpy_avx2,     scal_avx2,     relu_fwd_avx2,    relu_bwd_avx2,
      gemm_nn_avx2,  gemm_nt_avx2,  gemm_tn_avx2,
  };
  return &k;
}

#else

const Kernels* avx2_kernels() { return nullptr; }

#endif  // COGRAPH_HAVE_AVX2_BUILD

}  // namespace cograph::kern
