#pragma once

// Float inner-loop kernels behind the feature math and the MLP trainer.
// Every entry has a scalar reference implementation and, on x86-64 with
// AVX2+FMA, a vectorized variant. The active table is picked once at
// startup from CPU capabilities; COGRAPH_KERNELS=scalar|avx2 overrides.
//
// All matrices are dense row-major. GEMMs accumulate into C.

#include <cstddef>

namespace cograph::kern {

struct Kernels {
  const char* name;

  float (*dot)(const float* a, const float* b, std::size_t n);
  // ||a - b||^2
  float (*sum_sq_diff)(const float* a, const float* b, std::size_t n);
  float (*reduce_sum)(const float* a, std::size_t n);
  // y += alpha * x
  void (*axpy)(float alpha, const float* x, float* y, std::size_t n);
  void (*scal)(float alpha, float* x, std::size_t n);
  void (*relu_fwd)(const float* x, float* y, std::size_t n);
  // dx = (x > 0) ? dy : 0
  void (*relu_bwd)(const float* x, const float* dy, float* dx, std::size_t n);

  // C[M,N] += A[M,K] * B[K,N]
  void (*gemm_nn)(std::size_t m, std::size_t n, std::size_t k, const float* a, const float* b,
                  float* c);
  // C[M,N] += A[M,K] * B[N,K]^T
  void (*gemm_nt)(std::size_t m, std::size_t n, std::size_t k, const float* a, const float* b,
                  float* c);
  // C[M,N] += A[K,M]^T * B[K,N]
  void (*gemm_tn)(std::size_t m, std::size_t n, std::size_t k, const float* a, const float* b,
                  float* c);
};

const Kernels& scalar_kernels();

// nullptr when the CPU (or the build) has no AVX2+FMA.
const Kernels* avx2_kernels();

// Selected table. Stable for the lifetime of the process.
const Kernels& active();

// Test hook: force a table by name ("scalar", "avx2"). Returns false if the
// requested table is unavailable.
bool force(const char* name);

}  // namespace cograph::kern
