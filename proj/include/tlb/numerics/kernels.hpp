#pragma once

#include <cstddef>
#include <string_view>

// Dense double-precision inner loops. Every table entry has a scalar reference
// implementation; vector tables must agree with it to rounding.
namespace tlb::kernels {

struct KernelTable {
  std::string_view name;
  double (*dot)(const double* x, const double* y, std::size_t n);
  // y += a * x
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  // C[m x n] += A[m x k] * B[k x n]
  void (*gemm_nn)(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c);
  // C[m x n] += A[m x k] * B[n x k]^T
  void (*gemm_nt)(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c);
  // C[m x n] += A[k x m]^T * B[k x n]
  void (*gemm_tn)(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c);
};

const KernelTable& scalar_table();

// nullptr when the build has no AVX2 table or the CPU lacks AVX2+FMA.
const KernelTable* avx2_table();

// Table used by the tensor ops. Chosen on first use from TLB_KERNELS
// ("scalar", "avx2", "auto"; default auto = best supported).
const KernelTable& active();

// Returns false (and leaves the selection alone) for an unknown or
// unsupported name.
bool select(std::string_view name);

}  // namespace tlb::kernels
