#pragma once

#include <cstddef>
#include <vector>

// Dense row-major matrix kernels shared by matmul and convolution. All of
// them accumulate into `c`.
namespace agnostic::kernels {

// c[m,n] += a[m,k] * b[k,n]
inline void gemm_nn(const double* a, const double* b, double* c, std::size_t m,
                    std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    double* c_row = c + i * n;
    const double* a_row = a + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const double a_ip = a_row[p];
      if (a_ip == 0.0) continue;
      const double* b_row = b + p * n;
      for (std::size_t j = 0; j < n; ++j) c_row[j] += a_ip * b_row[j];
    }
  }
}

// c[m,n] += a[k,m]^T * b[k,n]
inline void gemm_tn(const double* a, const double* b, double* c, std::size_t m,
                    std::size_t k, std::size_t n) {
  for (std::size_t p = 0; p < k; ++p) {
    const double* a_row = a + p * m;
    const double* b_row = b + p * n;
    for (std::size_t i = 0; i < m; ++i) {
      const double a_pi = a_row[i];
      if (a_pi == 0.0) continue;
      double* c_row = c + i * n;
      for (std::size_t j = 0; j < n; ++j) c_row[j] += a_pi * b_row[j];
    }
  }
}

// c[m,n] += a[m,k] * b[n,k]^T
inline void gemm_nt(const double* a, const double* b, double* c, std::size_t m,
                    std::size_t k, std::size_t n) {
  std::vector<double> bt(k * n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t p = 0; p < k; ++p) bt[p * n + j] = b[j * k + p];
  gemm_nn(a, bt.data(), c, m, k, n);
}

}  // namespace agnostic::kernels
