#include "hessmooth/kernels.hpp"

#include <algorithm>

namespace hessmooth::kernels::scalar {

double dot(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = y[i] + alpha * x[i];
}

void csr_spmv(const std::int32_t* row_ptr, const std::int32_t* cols,
              const double* vals, const double* x, double* y,
              std::size_t nrows) {
  for (std::size_t r = 0; r < nrows; ++r) {
    double acc = 0.0;
    for (std::int32_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k)
      acc += vals[k] * x[cols[k]];
    y[r] = acc;
  }
}

// v - clamp(v, -t, t) is sign(v) * max(|v| - t, 0) without branches.
void soft_threshold(const double* in, double t, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double v = in[i];
    out[i] = v - std::min(std::max(v, -t), t);
  }
}

}  // namespace hessmooth::kernels::scalar
