#include "coevo/kernels.hpp"

namespace coevo::kernels::scalar {

double dot(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t j = 0; j < n; ++j) acc += a[j] * b[j];
  return acc;
}

double weighted_sq_dist(const double* w, double center, const double* y, std::size_t n) {
  double acc = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double d = center - y[j];
    acc += w[j] * (d * d);
  }
  return acc;
}

void matvec(const double* m, const double* v, double* out, std::size_t rows, std::size_t cols) {
  for (std::size_t i = 0; i < rows; ++i) out[i] = dot(m + i * cols, v, cols);
}

}  // namespace coevo::kernels::scalar
