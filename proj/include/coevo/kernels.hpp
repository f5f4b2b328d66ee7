#pragma once

// Dense double-precision inner loops used by the payoff, potential and
// opinion-solver code. Each kernel has a portable scalar reference and an
// AVX2 variant; the variant is picked once at startup from CPUID and can be
// overridden with COEVO_KERNEL=scalar|avx2 or set_kernel_path().
//
// The two paths sum in different orders, so results agree to rounding
// (relative 1e-13 or so), not bit-for-bit. Within one path every kernel is
// deterministic.

#include <cstddef>
#include <span>
#include <string_view>

namespace coevo::kernels {

enum class KernelPath { scalar, avx2 };

struct KernelTable {
  // sum_j a_j * b_j
  double (*dot)(const double* a, const double* b, std::size_t n);
  // sum_j w_j * (center - y_j)^2
  double (*weighted_sq_dist)(const double* w, double center, const double* y, std::size_t n);
  // out = M * v, M row-major rows x cols
  void (*matvec)(const double* m, const double* v, double* out, std::size_t rows,
                 std::size_t cols);
};

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
double weighted_sq_dist(const double* w, double center, const double* y, std::size_t n);
void matvec(const double* m, const double* v, double* out, std::size_t rows, std::size_t cols);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define COEVO_HAVE_AVX2_KERNELS 1
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
double weighted_sq_dist(const double* w, double center, const double* y, std::size_t n);
void matvec(const double* m, const double* v, double* out, std::size_t rows, std::size_t cols);
}  // namespace avx2
#else
#define COEVO_HAVE_AVX2_KERNELS 0
#endif

bool cpu_supports(KernelPath path);
KernelPath active_path();
// Throws ValidationError when the CPU lacks the requested path.
void set_kernel_path(KernelPath path);
const KernelTable& table(KernelPath path);
const KernelTable& active();

std::string_view to_string(KernelPath path);
KernelPath parse_kernel_path(std::string_view name);

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}

inline double weighted_sq_dist(std::span<const double> w, double center,
                               std::span<const double> y) {
  return active().weighted_sq_dist(w.data(), center, y.data(), w.size());
}

}  // namespace coevo::kernels
