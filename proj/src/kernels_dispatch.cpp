#include <atomic>
#include <cstdlib>
#include <string>

#include "coevo/error.hpp"
#include "coevo/kernels.hpp"

namespace coevo::kernels {
namespace {

constexpr KernelTable kScalarTable{&scalar::dot, &scalar::weighted_sq_dist, &scalar::matvec};
#if COEVO_HAVE_AVX2_KERNELS
constexpr KernelTable kAvx2Table{&avx2::dot, &avx2::weighted_sq_dist, &avx2::matvec};
#endif

KernelPath detect() {
  if (const char* env = std::getenv("COEVO_KERNEL"); env != nullptr && *env != '\0') {
    const KernelPath wanted = parse_kernel_path(env);
    if (cpu_supports(wanted)) return wanted;
  }
  return cpu_supports(KernelPath::avx2) ? KernelPath::avx2 : KernelPath::scalar;
}

std::atomic<KernelPath>& current() {
  static std::atomic<KernelPath> path{detect()};
  return path;
}

}  // namespace

bool cpu_supports(KernelPath path) {
  switch (path) {
    case KernelPath::scalar:
      return true;
    case KernelPath::avx2:
#if COEVO_HAVE_AVX2_KERNELS
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
  }
  return false;
}

KernelPath active_path() { return current().load(std::memory_order_relaxed); }

void set_kernel_path(KernelPath path) {
  if (!cpu_supports(path)) {
    throw ValidationError("kernel path '" + std::string(to_string(path)) +
                          "' is not supported on this CPU");
  }
  current().store(path, std::memory_order_relaxed);
}

const KernelTable& table(KernelPath path) {
#if COEVO_HAVE_AVX2_KERNELS
  if (path == KernelPath::avx2) return kAvx2Table;
#endif
  (void)path;
  return kScalarTable;
}

const KernelTable& active() { return table(active_path()); }

std::string_view to_string(KernelPath path) {
  return path == KernelPath::avx2 ? "avx2" : "scalar";
}

KernelPath parse_kernel_path(std::string_view name) {
  if (name == "scalar") return KernelPath::scalar;
  if (name == "avx2") return KernelPath::avx2;
  throw ValidationError("unknown kernel path '" + std::string(name) + "' (expected scalar|avx2)");
}

}  // namespace coevo::kernels
