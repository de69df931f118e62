#include <atomic>
#include <cstdlib>
#include <string>

#include "tlb/numerics/kernels.hpp"

namespace tlb::kernels {

#if defined(TLB_HAVE_AVX2)
const KernelTable* avx2_table_unchecked();
#endif

namespace {

bool cpu_has_avx2() {
#if defined(TLB_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* from_name(std::string_view name) {
  if (name == "scalar") return &scalar_table();
  if (name == "avx2") return avx2_table();
  if (name == "auto" || name.empty()) {
    const KernelTable* best = avx2_table();
    return best != nullptr ? best : &scalar_table();
  }
  return nullptr;
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> table{[] {
    const char* env = std::getenv("TLB_KERNELS");
    const KernelTable* t = from_name(env != nullptr ? std::string_view(env) : std::string_view("auto"));
    return t != nullptr ? t : from_name("auto");
  }()};
  return table;
}

}  // namespace

const KernelTable* avx2_table() {
#if defined(TLB_HAVE_AVX2)
  static const bool supported = cpu_has_avx2();
  return supported ? avx2_table_unchecked() : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& active() { return *current().load(std::memory_order_relaxed); }

bool select(std::string_view name) {
  const KernelTable* t = from_name(name);
  if (t == nullptr) return false;
  current().store(t, std::memory_order_relaxed);
  return true;
}

}  // namespace tlb::kernels
