#include <atomic>
#include <cstdlib>
#include <cstring>

#include "cograph/kernels.hpp"

namespace cograph::kern {
namespace {

std::atomic<const Kernels*> g_active{nullptr};

const Kernels* select_default() {
  if (const char* env = std::getenv("COGRAPH_KERNELS")) {
    if (std::strcmp(env, "scalar") == 0) return &scalar_kernels();
    if (std::strcmp(env, "avx2") == 0 && avx2_kernels() != nullptr) return avx2_kernels();
  }
  if (const Kernels* v = avx2_kernels()) return v;
  return &scalar_kernels();
}

}  // namespace

const Kernels& active() {
  const Kernels* k = g_active.load(std::memory_order_acquire);
  if (k == nullptr) {
    k = select_default();
    g_active.store(k, std::memory_order_release);
  }
  return *k;
}

bool force(const char* name) {
  if (std::strcmp(name, "scalar") == 0) {
    g_active.store(&scalar_kernels(), std::memory_order_release);
    return true;
  }
  if (std::strcmp(name, "avx2") == 0) {
    const Kernels* v = avx2_kernels();
    if (v == nullptr) return false;
    g_active.store(v, std::memory_order_release);
    return true;
  }
  return false;
}

}  // namespace cograph::kern
