// SPDX-License-Identifier: Apache-2.0

#include <cstdlib>
#include <string>

#include "pocketscreen/errors.hpp"
#include "pocketscreen/simd/kernels.hpp"

namespace pocketscreen::simd {
namespace {

const KernelSet* g_forced = nullptr;

const KernelSet* pick_default() {
  if (const char* env = std::getenv("POCKETSCREEN_KERNELS")) {
    std::string s(env);
    if (s == "scalar") return &scalar_kernels();
    if (s == "avx2") {
      if (!cpu_has_avx2())
        throw ConfigError("POCKETSCREEN_KERNELS=avx2 but CPU lacks AVX2");
      return &avx2_kernels();
    }
    if (!s.empty() && s != "auto")
      throw ConfigError("POCKETSCREEN_KERNELS: unknown value '" + s + "'");
  }
  return cpu_has_avx2() ? &avx2_kernels() : &scalar_kernels();
}

}  // namespace

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2") != 0;
#else
  return false;
#endif
}

const KernelSet& kernels() {
  static const KernelSet* def = pick_default();
  return g_forced ? *g_forced : *def;
}

void force_kernels(const char* which) {
  std::string s(which);
  if (s == "auto") {
    g_forced = nullptr;
  } else if (s == "scalar") {
    g_forced = &scalar_kernels();
  } else if (s == "avx2") {
    if (!cpu_has_avx2()) throw ConfigError("force_kernels: CPU lacks AVX2");
    g_forced = &avx2_kernels();
  } else {
    throw ConfigError("force_kernels: unknown kernel set '" + s + "'");
  }
}

}  // namespace pocketscreen::simd
