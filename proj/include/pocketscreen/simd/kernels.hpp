// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>

namespace pocketscreen::simd {

// Hot inner loops used by the encoders and the geometry passes. Two
// implementations exist: a scalar reference and an AVX2 variant, selected at
// runtime. Both translation units are built with -ffp-contract=off so the
// scalar path is a usable comparison baseline.
//
// Contract notes:
//  - axpy, dists_sq and min_dist_sq are bitwise identical across variants
//    (elementwise / order-insensitive reductions).
//  - dot may differ across variants by reassociation of the sum; callers must
//    not rely on its exact rounding.
struct KernelSet {
  const char* name;

  // sum_i a[i]*b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);

  // y[i] += s * x[i]
  void (*axpy)(double s, const double* x, double* y, std::size_t n);

  // out[i] = (xs[i]-px)^2 + (ys[i]-py)^2 + (zs[i]-pz)^2
  void (*dists_sq)(const double* xs, const double* ys, const double* zs,
                   std::size_t n, double px, double py, double pz, double* out);

  // min_i of the expression above; n must be >= 1
  double (*min_dist_sq)(const double* xs, const double* ys, const double* zs,
                        std::size_t n, double px, double py, double pz);
};

const KernelSet& scalar_kernels();
const KernelSet& avx2_kernels();

bool cpu_has_avx2();

// Active kernel set. On first use the choice is taken from the
// POCKETSCREEN_KERNELS environment variable ("scalar" or "avx2") if set,
// otherwise from CPU detection.
const KernelSet& kernels();

// Test hook: "scalar", "avx2", or "auto". Throws ConfigError for unknown
// names or when avx2 is requested on a CPU without it.
void force_kernels(const char* which);

}  // namespace pocketscreen::simd
