// SPDX-License-Identifier: Apache-2.0
//
// Reference kernels. This translation unit is compiled with -ffp-contract=off
// so results do not depend on FMA contraction choices made by the compiler.

#include "pocketscreen/simd/kernels.hpp"

namespace pocketscreen::simd {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_scalar(double s, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += s * x[i];
}

void dists_sq_scalar(const double* xs, const double* ys, const double* zs,
                     std::size_t n, double px, double py, double pz,
                     double* out) {
  for (std::size_t i = 0; i < n; ++i) {
    double dx = xs[i] - px;
    double dy = ys[i] - py;
    double dz = zs[i] - pz;
    out[i] = dx * dx + dy * dy + dz * dz;
  }
}

double min_dist_sq_scalar(const double* xs, const double* ys, const double* zs,
                          std::size_t n, double px, double py, double pz) {
  double best = 1.0 / 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double dx = xs[i] - px;
    double dy = ys[i] - py;
    double dz = zs[i] - pz;
    double d = dx * dx + dy * dy + dz * dz;
    if (d < best) best = d;
  }
  return best;
}

}  // namespace

const KernelSet& scalar_kernels() {
  static const KernelSet k{"scalar", dot_scalar, axpy_scalar, dists_sq_scalar,
                           min_dist_sq_scalar};
  return k;
}

}  // namespace pocketscreen::simd
