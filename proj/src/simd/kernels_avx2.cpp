// SPDX-License-Identifier: Apache-2.0
//
// AVX2 kernels. Built with -mavx2 -ffp-contract=off; only dispatched to when
// the CPU reports AVX2. dot accumulates four independent lanes and folds them
// at the end, so its rounding differs from the scalar loop; the other kernels
// are elementwise (or a pure min) and match the scalar results bitwise.

#include <immintrin.h>

#include "pocketscreen/simd/kernels.hpp"

namespace pocketscreen::simd {
namespace {

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d va = _mm256_loadu_pd(a + i);
    __m256d vb = _mm256_loadu_pd(b + i);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(va, vb));
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  double s = (lanes[0] + lanes[2]) + (lanes[1] + lanes[3]);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_avx2(double s, const double* x, double* y, std::size_t n) {
  __m256d vs = _mm256_set1_pd(s);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vy = _mm256_loadu_pd(y + i);
    __m256d vx = _mm256_loadu_pd(x + i);
    vy = _mm256_add_pd(vy, _mm256_mul_pd(vs, vx));
    _mm256_storeu_pd(y + i, vy);
  }
  for (; i < n; ++i) y[i] += s * x[i];
}

void dists_sq_avx2(const double* xs, const double* ys, const double* zs,
                   std::size_t n, double px, double py, double pz,
                   double* out) {
  __m256d vpx = _mm256_set1_pd(px);
  __m256d vpy = _mm256_set1_pd(py);
  __m256d vpz = _mm256_set1_pd(pz);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(xs + i), vpx);
    __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(ys + i), vpy);
    __m256d dz = _mm256_sub_pd(_mm256_loadu_pd(zs + i), vpz);
    __m256d d = _mm256_add_pd(
        _mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy)),
        _mm256_mul_pd(dz, dz));
    _mm256_storeu_pd(out + i, d);
  }
  for (; i < n; ++i) {
    double dx = xs[i] - px;
    double dy = ys[i] - py;
    double dz = zs[i] - pz;
    out[i] = dx * dx + dy * dy + dz * dz;
  }
}

double min_dist_sq_avx2(const double* xs, const double* ys, const double* zs,
                        std::size_t n, double px, double py, double pz) {
  __m256d vpx = _mm256_set1_pd(px);
  __m256d vpy = _mm256_set1_pd(py);
  __m256d vpz = _mm256_set1_pd(pz);
  __m256d vbest = _mm256_set1_pd(1.0 / 0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(xs + i), vpx);
    __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(ys + i), vpy);
    __m256d dz = _mm256_sub_pd(_mm256_loadu_pd(zs + i), vpz);
    __m256d d = _mm256_add_pd(
        _mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy)),
        _mm256_mul_pd(dz, dz));
    vbest = _mm256_min_pd(vbest, d);
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, vbest);
  double best = lanes[0];
  for (int l = 1; l < 4; ++l)
    if (lanes[l] < best) best = lanes[l];
  for (; i < n; ++i) {
    double dx = xs[i] - px;
    double dy = ys[i] - py;
    double dz = zs[i] - pz;
    double d = dx * dx + dy * dy + dz * dz;
    if (d < best) best = d;
  }
  return best;
}

}  // namespace

const KernelSet& avx2_kernels() {
  static const KernelSet k{"avx2", dot_avx2, axpy_avx2, dists_sq_avx2,
                           min_dist_sq_avx2};
  return k;
}

}  // namespace pocketscreen::simd
