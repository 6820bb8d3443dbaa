// Copyright 2026 The Tickwatch Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "tickwatch/kernels/kernels.hpp"

#include <cmath>

#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
#define TICKWATCH_HAVE_AVX2_BUILD 1
#include <immintrin.h>
#endif

namespace tickwatch::kernels {

#if defined(TICKWATCH_HAVE_AVX2_BUILD)
namespace {

#define TW_AVX2 __attribute__((target("avx2")))

TW_AVX2 inline double HorizontalSum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d pair = _mm_add_pd(lo, hi);
  const __m128d swapped = _mm_unpackhi_pd(pair, pair);
  return _mm_cvtsd_f64(_mm_add_sd(pair, swapped));
}

TW_AVX2 double SumAvx2(const double* x, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(x + i));
    acc1 = _mm256_add_pd(acc1, _mm256_loadu_pd(x + i + 4));
  }
  for (; i + 4 <= n; i += 4) acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(x + i));
  double acc = HorizontalSum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += x[i];
  return acc;
}

TW_AVX2 double SumSqDevAvx2(const double* x, std::size_t n, double center) {
  const __m256d c = _mm256_set1_pd(center);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + i), c);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
  }
  double total = HorizontalSum(acc);
  for (; i < n; ++i) {
    const double d = x[i] - center;
    total += d * d;
  }
  return total;
}

TW_AVX2 double SumSqDiffAvx2(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d =
        _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
  }
  double total = HorizontalSum(acc);
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    total += d * d;
  }
  return total;
}

TW_AVX2 double WeightedAbsDiffAvx2(const double* a, const double* b,
                                   const double* w, std::size_t n) {
  const __m256d sign_mask = _mm256_set1_pd(-0.0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d =
        _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    const __m256d abs = _mm256_andnot_pd(sign_mask, d);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(abs, _mm256_loadu_pd(w + i)));
  }
  double total = HorizontalSum(acc);
  for (; i < n; ++i) total += std::fabs(a[i] - b[i]) * w[i];
  return total;
}

TW_AVX2 std::size_t CountOutsideAvx2(const double* x, std::size_t n, double lo,
                                     double hi) {
  const __m256d vlo = _mm256_set1_pd(lo);
  const __m256d vhi = _mm256_set1_pd(hi);
  std::size_t count = 0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(x + i);
    const __m256d out = _mm256_or_pd(_mm256_cmp_pd(v, vlo, _CMP_LT_OQ),
                                     _mm256_cmp_pd(v, vhi, _CMP_GT_OQ));
    count += static_cast<std::size_t>(
        __builtin_popcount(static_cast<unsigned>(_mm256_movemask_pd(out))));
  }
  for (; i < n; ++i) count += (x[i] < lo || x[i] > hi);
  return count;
}

TW_AVX2 void FlagOutsideAvx2(const double* x, std::size_t n, double lo,
                             double hi, double* out) {
  const __m256d vlo = _mm256_set1_pd(lo);
  const __m256d vhi = _mm256_set1_pd(hi);
  const __m256d one = _mm256_set1_pd(1.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(x + i);
    const __m256d mask = _mm256_or_pd(_mm256_cmp_pd(v, vlo, _CMP_LT_OQ),
                                      _mm256_cmp_pd(v, vhi, _CMP_GT_OQ));
    _mm256_storeu_pd(out + i, _mm256_and_pd(mask, one));
  }
  for (; i < n; ++i) out[i] = (x[i] < lo || x[i] > hi) ? 1.0 : 0.0;
}

#undef TW_AVX2

}  // namespace

const KernelTable* Avx2Kernels() {
  static const bool supported = __builtin_cpu_supports("avx2");
  if (!supported) return nullptr;
  static const KernelTable table{
      "avx2",         SumAvx2,          SumSqDevAvx2,
      SumSqDiffAvx2,  WeightedAbsDiffAvx2, CountOutsideAvx2,
      FlagOutsideAvx2,
  };
  return &table;
}

#else

const KernelTable* Avx2Kernels() { return nullptr; }

#endif

}  // namespace tickwatch::kernels
