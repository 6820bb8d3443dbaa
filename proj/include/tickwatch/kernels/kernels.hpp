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

#pragma once

// Dense reduction kernels used by the numeric hot loops (residual sums of
// squares, boundary flagging, moment estimates, CDF-gap integration).
//
// Each kernel has a scalar reference implementation and, on x86-64, an AVX2
// variant. The variant is picked once at first use from CPUID; setting the
// environment variable TICKWATCH_SIMD=scalar forces the reference path.
// Floating-point reductions in the vector path reassociate, so results agree
// with the scalar path to within a few ulps per element, not bit-exactly.
// Counting and flagging kernels agree exactly.

#include <cstddef>
#include <span>
#include <string_view>

namespace tickwatch::kernels {

struct KernelTable {
  std::string_view name;
  double (*sum)(const double* x, std::size_t n);
  // sum_i (x_i - center)^2
  double (*sum_sq_dev)(const double* x, std::size_t n, double center);
  // sum_i (a_i - b_i)^2
  double (*sum_sq_diff)(const double* a, const double* b, std::size_t n);
  // sum_i |a_i - b_i| * w_i
  double (*weighted_abs_diff)(const double* a, const double* b,
                              const double* w, std::size_t n);
  // number of x_i with x_i < lo or x_i > hi
  std::size_t (*count_outside)(const double* x, std::size_t n, double lo,
                               double hi);
  // out_i = 1.0 if x_i < lo or x_i > hi else 0.0
  void (*flag_outside)(const double* x, std::size_t n, double lo, double hi,
                       double* out);
};

const KernelTable& ScalarKernels();

// nullptr when the running CPU (or the build target) lacks AVX2.
const KernelTable* Avx2Kernels();

// The table selected for this process.
const KernelTable& ActiveKernels();

inline double Sum(std::span<const double> x) {
  return ActiveKernels().sum(x.data(), x.size());
}

inline double SumSquaredDeviation(std::span<const double> x, double center) {
  return ActiveKernels().sum_sq_dev(x.data(), x.size(), center);
}

double SumSquaredDiff(std::span<const double> a, std::span<const double> b);

double WeightedAbsDiff(std::span<const double> a, std::span<const double> b,
                       std::span<const double> w);

inline std::size_t CountOutside(std::span<const double> x, double lo,
                                double hi) {
  return ActiveKernels().count_outside(x.data(), x.size(), lo, hi);
}

void FlagOutside(std::span<const double> x, double lo, double hi,
                 std::span<double> out);

// Mean and population standard deviation; {0, 0} for empty input.
struct Moments {
  double mean = 0.0;
  double std = 0.0;
};
Moments ComputeMoments(std::span<const double> x);

}  // namespace tickwatch::kernels
