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

namespace tickwatch::kernels {
namespace {

double SumScalar(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i];
  return acc;
}

double SumSqDevScalar(const double* x, std::size_t n, double center) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = x[i] - center;
    acc += d * d;
  }
  return acc;
}

double SumSqDiffScalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

double WeightedAbsDiffScalar(const double* a, const double* b, const double* w,
                             std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += std::fabs(a[i] - b[i]) * w[i];
  return acc;
}

std::size_t CountOutsideScalar(const double* x, std::size_t n, double lo,
                               double hi) {
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i) count += (x[i] < lo || x[i] > hi);
  return count;
}

void FlagOutsideScalar(const double* x, std::size_t n, double lo, double hi,
                       double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = (x[i] < lo || x[i] > hi) ? 1.0 : 0.0;
}

}  // namespace

const KernelTable& ScalarKernels() {
  static const KernelTable table{
      "scalar",          SumScalar,          SumSqDevScalar,
      SumSqDiffScalar,   WeightedAbsDiffScalar, CountOutsideScalar,
      FlagOutsideScalar,
  };
  return table;
}

}  // namespace tickwatch::kernels
