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

#include <cmath>
#include <cstdlib>
#include <string_view>

#include "tickwatch/core/error.hpp"
#include "tickwatch/kernels/kernels.hpp"

namespace tickwatch::kernels {
namespace {

const KernelTable& SelectKernels() {
  const char* forced = std::getenv("TICKWATCH_SIMD");
  if (forced != nullptr && std::string_view(forced) == "scalar") {
    return ScalarKernels();
  }
  if (const KernelTable* avx2 = Avx2Kernels()) return *avx2;
  return ScalarKernels();
}

}  // namespace

const KernelTable& ActiveKernels() {
  static const KernelTable& table = SelectKernels();
  return table;
}

double SumSquaredDiff(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    Fail(ErrorCode::kInvalidInput, "SumSquaredDiff: length mismatch");
  }
  return ActiveKernels().sum_sq_diff(a.data(), b.data(), a.size());
}

double WeightedAbsDiff(std::span<const double> a, std::span<const double> b,
                       std::span<const double> w) {
  if (a.size() != b.size() || a.size() != w.size()) {
    Fail(ErrorCode::kInvalidInput, "WeightedAbsDiff: length mismatch");
  }
  return ActiveKernels().weighted_abs_diff(a.data(), b.data(), w.data(),
                                           a.size());
}

void FlagOutside(std::span<const double> x, double lo, double hi,
                 std::span<double> out) {
  if (x.size() != out.size()) {
    Fail(ErrorCode::kInvalidInput, "FlagOutside: length mismatch");
  }
  ActiveKernels().flag_outside(x.data(), x.size(), lo, hi, out.data());
}

Moments ComputeMoments(std::span<const double> x) {
  if (x.empty()) return {};
  const double n = static_cast<double>(x.size());
  const double mean = Sum(x) / n;
  const double var = SumSquaredDeviation(x, mean) / n;
  return {mean, std::sqrt(var)};
}

}  // namespace tickwatch::kernels
