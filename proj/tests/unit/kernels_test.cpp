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

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

namespace tickwatch::kernels {
namespace {

std::vector<double> Random(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, 3.0);
  std::vector<double> out(n);
  for (double& v : out) v = dist(rng);
  return out;
}

class KernelEquivalenceTest : public ::testing::Test {
 protected:
  void SetUp() override {
    simd_ = Avx2Kernels();
    if (simd_ == nullptr) GTEST_SKIP() << "no AVX2 on this host";
  }
  const KernelTable* simd_ = nullptr;
};

TEST_F(KernelEquivalenceTest, ReductionsAgreeWithScalarReference) {
  const KernelTable& ref = ScalarKernels();
  std::mt19937_64 rng(1);
  for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 8u, 9u, 31u, 64u, 1000u, 4099u}) {
    const auto a = Random(n, rng);
    const auto b = Random(n, rng);
    auto w = Random(n, rng);
    for (double& v : w) v = std::fabs(v);
    double scale = 1.0;
    for (double v : a) scale += std::fabs(v);
    const double tol = 1e-13 * scale * scale;
    EXPECT_NEAR(simd_->sum(a.data(), n), ref.sum(a.data(), n), tol) << n;
    EXPECT_NEAR(simd_->sum_sq_dev(a.data(), n, 0.7), ref.sum_sq_dev(a.data(), n, 0.7), tol);
    EXPECT_NEAR(simd_->sum_sq_diff(a.data(), b.data(), n),
                ref.sum_sq_diff(a.data(), b.data(), n), tol);
    EXPECT_NEAR(simd_->weighted_abs_diff(a.data(), b.data(), w.data(), n),
                ref.weighted_abs_diff(a.data(), b.data(), w.data(), n), tol);
  }
}

TEST_F(KernelEquivalenceTest, CountingAndFlaggingAreExact) {
  const KernelTable& ref = ScalarKernels();
  std::mt19937_64 rng(2);
  for (std::size_t n : {0u, 1u, 5u, 8u, 13u, 257u, 10000u}) {
    auto x = Random(n, rng);
    if (n > 2) {
      x[0] = -1.5;  // boundary values are inside
      x[1] = 2.5;
      x[2] = std::nan("");  // NaN is never outside
    }
    EXPECT_EQ(simd_->count_outside(x.data(), n, -1.5, 2.5),
              ref.count_outside(x.data(), n, -1.5, 2.5));
    std::vector<double> fa(n), fb(n);
    simd_->flag_outside(x.data(), n, -1.5, 2.5, fa.data());
    ref.flag_outside(x.data(), n, -1.5, 2.5, fb.data());
    EXPECT_EQ(fa, fb);
  }
}

TEST(KernelsTest, ScalarGoldenValues) {
  const KernelTable& k = ScalarKernels();
  const std::vector<double> x{1, 2, 3, 4};
  const std::vector<double> y{0, 2, 5, 4};
  const std::vector<double> w{1, 1, 0.5, 2};
  EXPECT_EQ(k.sum(x.data(), 4), 10.0);
  EXPECT_EQ(k.sum_sq_dev(x.data(), 4, 2.5), 5.0);
  EXPECT_EQ(k.sum_sq_diff(x.data(), y.data(), 4), 5.0);
  EXPECT_EQ(k.weighted_abs_diff(x.data(), y.data(), w.data(), 4), 2.0);
  EXPECT_EQ(k.count_outside(x.data(), 4, 2, 3), 2u);
}

TEST(KernelsTest, MomentsOfKnownSample) {
  const std::vector<double> x{2, 4, 4, 4, 5, 5, 7, 9};
  const Moments m = ComputeMoments(x);
  EXPECT_DOUBLE_EQ(m.mean, 5.0);
  EXPECT_DOUBLE_EQ(m.std, 2.0);
  EXPECT_FALSE(ActiveKernels().name.empty());
}

}  // namespace
}  // namespace tickwatch::kernels
