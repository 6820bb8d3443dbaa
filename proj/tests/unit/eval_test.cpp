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

#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "tickwatch/eval/benchmarks.hpp"
#include "tickwatch/eval/experiments.hpp"
#include "tickwatch/eval/metrics.hpp"

namespace tickwatch::eval {
namespace {

TEST(Confusion, HandComputedCounts) {
  const std::vector<int> predicted{1, 1, 0, 0, 1, 0, 0, 0};
  const std::vector<int> actual{1, 0, 1, 0, 1, 0, 0, 0};
  const Confusion c = Confuse(predicted, actual);
  EXPECT_EQ(c.tp, 2);
  EXPECT_EQ(c.fp, 1);
  EXPECT_EQ(c.fn, 1);
  EXPECT_EQ(c.tn, 4);
  EXPECT_DOUBLE_EQ(c.precision(), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(c.recall(), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(c.specificity(), 0.8);
  EXPECT_DOUBLE_EQ(c.balanced_accuracy(), (2.0 / 3.0 + 0.8) / 2.0);
}

TEST(Confusion, EmptyClassesAndMismatch) {
  const Confusion none = Confuse(std::vector<int>{0, 0}, std::vector<int>{0, 0});
  EXPECT_EQ(none.recall(), 0.0);
  EXPECT_EQ(none.precision(), 0.0);
  EXPECT_EQ(none.specificity(), 1.0);
  EXPECT_EQ(testing::CodeOf([] { Confuse(std::vector<int>{1}, std::vector<int>{1, 0}); }),
            ErrorCode::kInvalidInput);
}

// Balanced accuracy against an independent per-class recall computation.
TEST(Confusion, BalancedAccuracyMatchesPerClassRecallOracle) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng() % 200;
    std::vector<int> p(n), a(n);
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = static_cast<int>(rng() % 2);
      a[i] = static_cast<int>(rng() % 5 == 0);
    }
    double hit[2] = {0, 0}, count[2] = {0, 0};
    for (std::size_t i = 0; i < n; ++i) {
      count[a[i]] += 1;
      hit[a[i]] += p[i] == a[i];
    }
    const double r1 = count[1] ? hit[1] / count[1] : 0.0;
    const double r0 = count[0] ? hit[0] / count[0] : 0.0;
    const Confusion c = Confuse(p, a);
    ASSERT_NEAR(c.balanced_accuracy(), (r0 + r1) / 2.0, 1e-12);
    ASSERT_EQ(c.total(), static_cast<std::int64_t>(n));
    ASSERT_GE(c.balanced_accuracy(), 0.0);
    ASSERT_LE(c.balanced_accuracy(), 1.0);
  }
}

TEST(Benchmarks, SeasonalPointLayout) {
  const auto d = SeasonalPointBenchmark(7);
  EXPECT_EQ(d.window.size(), 21u * 1440);
  EXPECT_EQ(d.train_rows, 14u * 1440);
  EXPECT_EQ(d.window.ts().front() % testing::kDay, 0);
  int positives = 0;
  std::size_t last = 0;
  for (std::size_t i = 0; i < d.labels.size(); ++i) {
    if (!d.labels[i]) continue;
    ++positives;
    EXPECT_GE(i, d.train_rows);
    if (last) EXPECT_GT(i - last, 30u);
    last = i;
  }
  EXPECT_EQ(positives, 40);
}

TEST(Benchmarks, DeterministicPerSeed) {
  EXPECT_EQ(SeasonalPointBenchmark(3).window.values(), SeasonalPointBenchmark(3).window.values());
  EXPECT_NE(SeasonalPointBenchmark(3).window.values(), SeasonalPointBenchmark(4).window.values());
  EXPECT_EQ(BurstBenchmark(2, 9).labels, BurstBenchmark(2, 9).labels);
}

TEST(Benchmarks, BurstVariantsShape) {
  for (int v = 0; v < kBurstVariants; ++v) {
    const auto d = BurstBenchmark(v, 1);
    EXPECT_EQ(d.window.feature_count(), 3u + v);
    EXPECT_EQ(d.window.size(), 8u * 1440);
    for (std::size_t i = 0; i < d.train_rows; ++i) ASSERT_EQ(d.labels[i], 0);
    // Positive rows form exactly 8 runs of 60..180.
    int runs = 0;
    std::size_t len = 0;
    for (std::size_t i = 0; i <= d.labels.size(); ++i) {
      if (i < d.labels.size() && d.labels[i]) {
        ++len;
      } else if (len) {
        ++runs;
        EXPECT_GE(len, 60u);
        EXPECT_LE(len, 180u);
        len = 0;
      }
    }
    EXPECT_EQ(runs, 8);
  }
  EXPECT_EQ(testing::CodeOf([] { BurstBenchmark(4, 1); }), ErrorCode::kInvalidInput);
}

TEST(Benchmarks, CsvHeaderAndRows) {
  const auto d = BurstBenchmark(0, 2);
  std::istringstream csv(DatasetToCsv(d));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "ts_ms,f1,f2,f3,label");
  std::size_t rows = 0;
  while (std::getline(csv, line)) ++rows;
  EXPECT_EQ(rows, d.window.size());
}

TEST(Experiments, ArmsDifferOnlyInTheirEnrichment) {
  const auto s = SeasonalArms();
  ASSERT_EQ(s.size(), 2u);
  EXPECT_FALSE(s[0].spec.seasonality_period);
  EXPECT_EQ(s[1].spec.seasonality_period, 1440);
  EXPECT_EQ(s[0].params["order"], s[1].params["order"]);
  const auto e = EnrichmentArms();
  ASSERT_EQ(e.size(), 3u);
  EXPECT_EQ(e[0].spec.hold_window, 1);
  EXPECT_EQ(e[1].spec.hold_window, e[2].spec.hold_window);
  EXPECT_EQ(e[1].spec.smoothing_alpha, 1.0);
  EXPECT_LT(e[2].spec.smoothing_alpha, 0.5);
}

TEST(Experiments, RunArmScoresOnlyEvaluationRows) {
  const auto d = BurstBenchmark(0, 4);
  const auto r = RunArm(d, EnrichmentArms()[0], 4);
  EXPECT_EQ(r.predicted.size(), d.window.size() - d.train_rows);
  EXPECT_EQ(r.confusion.total(), static_cast<std::int64_t>(r.predicted.size()));
  const Confusion oracle =
      Confuse(r.predicted, std::span<const int>(d.labels).subspan(d.train_rows));
  EXPECT_EQ(oracle.tp, r.confusion.tp);
  EXPECT_EQ(oracle.fp, r.confusion.fp);
}

}  // namespace
}  // namespace tickwatch::eval
