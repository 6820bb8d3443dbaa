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

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "tickwatch/core/error.hpp"
#include "tickwatch/models/artifact.hpp"
#include "tickwatch/models/iforest.hpp"

namespace tickwatch::models {
namespace {

// Hand formula, written out independently of CFactor.
double HandC(double n) { return 2.0 * (std::log(n - 1.0) + 0.5772156649) - 2.0 * (n - 1.0) / n; }

Matrix PlantedOutlier(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  Matrix m;
  for (int i = 0; i < 1000; ++i) {
    const double row[2] = {dist(rng), dist(rng)};
    m.AppendRow(row);
  }
  const double outlier[2] = {10.0, 10.0};
  m.AppendRow(outlier);
  return m;
}

TEST(CFactorTest, GoldenValues) {
  EXPECT_NEAR(CFactor(2), 0.15443, 1e-5);
  EXPECT_NEAR(CFactor(2), HandC(2), 1e-9);
  EXPECT_NEAR(CFactor(256), 10.244, 1e-3);
  EXPECT_NEAR(CFactor(256), HandC(256), 1e-9);
  EXPECT_GT(CFactor(512), CFactor(256));
  EXPECT_THROW(CFactor(1), Error);
}

TEST(IsolationForestTest, PlantedOutlierHasMaximumScore) {
  const Matrix data = PlantedOutlier(17);
  const auto model = IsolationForestFit(data, {100, 256, 0.01}, 42);
  std::size_t argmax = 0;
  double best = -1.0;
  for (std::size_t r = 0; r < data.rows(); ++r) {
    const double s = model->Score(data.row(r));
    EXPECT_GT(s, 0.0);
    EXPECT_LT(s, 1.0);
    if (s > best) {
      best = s;
      argmax = r;
    }
  }
  EXPECT_EQ(argmax, 1000u);
  const double cluster[2] = {0.0, 0.0};
  EXPECT_GT(best, model->Score(cluster));
  EXPECT_GT(best, model->score_boundary().upper);
}

TEST(IsolationForestTest, StructuralInvariants) {
  const Matrix data = PlantedOutlier(5);
  const auto model = IsolationForestFit(data, {50, 64, 0.01}, 3);
  const int limit = static_cast<int>(std::ceil(std::log2(64.0)));
  for (const auto& tree : model->trees()) {
    EXPECT_LE(tree.Depth(), limit);
    for (const auto& node : tree.nodes) {
      if (node.feature < 0) continue;
      const auto f = static_cast<std::size_t>(node.feature);
      EXPECT_GT(node.split, model->feature_min()[f]);
      EXPECT_LE(node.split, model->feature_max()[f]);
    }
  }
  const auto pairs = IsolationForestFit(data, {20, 2, 0.01}, 3);
  for (const auto& tree : pairs->trees()) EXPECT_EQ(tree.nodes.size(), 3u);
}

TEST(IsolationForestTest, SameSeedSameForest) {
  const Matrix data = PlantedOutlier(5);
  const auto a = IsolationForestFit(data, {30, 128, 0.01}, 7);
  const auto b = IsolationForestFit(data, {30, 128, 0.01}, 7);
  const auto c = IsolationForestFit(data, {30, 128, 0.01}, 8);
  EXPECT_EQ(a->trees(), b->trees());
  EXPECT_NE(a->trees(), c->trees());
  const std::string bytes = SerializeArtifact({kArtifactSchemaVersion, "iforest_mv", 1, a, {}});
  EXPECT_EQ(bytes, SerializeArtifact({kArtifactSchemaVersion, "iforest_mv", 1, b, {}}));
  const auto back = DeserializeArtifact(bytes);
  EXPECT_EQ(SerializeArtifact(back), bytes);
}

TEST(IsolationForestTest, ScoreFormulaFixedPoints) {
  // E[h] == c(n) gives exactly 0.5; longer paths push the score below 0.5.
  EXPECT_DOUBLE_EQ(std::exp2(-CFactor(256) / CFactor(256)), 0.5);
  const Matrix data = PlantedOutlier(5);
  const auto model = IsolationForestFit(data, {50, 256, 0.01}, 3);
  const double center[2] = {0.0, 0.0};
  EXPECT_LT(model->Score(center), 0.5);
  EXPECT_GT(model->ExpectedPathLength(center), CFactor(256));
}

TEST(IsolationForestTest, Errors) {
  Matrix same;
  for (int i = 0; i < 10; ++i) {
    const double row[2] = {1.0, 2.0};
    same.AppendRow(row);
  }
  try {
    IsolationForestFit(same, {10, 4, 0.01}, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kFitFailure);
  }
  const Matrix data = PlantedOutlier(5);
  const auto model = IsolationForestFit(data, {10, 16, 0.01}, 1);
  const double wrong[3] = {0, 0, 0};
  EXPECT_THROW(model->Score(wrong), Error);
  EXPECT_THROW(IsolationForestFit(data, {10, 2000, 0.01}, 1), Error);
}

double ScoreWith(const IsolationForestModel& m, std::vector<double> v) { return m.Score(v); }

TEST(AttributionTest, BaselinePointHasZeroContributions) {
  const Matrix data = PlantedOutlier(5);
  const auto model = IsolationForestFit(data, {50, 128, 0.01}, 3);
  const auto report = Attribute(*model, model->train_medians(), 8, 1);
  for (double c : report.feature_contributions) EXPECT_DOUBLE_EQ(c, 0.0);
}

TEST(AttributionTest, SingleFeatureGetsTheWholeDifference) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> dist(0.0, 1.0);
  Matrix data;
  for (int i = 0; i < 300; ++i) {
    const double v = dist(rng);
    data.AppendRow(std::span<const double>(&v, 1));
  }
  const auto model = IsolationForestFit(data, {50, 128, 0.01}, 3);
  const std::vector<double> point{4.0};
  const auto report = Attribute(*model, point, 5, 1);
  EXPECT_DOUBLE_EQ(report.feature_contributions[0], report.point_score - report.baseline_score);
}

TEST(AttributionTest, TwoFeaturesMatchBruteForceShapley) {
  const Matrix data = PlantedOutlier(5);
  const auto model = IsolationForestFit(data, {50, 128, 0.01}, 3);
  const std::vector<double> point{3.0, -0.5};
  const auto& m = model->train_medians();
  const double v0 = ScoreWith(*model, m);
  const double v1 = ScoreWith(*model, {point[0], m[1]});
  const double v2 = ScoreWith(*model, {m[0], point[1]});
  const double v12 = ScoreWith(*model, point);
  const double phi1 = 0.5 * ((v1 - v0) + (v12 - v2));
  const double phi2 = 0.5 * ((v2 - v0) + (v12 - v1));
  const auto report = Attribute(*model, point, 2, 99);
  EXPECT_EQ(report.permutations_used, 2);
  EXPECT_NEAR(report.feature_contributions[0], phi1, 1e-12);
  EXPECT_NEAR(report.feature_contributions[1], phi2, 1e-12);
}

TEST(AttributionTest, EfficiencyHolds) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> dist(0.0, 1.0);
  for (std::size_t f : {3u, 4u, 6u}) {
    Matrix data;
    std::vector<double> row(f);
    for (int i = 0; i < 400; ++i) {
      for (double& v : row) v = dist(rng);
      data.AppendRow(row);
    }
    const auto model = IsolationForestFit(data, {40, 128, 0.01}, f);
    for (int trial = 0; trial < 10; ++trial) {
      for (double& v : row) v = 3.0 * dist(rng);
      const int perms = f <= 4 ? 24 : 64;
      const auto report = Attribute(*model, row, perms, static_cast<std::uint64_t>(trial));
      double sum = 0.0;
      for (double c : report.feature_contributions) sum += c;
      const double gap = report.point_score - report.baseline_score;
      const double tol = f <= 4 ? 1e-12 : 0.05 * std::fabs(gap) + 1e-6;
      EXPECT_NEAR(sum, gap, tol);
    }
  }
}

}  // namespace
}  // namespace tickwatch::models
