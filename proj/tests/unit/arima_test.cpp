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

#include <cmath>
#include <random>
#include <vector>

#include "tickwatch/core/error.hpp"
#include "tickwatch/models/arima.hpp"
#include "tickwatch/models/artifact.hpp"

namespace tickwatch::models {
namespace {

SeriesWindow Window(const std::vector<double>& v) {
  return MakeRegularWindow("sig", v, 60'000, 60'000);
}

std::vector<double> SimulateAr1(double phi, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<double> x(n);
  double prev = 0.0;
  for (int burn = 0; burn < 200; ++burn) prev = phi * prev + noise(rng);
  for (double& v : x) v = prev = phi * prev + noise(rng);
  return x;
}

// Independent lag-1 Yule-Walker oracle: phi = gamma_1 / gamma_0.
double Lag1Autocorrelation(const std::vector<double>& x) {
  double mean = 0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double g0 = 0, g1 = 0;
  for (std::size_t t = 0; t < x.size(); ++t) {
    g0 += (x[t] - mean) * (x[t] - mean);
    if (t > 0) g1 += (x[t] - mean) * (x[t - 1] - mean);
  }
  return g1 / g0;
}

TEST(ArimaTest, ConstantSeriesForecastsTheConstant) {
  const auto w = Window(std::vector<double>(60, 4.25));
  const auto model = ArimaFit(w, {}, 1);
  EXPECT_NEAR(model->Forecast(w), 4.25, 1e-9);
  for (double r : model->OneStepResiduals(w.values())) {
    if (!std::isnan(r)) EXPECT_NEAR(r, 0.0, 1e-9);
  }
}

TEST(ArimaTest, RecoversAr1Coefficient) {
  const auto x = SimulateAr1(0.8, 2000, 99);
  ArimaFitOptions options;
  options.order = ArimaOrder{1, 0, 0};
  const auto model = ArimaFit(Window(x), options, 1);
  ASSERT_EQ(model->ar_coeffs().size(), 1u);
  const double phi = model->ar_coeffs()[0];
  EXPECT_GE(phi, 0.7);
  EXPECT_LE(phi, 0.9);
  EXPECT_NEAR(phi, Lag1Autocorrelation(x), 0.05);
  EXPECT_TRUE(model->stationary());
}

TEST(ArimaTest, DifferencedRampContinues) {
  std::vector<double> ramp(50);
  for (std::size_t i = 0; i < ramp.size(); ++i) ramp[i] = 3.0 + 0.5 * static_cast<double>(i);
  ArimaFitOptions options;
  options.order = ArimaOrder{0, 1, 0};
  const auto model = ArimaFit(Window(ramp), options, 1);
  EXPECT_NEAR(model->Forecast(Window(ramp)), ramp.back() + 0.5, 1e-6);
  const auto residuals = model->OneStepResiduals(ramp);
  EXPECT_TRUE(std::isnan(residuals[0]));
  for (std::size_t i = 1; i < residuals.size(); ++i) EXPECT_NEAR(residuals[i], 0.0, 1e-9);
}

TEST(ArimaTest, AnalyticAr1Forecast) {
  const ArimaModel model({1, 0, 0}, {0.5}, {}, 0.0, Boundary{-1, 1});
  EXPECT_DOUBLE_EQ(model.Forecast(Window({4.0})), 2.0);
}

TEST(ArimaTest, NoiselessAr2RecurrenceIsReproduced) {
  const double omega = 0.3;
  std::vector<double> x{1.0, std::cos(omega)};
  for (int t = 2; t < 200; ++t) x.push_back(2 * std::cos(omega) * x[t - 1] - x[t - 2]);
  ArimaFitOptions options;
  options.order = ArimaOrder{2, 0, 0};
  const auto model = ArimaFit(Window(std::vector<double>(x.begin(), x.end() - 1)), options, 1);
  const double next = model->Forecast(Window(std::vector<double>(x.begin(), x.end() - 1)));
  EXPECT_NEAR(next, x.back(), 1e-6);
}

TEST(ArimaTest, ShortSeriesAndShortHistory) {
  try {
    ArimaFit(Window(std::vector<double>(29, 1.0)), {}, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInsufficientData);
  }
  ArimaFitOptions big;
  big.order = ArimaOrder{3, 0, 2};  // needs 60 points
  try {
    ArimaFit(Window(SimulateAr1(0.5, 59, 1)), big, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInsufficientData);
  }
  const ArimaModel model({2, 1, 1}, {0.1, 0.1}, {0.2}, 0.0, Boundary{-1, 1});
  try {
    model.Forecast(Window({1.0, 2.0, 3.0}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInsufficientData);
  }
}

TEST(ArimaTest, AutoOrderPrefersAutoregressionOnArData) {
  const auto model = ArimaFit(Window(SimulateAr1(0.7, 600, 5)), {}, 1);
  EXPECT_GE(model->order().p + model->order().q, 1);
  EXPECT_LE(model->order().p, 3);
  EXPECT_LE(model->order().q, 2);
  EXPECT_LE(model->order().d, 1);
}

TEST(ArimaTest, SpectralRadius) {
  EXPECT_DOUBLE_EQ(ArSpectralRadius(std::vector<double>{}), 0.0);
  EXPECT_NEAR(ArSpectralRadius(std::vector<double>{0.5}), 0.5, 1e-12);
  EXPECT_NEAR(ArSpectralRadius(std::vector<double>{2 * std::cos(0.3), -1.0}), 1.0, 1e-9);
  EXPECT_FALSE(ArimaModel({1, 0, 0}, {1.2}, {}, 0.0, Boundary{}).stationary());
}

TEST(ArimaTest, SeasonalProfileIsRemovedAndRestored) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> noise(0.0, 0.1);
  const int period = 24;
  std::vector<double> x(period * 10);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = 10.0 + 5.0 * std::sin(2 * M_PI * static_cast<double>(i % period) / period) + noise(rng);
  }
  ArimaFitOptions options;
  options.seasonality_period = period;
  const auto model = ArimaFit(Window(x), options, 1);
  ASSERT_TRUE(model->seasonal().has_value());
  const auto window = Window(x);
  const double forecast = model->Forecast(window);
  const double expected = 10.0 + 5.0 * std::sin(2 * M_PI * static_cast<double>(x.size() % period) / period);
  EXPECT_NEAR(forecast, expected, 0.5);
  // residual boundary reflects the 0.1 noise, not the 5.0 seasonal swing
  EXPECT_LT(model->resid_boundary().upper, 1.0);
}

TEST(ArimaTest, ArtifactRoundTripIsBitExactAndRefitIsDeterministic) {
  const auto x = SimulateAr1(0.6, 300, 8);
  ArimaFitOptions options;
  options.seasonality_period = 12;
  const auto a = ArimaFit(Window(x), options, 4);
  const auto b = ArimaFit(Window(x), options, 4);
  ModelArtifact art{kArtifactSchemaVersion, "arima_uv", 1234, a, {{"k", 1}}};
  ModelArtifact art_b{kArtifactSchemaVersion, "arima_uv", 1234, b, {{"k", 1}}};
  const std::string bytes = SerializeArtifact(art);
  EXPECT_EQ(bytes, SerializeArtifact(art_b));
  const ModelArtifact back = DeserializeArtifact(bytes);
  EXPECT_EQ(SerializeArtifact(back), bytes);
  EXPECT_EQ(back.model_type, "arima_uv");
  EXPECT_EQ(back.created_ts, 1234);
  const auto window = FeatureWindow::FromSeries(Window(x));
  const auto s1 = a->ScoreWindow(window);
  const auto s2 = back.model->ScoreWindow(window);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (s1.valid[i]) EXPECT_EQ(s1.scores[i], s2.scores[i]);
  }
}

TEST(ArimaTest, ScoreWindowFlagsOnlyScorableRows) {
  const ArimaModel model({2, 1, 0}, {0.2, 0.1}, {}, 0.0, Boundary{-1, 1});
  const auto scores = model.ScoreWindow(FeatureWindow::FromSeries(Window({1, 2, 3, 4, 5, 6})));
  EXPECT_EQ(model.min_history(), 3u);
  EXPECT_FALSE(scores.valid[2]);
  EXPECT_TRUE(scores.valid[3]);
}

}  // namespace
}  // namespace tickwatch::models
