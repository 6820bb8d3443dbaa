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

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "tickwatch/core/timeseries.hpp"
#include "tickwatch/models/model.hpp"

namespace tickwatch::models {

struct ArimaOrder {
  int p = 0;
  int d = 0;
  int q = 0;

  friend bool operator==(const ArimaOrder&, const ArimaOrder&) = default;
};

struct ArimaFitOptions {
  std::optional<ArimaOrder> order;  // auto-select by AIC when empty
  double iqr_multiplier = 1.5;
  // When set, a seasonal profile is extracted first and the model is fit on
  // the deseasonalized residuals.
  std::optional<int> seasonality_period;
  int max_iterations = 50;
};

// ARIMA(p, d, q) with intercept, estimated by conditional sum of squares.
// A stored seasonal profile, when present, is removed from every window
// before forecasting and added back to the predictions.
class ArimaModel final : public DetectorModel {
 public:
  ArimaModel(ArimaOrder order, std::vector<double> ar, std::vector<double> ma,
             double intercept, Boundary resid_boundary,
             std::optional<SeasonalProfile> seasonal = std::nullopt);

  static std::shared_ptr<const ArimaModel> FromPayload(const nlohmann::json& payload);

  const ArimaOrder& order() const { return order_; }
  const std::vector<double>& ar_coeffs() const { return ar_; }
  const std::vector<double>& ma_coeffs() const { return ma_; }
  double intercept() const { return intercept_; }
  const Boundary& resid_boundary() const { return resid_boundary_; }
  const std::optional<SeasonalProfile>& seasonal() const { return seasonal_; }
  bool stationary() const { return stationary_; }
  double aic() const { return aic_; }
  void set_aic(double aic) { aic_ = aic; }

  // One-step-ahead forecast following the last point of `history`.
  double Forecast(const SeriesWindow& history) const;

  // In-sample one-step residuals of a (deseasonalized) value sequence. Entry
  // i is NaN for the first d + p points.
  std::vector<double> OneStepResiduals(std::span<const double> values) const;

  std::string_view type_name() const override { return "arima_uv"; }
  std::size_t feature_count() const override { return 1; }
  std::size_t min_history() const override;
  WindowScores ScoreWindow(const FeatureWindow& window) const override;
  nlohmann::json Payload() const override;

 private:
  std::vector<double> Deseasonalize(const SeriesWindow& series) const;
  // Returns predictions for positions 0..n (n + 1 entries; the last is the
  // forecast beyond the end) in the differenced domain mapped back to levels.
  std::vector<double> Predictions(std::span<const double> values) const;

  ArimaOrder order_;
  std::vector<double> ar_;
  std::vector<double> ma_;
  double intercept_;
  Boundary resid_boundary_;
  std::optional<SeasonalProfile> seasonal_;
  bool stationary_ = true;
  double aic_ = 0.0;
};

std::shared_ptr<const ArimaModel> ArimaFit(const SeriesWindow& series,
                                           const ArimaFitOptions& options,
                                           std::uint64_t seed);

// Minimum training length for an order: max(30, 10 * (p + q + 1)).
std::size_t ArimaMinTrainingLength(const ArimaOrder& order);

// Largest modulus among the roots of the AR characteristic polynomial
// (spectral radius of the companion matrix). 0 for p == 0.
double ArSpectralRadius(std::span<const double> ar);

// Yule-Walker AR(p) estimate of a demeaned sample.
std::vector<double> YuleWalker(std::span<const double> values, int p);

}  // namespace tickwatch::models
