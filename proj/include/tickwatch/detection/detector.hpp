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
#include <string>
#include <vector>

#include "json.hpp"
#include "tickwatch/core/feature_window.hpp"
#include "tickwatch/models/model.hpp"

namespace tickwatch::detection {

enum class Flow { kUnivariate, kMultivariate };

// Per-model detection settings. Thresholds are in signal units; spike and
// drop thresholds are residual limits (forecast error) for the univariate
// flow, drop_threshold given as a positive magnitude.
struct DetectorSpec {
  std::string model_id;
  int model_version = 0;
  Flow flow = Flow::kUnivariate;
  std::optional<double> static_upper;
  std::optional<double> static_lower;
  int hold_window = 5;     // L
  int hold_tolerance = 1;  // k, strictly less than L
  double smoothing_alpha = 0.6;
  std::optional<int> seasonality_period;
  std::optional<double> spike_threshold;
  std::optional<double> drop_threshold;
  double sensitivity = 1.0;
  int attribution_permutations = 64;
  std::uint64_t attribution_seed = 0;

  // Throws InvalidInput naming the violated constraint.
  void Validate() const;

  friend bool operator==(const DetectorSpec&, const DetectorSpec&) = default;
};

nlohmann::json SpecToJson(const DetectorSpec& spec);
DetectorSpec SpecFromJson(const nlohmann::json& j);

enum class Trigger { kRule, kModel };

struct Verdict {
  bool is_anomaly = false;
  Trigger triggered_by = Trigger::kModel;
  std::vector<double> model_scores;     // model units, NaN where not scorable
  std::vector<double> raw_scores;       // binarized: 1 anomalous, 0 normal
  std::vector<double> smoothed_scores;  // exp-smoothed raw_scores
  int breach_count = 0;
  int anomaly_count = 0;
  std::vector<std::int64_t> flagged_ts;  // smoothed >= 0.5 inside the hold window
  std::optional<models::AttributionReport> attribution;
  std::optional<double> predicted_value;

  friend bool operator==(const Verdict& a, const Verdict& b);
};

nlohmann::json VerdictToJson(const Verdict& v);

// Rows of `window` whose value (any signal, for multivariate windows) lies
// above static_upper or below static_lower. In the univariate flow a spec
// with only a spike (drop) threshold ignores the lower (upper) static limit.
int StaticBreachCount(const FeatureWindow& window, const DetectorSpec& spec);

// True iff more than k entries are set.
bool ApplyHoldTolerance(const std::vector<bool>& flags, int k);

// Effective multivariate score limit: sensitivity 1 keeps the trained
// boundary, sensitivity -> 0 widens it toward 1.
double EffectiveScoreUpper(double trained_upper, double sensitivity);

// One pass of the detection flow over a rolling window:
//   1. static-threshold breaches in the hold window above k fire the rule
//      path at once and the model is not consulted;
//   2. otherwise the model scores each row (after seasonal adjustment),
//      scores are binarized against the boundary, exp-smoothed, and the hold
//      tolerance is applied to the last L smoothed flags;
//   3. multivariate anomalies carry an attribution of the newest row.
Verdict Detect(const DetectorSpec& spec, const models::DetectorModel* model,
               const FeatureWindow& window);

// Model output per row before the hold rule. Flags are 0/1; rows the model
// cannot score carry a NaN score and a 0 flag.
struct RowScores {
  std::vector<double> model_scores;
  std::vector<double> raw_flags;
  std::vector<double> smoothed;
  std::vector<double> predicted;  // NaN when the model has no forecast
  double lower = 0.0;
  double upper = 0.0;
};

// The scoring half of Detect: seasonal adjustment, limits, flags and
// smoothing over every row. Throws ModelUnavailable for a null model.
RowScores ScoreRows(const DetectorSpec& spec, const models::DetectorModel* model,
                    const FeatureWindow& window);

// Detect evaluated at every row of a window, for charting. flags[t] is the
// verdict Detect would return on the window ending at t (rule or model
// path); rows before the first full hold window are 0.
struct SeriesVerdict {
  std::vector<std::int64_t> ts;
  std::vector<double> actual;  // first signal
  std::vector<double> predicted;
  std::vector<double> model_scores;
  std::vector<int> flags;
  double lower = 0.0;
  double upper = 0.0;
};

SeriesVerdict DetectSeries(const DetectorSpec& spec, const models::DetectorModel* model,
                           const FeatureWindow& window);

}  // namespace tickwatch::detection
