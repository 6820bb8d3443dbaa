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

#include "tickwatch/detection/detector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tickwatch/core/error.hpp"
#include "tickwatch/core/timeseries.hpp"
#include "tickwatch/kernels/kernels.hpp"

namespace tickwatch::detection {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool IgnoreLowerLimit(const DetectorSpec& spec) {
  return spec.flow == Flow::kUnivariate && spec.spike_threshold && !spec.drop_threshold;
}

bool IgnoreUpperLimit(const DetectorSpec& spec) {
  return spec.flow == Flow::kUnivariate && spec.drop_threshold && !spec.spike_threshold;
}

bool SameDouble(double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); }

bool SameSeries(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!SameDouble(a[i], b[i])) return false;
  }
  return true;
}

template <typename T>
nlohmann::json Optional(const std::optional<T>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

template <typename T>
std::optional<T> ReadOptional(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

std::vector<int> RowBreaches(const FeatureWindow& window, const DetectorSpec& spec) {
  std::vector<int> out(window.size(), 0);
  const double upper = spec.static_upper && !IgnoreUpperLimit(spec) ? *spec.static_upper : kInf;
  const double lower = spec.static_lower && !IgnoreLowerLimit(spec) ? *spec.static_lower : -kInf;
  if (upper == kInf && lower == -kInf) return out;
  for (std::size_t r = 0; r < window.size(); ++r) {
    out[r] = kernels::CountOutside(window.values().row(r), lower, upper) > 0 ? 1 : 0;
  }
  return out;
}

}  // namespace

void DetectorSpec::Validate() const {
  if (hold_window < 1) Fail(ErrorCode::kInvalidInput, "hold_window must be positive");
  if (hold_tolerance < 0 || hold_tolerance >= hold_window) {
    Fail(ErrorCode::kInvalidInput, "hold_tolerance must satisfy 0 <= k < L");
  }
  if (!(smoothing_alpha > 0.0 && smoothing_alpha <= 1.0)) {
    Fail(ErrorCode::kInvalidInput, "smoothing_alpha must lie in (0, 1]");
  }
  if (!(sensitivity > 0.0 && sensitivity <= 1.0)) {
    Fail(ErrorCode::kInvalidInput, "sensitivity must lie in (0, 1]");
  }
  if (seasonality_period) {
    if (*seasonality_period < 1) Fail(ErrorCode::kInvalidInput, "seasonality_period must be positive");
    if (flow != Flow::kUnivariate) {
      Fail(ErrorCode::kInvalidInput, "seasonality applies to the univariate flow only");
    }
  }
  if (static_upper && static_lower && *static_lower > *static_upper) {
    Fail(ErrorCode::kInvalidInput, "static_lower exceeds static_upper");
  }
  if (drop_threshold && *drop_threshold < 0.0) {
    Fail(ErrorCode::kInvalidInput, "drop_threshold is a magnitude and must be >= 0");
  }
  if (attribution_permutations < 1) {
    Fail(ErrorCode::kInvalidInput, "attribution_permutations must be >= 1");
  }
}

nlohmann::json SpecToJson(const DetectorSpec& spec) {
  return {{"model_id", spec.model_id},
          {"model_version", spec.model_version},
          {"flow", spec.flow == Flow::kUnivariate ? "univariate" : "multivariate"},
          {"static_upper", Optional(spec.static_upper)},
          {"static_lower", Optional(spec.static_lower)},
          {"hold_window", spec.hold_window},
          {"hold_tolerance", spec.hold_tolerance},
          {"smoothing_alpha", spec.smoothing_alpha},
          {"seasonality_period", Optional(spec.seasonality_period)},
          {"spike_threshold", Optional(spec.spike_threshold)},
          {"drop_threshold", Optional(spec.drop_threshold)},
          {"sensitivity", spec.sensitivity},
          {"attribution_permutations", spec.attribution_permutations},
          {"attribution_seed", spec.attribution_seed}};
}

DetectorSpec SpecFromJson(const nlohmann::json& j) {
  DetectorSpec spec;
  try {
    spec.model_id = j.value("model_id", std::string());
    spec.model_version = j.value("model_version", 0);
    const std::string flow = j.value("flow", std::string("univariate"));
    if (flow == "univariate") {
      spec.flow = Flow::kUnivariate;
    } else if (flow == "multivariate") {
      spec.flow = Flow::kMultivariate;
    } else {
      Fail(ErrorCode::kInvalidInput, "flow must be univariate or multivariate");
    }
    spec.static_upper = ReadOptional<double>(j, "static_upper");
    spec.static_lower = ReadOptional<double>(j, "static_lower");
    spec.hold_window = j.value("hold_window", spec.hold_window);
    spec.hold_tolerance = j.value("hold_tolerance", spec.hold_tolerance);
    spec.smoothing_alpha = j.value("smoothing_alpha", spec.smoothing_alpha);
    spec.seasonality_period = ReadOptional<int>(j, "seasonality_period");
    spec.spike_threshold = ReadOptional<double>(j, "spike_threshold");
    spec.drop_threshold = ReadOptional<double>(j, "drop_threshold");
    spec.sensitivity = j.value("sensitivity", spec.sensitivity);
    spec.attribution_permutations = j.value("attribution_permutations", spec.attribution_permutations);
    spec.attribution_seed = j.value("attribution_seed", spec.attribution_seed);
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kInvalidInput, std::string("malformed detector spec: ") + e.what());
  }
  spec.Validate();
  return spec;
}

bool operator==(const Verdict& a, const Verdict& b) {
  auto same_attr = [](const auto& x, const auto& y) {
    if (x.has_value() != y.has_value()) return false;
    if (!x) return true;
    return x->feature_contributions == y->feature_contributions &&
           x->baseline_score == y->baseline_score && x->point_score == y->point_score &&
           x->permutations_used == y->permutations_used;
  };
  return a.is_anomaly == b.is_anomaly && a.triggered_by == b.triggered_by &&
         SameSeries(a.model_scores, b.model_scores) && a.raw_scores == b.raw_scores &&
         a.smoothed_scores == b.smoothed_scores && a.breach_count == b.breach_count &&
         a.anomaly_count == b.anomaly_count && a.flagged_ts == b.flagged_ts &&
         same_attr(a.attribution, b.attribution) &&
         a.predicted_value.has_value() == b.predicted_value.has_value() &&
         (!a.predicted_value || *a.predicted_value == *b.predicted_value);
}

nlohmann::json VerdictToJson(const Verdict& v) {
  nlohmann::json j{{"is_anomaly", v.is_anomaly},
                   {"triggered_by", v.triggered_by == Trigger::kRule ? "rule" : "model"},
                   {"raw_scores", v.raw_scores},
                   {"smoothed_scores", v.smoothed_scores},
                   {"breach_count", v.breach_count},
                   {"anomaly_count", v.anomaly_count},
                   {"flagged_ts", v.flagged_ts},
                   {"predicted_value", Optional(v.predicted_value)},
                   {"attribution", nullptr}};
  nlohmann::json scores = nlohmann::json::array();
  for (double s : v.model_scores) scores.push_back(std::isnan(s) ? nlohmann::json(nullptr) : nlohmann::json(s));
  j["model_scores"] = std::move(scores);
  if (v.attribution) {
    j["attribution"] = {{"feature_contributions", v.attribution->feature_contributions},
                        {"baseline_score", v.attribution->baseline_score},
                        {"point_score", v.attribution->point_score},
                        {"permutations_used", v.attribution->permutations_used}};
  }
  return j;
}

int StaticBreachCount(const FeatureWindow& window, const DetectorSpec& spec) {
  const std::vector<int> rows = RowBreaches(window, spec);
  return static_cast<int>(std::count(rows.begin(), rows.end(), 1));
}

bool ApplyHoldTolerance(const std::vector<bool>& flags, int k) {
  return std::count(flags.begin(), flags.end(), true) > k;
}

double EffectiveScoreUpper(double trained_upper, double sensitivity) {
  return trained_upper + (1.0 - sensitivity) * (1.0 - trained_upper);
}

RowScores ScoreRows(const DetectorSpec& spec, const models::DetectorModel* model,
                    const FeatureWindow& window) {
  const bool univariate = spec.flow == Flow::kUnivariate;
  RowScores rows;
  if (model == nullptr) Fail(ErrorCode::kModelUnavailable, "no model artifact for detector");
  if (model->feature_count() != window.feature_count()) {
    Fail(ErrorCode::kInvalidInput, "model expects " + std::to_string(model->feature_count()) +
                                       " signals, window has " +
                                       std::to_string(window.feature_count()));
  }

  // A model trained with a seasonal profile deseasonalizes internally; when
  // the spec asks for seasonality the model does not carry, the window is
  // decomposed in place and the model sees only the residuals.
  models::WindowScores scores;
  bool decomposed = false;
  std::vector<double> seasonal_fit;
  if (univariate && spec.seasonality_period) {
    const auto payload = model->Payload();
    const bool model_has_profile = payload.contains("seasonal") && !payload["seasonal"].is_null() &&
                                   payload["seasonal"].value("period", 0) == *spec.seasonality_period;
    if (!model_has_profile) {
      const SeriesWindow series = window.Column(0);
      const MediffResult parts = MediffExtract(series, *spec.seasonality_period);
      const FeatureWindow residuals = FeatureWindow::FromSeries(
          SeriesWindow(series.signal_id(),
                       [&] {
                         std::vector<TimePoint> pts;
                         for (std::size_t i = 0; i < series.size(); ++i) {
                           pts.push_back({series.points()[i].ts, parts.residuals[i]});
                         }
                         return pts;
                       }(),
                       series.step_ms()));
      scores = model->ScoreWindow(residuals);
      decomposed = true;
      seasonal_fit.resize(series.size());
      for (std::size_t i = 0; i < series.size(); ++i) {
        seasonal_fit[i] = series.points()[i].value - parts.residuals[i];
      }
    }
  }
  if (!decomposed) scores = model->ScoreWindow(window);

  double lo = -kInf;
  double hi = kInf;
  if (univariate) {
    const bool spike = spec.spike_threshold.has_value();
    const bool drop = spec.drop_threshold.has_value();
    if (spike || drop) {
      if (spike) hi = *spec.spike_threshold;
      if (drop) lo = -*spec.drop_threshold;
    } else {
      lo = scores.boundary.lower;
      hi = scores.boundary.upper;
    }
  } else {
    hi = EffectiveScoreUpper(scores.boundary.upper, spec.sensitivity);
  }

  const std::size_t n = window.size();
  rows.lower = lo;
  rows.upper = hi;
  rows.model_scores.assign(n, std::nan(""));
  rows.raw_flags.assign(n, 0.0);
  kernels::FlagOutside(scores.scores, lo, hi, rows.raw_flags);
  for (std::size_t i = 0; i < n; ++i) {
    if (scores.valid[i]) {
      rows.model_scores[i] = scores.scores[i];
    } else {
      rows.raw_flags[i] = 0.0;
    }
  }
  // Smoothing starts from a normal state so a flagged first row decays like
  // any other instead of seeding the recursion at 1.
  std::vector<double> primed(n + 1, 0.0);
  std::copy(rows.raw_flags.begin(), rows.raw_flags.end(), primed.begin() + 1);
  const std::vector<double> smoothed = ExpSmooth(primed, spec.smoothing_alpha);
  rows.smoothed.assign(smoothed.begin() + 1, smoothed.end());

  rows.predicted = scores.predicted;
  if (decomposed) {
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::isnan(rows.predicted[i])) rows.predicted[i] += seasonal_fit[i];
    }
  }
  return rows;
}

Verdict Detect(const DetectorSpec& spec, const models::DetectorModel* model,
               const FeatureWindow& window) {
  spec.Validate();
  const auto hold = static_cast<std::size_t>(spec.hold_window);
  if (window.size() < hold) {
    Fail(ErrorCode::kInsufficientData, "window has " + std::to_string(window.size()) +
                                           " rows, hold window needs " + std::to_string(hold));
  }
  const bool univariate = spec.flow == Flow::kUnivariate;
  if (univariate && window.feature_count() != 1) {
    Fail(ErrorCode::kInvalidInput, "univariate flow expects a single-signal window");
  }

  Verdict verdict;
  verdict.breach_count = StaticBreachCount(window.Tail(hold), spec);
  if (verdict.breach_count > spec.hold_tolerance) {
    verdict.is_anomaly = true;
    verdict.triggered_by = Trigger::kRule;
    return verdict;
  }

  verdict.triggered_by = Trigger::kModel;
  RowScores rows = ScoreRows(spec, model, window);
  const std::size_t n = window.size();
  verdict.model_scores = std::move(rows.model_scores);
  verdict.raw_scores = std::move(rows.raw_flags);
  verdict.smoothed_scores = std::move(rows.smoothed);
  std::vector<bool> hold_flags;
  hold_flags.reserve(hold);
  for (std::size_t i = n - hold; i < n; ++i) {
    const bool flagged = verdict.smoothed_scores[i] >= 0.5;
    hold_flags.push_back(flagged);
    if (flagged) verdict.flagged_ts.push_back(window.ts()[i]);
  }
  verdict.anomaly_count = static_cast<int>(std::count(hold_flags.begin(), hold_flags.end(), true));
  verdict.is_anomaly = ApplyHoldTolerance(hold_flags, spec.hold_tolerance);

  const double predicted = rows.predicted.back();
  if (!std::isnan(predicted)) verdict.predicted_value = predicted;

  if (verdict.is_anomaly && !univariate) {
    verdict.attribution = model->Explain(window.values().row(n - 1),
                                         spec.attribution_permutations, spec.attribution_seed);
  }
  return verdict;
}

SeriesVerdict DetectSeries(const DetectorSpec& spec, const models::DetectorModel* model,
                           const FeatureWindow& window) {
  spec.Validate();
  if (spec.flow == Flow::kUnivariate && window.feature_count() != 1) {
    Fail(ErrorCode::kInvalidInput, "univariate flow expects a single-signal window");
  }
  const auto hold = static_cast<std::size_t>(spec.hold_window);
  const std::size_t n = window.size();
  SeriesVerdict out;
  out.ts = window.ts();
  out.actual = window.values().column(0);
  RowScores rows = ScoreRows(spec, model, window);
  out.predicted = std::move(rows.predicted);
  out.model_scores = std::move(rows.model_scores);
  out.lower = rows.lower;
  out.upper = rows.upper;
  out.flags.assign(n, 0);
  const std::vector<int> breach = RowBreaches(window, spec);
  int breaches = 0;
  int smoothed_hits = 0;
  for (std::size_t i = 0; i < n; ++i) {
    breaches += breach[i];
    smoothed_hits += rows.smoothed[i] >= 0.5 ? 1 : 0;
    if (i >= hold) {
      breaches -= breach[i - hold];
      smoothed_hits -= rows.smoothed[i - hold] >= 0.5 ? 1 : 0;
    }
    if (i + 1 < hold) continue;
    out.flags[i] = (breaches > spec.hold_tolerance || smoothed_hits > spec.hold_tolerance) ? 1 : 0;
  }
  return out;
}

}  // namespace tickwatch::detection
