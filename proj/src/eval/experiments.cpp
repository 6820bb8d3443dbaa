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

#include "tickwatch/eval/experiments.hpp"

#include <chrono>

#include "tickwatch/models/model.hpp"

namespace tickwatch::eval {
namespace {

double MsSince(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

detection::DetectorSpec PointSpec() {
  detection::DetectorSpec spec;
  spec.hold_window = 1;
  spec.hold_tolerance = 0;
  spec.smoothing_alpha = 1.0;
  return spec;
}

}  // namespace

ArmResult RunArm(const LabeledDataset& dataset, const Arm& arm, std::uint64_t seed) {
  const auto& plugin = models::FindModelPlugin(arm.model_type);
  const FeatureWindow& w = dataset.window;
  Matrix train_values(dataset.train_rows, w.feature_count());
  for (std::size_t i = 0; i < dataset.train_rows; ++i) {
    std::copy(w.values().row(i).begin(), w.values().row(i).end(), train_values.row(i).begin());
  }
  const FeatureWindow training(w.signal_ids(),
                               std::vector<std::int64_t>(w.ts().begin(), w.ts().begin() + static_cast<std::ptrdiff_t>(dataset.train_rows)),
                               std::move(train_values), w.step_ms());

  ArmResult result;
  result.name = arm.name;
  auto t0 = std::chrono::steady_clock::now();
  const models::ModelPtr model = plugin.fit(training, arm.params, seed);
  result.fit_ms = MsSince(t0);

  t0 = std::chrono::steady_clock::now();
  const auto series = detection::DetectSeries(arm.spec, model.get(), w);
  result.score_ms = MsSince(t0);

  result.predicted.assign(series.flags.begin() + static_cast<std::ptrdiff_t>(dataset.train_rows),
                          series.flags.end());
  result.confusion = Confuse(result.predicted,
                             std::span<const int>(dataset.labels).subspan(dataset.train_rows));
  return result;
}

std::vector<Arm> SeasonalArms() {
  const nlohmann::json order = {{"p", 2}, {"d", 0}, {"q", 0}};
  Arm plain{"arima", "arima_uv", {{"order", order}, {"iqr_multiplier", 3.0}}, PointSpec()};
  Arm seasonal = plain;
  seasonal.name = "arima+mediff";
  seasonal.params["seasonality_period"] = 1440;
  seasonal.spec.seasonality_period = 1440;
  return {plain, seasonal};
}

std::vector<Arm> EnrichmentArms() {
  const nlohmann::json params = {{"num_trees", 100}, {"subsample_n", 256}, {"contamination", 0.01}};
  detection::DetectorSpec base = PointSpec();
  base.flow = detection::Flow::kMultivariate;
  Arm plain{"iforest", "iforest_mv", params, base};
  Arm hold = plain;
  hold.name = "iforest+hold";
  hold.spec.hold_window = 3;
  hold.spec.hold_tolerance = 1;
  Arm smooth = hold;
  smooth.name = "iforest+hold+smoothing";
  smooth.spec.smoothing_alpha = 0.45;
  return {plain, hold, smooth};
}

nlohmann::json ArmResultToJson(const ArmResult& r) {
  nlohmann::json j = ConfusionToJson(r.confusion);
  j["arm"] = r.name;
  j["fit_ms"] = r.fit_ms;
  j["score_ms"] = r.score_ms;
  return j;
}

}  // namespace tickwatch::eval
