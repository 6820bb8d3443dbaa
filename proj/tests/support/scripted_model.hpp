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

#include <atomic>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "tickwatch/detection/detector.hpp"
#include "tickwatch/models/model.hpp"

namespace tickwatch::testing {

// Model double whose per-row score is the row's first value, compared
// against a fixed boundary. Counts ScoreWindow calls.
class ScriptedModel : public models::DetectorModel {
 public:
  ScriptedModel(std::size_t features, Boundary boundary)
      : features_(features), boundary_(boundary) {}

  std::string_view type_name() const override { return "scripted"; }
  std::size_t feature_count() const override { return features_; }
  std::size_t min_history() const override { return 0; }

  models::WindowScores ScoreWindow(const FeatureWindow& window) const override {
    ++calls;
    models::WindowScores out;
    out.boundary = boundary_;
    for (std::size_t r = 0; r < window.size(); ++r) {
      out.scores.push_back(window.values()(r, 0));
      out.valid.push_back(true);
      out.predicted.push_back(std::nan(""));
    }
    return out;
  }

  nlohmann::json Payload() const override { return {{"scripted", true}}; }

  std::optional<models::AttributionReport> Explain(std::span<const double> row, int permutations,
                                                   std::uint64_t) const override {
    models::AttributionReport report;
    report.feature_contributions.assign(row.begin(), row.end());
    report.permutations_used = permutations;
    return report;
  }

  mutable std::atomic<int> calls{0};

 private:
  std::size_t features_;
  Boundary boundary_;
};

inline FeatureWindow WindowOf(const std::vector<double>& values, std::int64_t start = 60'000,
                              std::int64_t step = 60'000) {
  return FeatureWindow::FromSeries(MakeRegularWindow("sig", values, start, step));
}

// Random window plus detector spec for property checks: L in [1, 12],
// k in [0, L), optional static limits, N(0, 1.5) values.
struct RandomCase {
  std::vector<double> values;
  detection::DetectorSpec spec;
};

inline RandomCase DrawCase(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> len(1, 12);
  RandomCase c;
  c.spec.model_id = "m";
  c.spec.hold_window = len(rng);
  c.spec.hold_tolerance = std::uniform_int_distribution<int>(0, c.spec.hold_window - 1)(rng);
  c.spec.smoothing_alpha = std::uniform_real_distribution<double>(0.05, 1.0)(rng);
  if (rng() % 2) c.spec.static_upper = std::uniform_real_distribution<double>(1.0, 4.0)(rng);
  if (rng() % 2) c.spec.static_lower = std::uniform_real_distribution<double>(-4.0, -1.0)(rng);
  const int n = c.spec.hold_window + std::uniform_int_distribution<int>(0, 10)(rng);
  std::normal_distribution<double> value(0.0, 1.5);
  for (int i = 0; i < n; ++i) c.values.push_back(value(rng));
  return c;
}

}  // namespace tickwatch::testing
