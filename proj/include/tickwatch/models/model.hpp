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
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "tickwatch/core/feature_window.hpp"
#include "tickwatch/core/timeseries.hpp"

namespace tickwatch::models {

struct AttributionReport {
  std::vector<double> feature_contributions;
  double baseline_score = 0.0;
  double point_score = 0.0;
  int permutations_used = 0;
};

// Per-row output of a model over a window. `scores` are in the model's own
// units (residuals for forecasters, anomaly scores for isolation models) and
// are compared against `boundary`; rows without enough history are marked
// invalid and never count as anomalous.
struct WindowScores {
  std::vector<double> scores;
  std::vector<bool> valid;
  std::vector<double> predicted;  // predicted signal value; NaN when n/a
  Boundary boundary;
};

// Contract every detector model implements: fit is provided by the plug-in
// registration, the fitted object scores windows and serializes itself.
// Fitted models are immutable and safe to share across threads.
class DetectorModel {
 public:
  virtual ~DetectorModel() = default;

  virtual std::string_view type_name() const = 0;
  virtual std::size_t feature_count() const = 0;
  // Rows at the front of a window consumed as history before scoring starts.
  virtual std::size_t min_history() const = 0;
  virtual WindowScores ScoreWindow(const FeatureWindow& window) const = 0;
  virtual nlohmann::json Payload() const = 0;

  // Attribution for one row; models without an explainer return nullopt.
  virtual std::optional<AttributionReport> Explain(std::span<const double> row,
                                                   int permutations,
                                                   std::uint64_t seed) const {
    (void)row;
    (void)permutations;
    (void)seed;
    return std::nullopt;
  }
};

using ModelPtr = std::shared_ptr<const DetectorModel>;

struct ModelPlugin {
  std::string type_name;
  bool multivariate = false;
  std::function<ModelPtr(const FeatureWindow& training, const nlohmann::json& params,
                         std::uint64_t seed)>
      fit;
  std::function<ModelPtr(const nlohmann::json& payload)> deserialize;
};

// Registers or replaces a plug-in. The built-in types (arima_uv, iforest_mv)
// are registered on first lookup.
void RegisterModelPlugin(ModelPlugin plugin);
const ModelPlugin& FindModelPlugin(std::string_view type_name);
std::vector<std::string> RegisteredModelTypes();

}  // namespace tickwatch::models
