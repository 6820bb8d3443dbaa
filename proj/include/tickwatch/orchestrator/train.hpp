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
#include <string>
#include <vector>

#include "json.hpp"
#include "tickwatch/core/feature_window.hpp"
#include "tickwatch/detection/detector.hpp"
#include "tickwatch/models/model.hpp"
#include "tickwatch/registry/registry.hpp"

namespace tickwatch::orchestrator {

enum class TrainMode { kPreview, kFull };

struct TrainRequest {
  std::string model_type;
  std::vector<std::string> signal_ids;
  detection::DetectorSpec spec;
  nlohmann::json params = nlohmann::json::object();  // overlays the type defaults
  TrainMode mode = TrainMode::kFull;
  bool register_model = false;
  std::optional<std::string> model_id;  // retrain: next version of this model
  std::string channel_ref;
  std::optional<double> noise_eta;
  std::uint64_t seed = 1;
};

nlohmann::json TrainRequestToJson(const TrainRequest& r);
TrainRequest TrainRequestFromJson(const nlohmann::json& j);

struct TrainResult {
  models::ModelPtr model;
  std::string artifact_bytes;
  std::string artifact_ref;  // empty for temporary (preview) artifacts
  bool temporary = true;
  detection::DetectorSpec spec;
  nlohmann::json params;
  nlohmann::json train_summary;
  std::size_t trained_rows = 0;
  std::optional<registry::ModelRecord> record;
};

// Rows the inference tick fetches for a model: enough history for the model,
// the hold window, a smoothing lead-in, a seasonal fallback, and never less
// than the type's min_prediction_step.
std::size_t InferenceWindowLength(const models::DetectorModel& model,
                                  const detection::DetectorSpec& spec,
                                  const std::string& model_type);

// ModelRecord.train_summary: step_ms, trained_rows, trained_at,
// window_length and the first signal's DistributionSummary (null when the
// signal is constant).
nlohmann::json BuildTrainSummary(const models::DetectorModel& model,
                                 const detection::DetectorSpec& spec, const std::string& model_type,
                                 const FeatureWindow& window, std::int64_t now);

// Stored datasets of `signal_ids`, aligned, restricted to the trailing three
// days in preview mode.
FeatureWindow LoadTrainingWindow(const registry::Registry& registry,
                                 const std::vector<std::string>& signal_ids, TrainMode mode);

// Preprocess (optional noise), fit through the model plug-in, enrich the
// artifact with the detector parameters and training summary, serialize.
// Full runs with register_model write the artifact and a new registry
// version; preview artifacts are never stored.
TrainResult RunTrainJob(registry::Registry& registry, const TrainRequest& request,
                        std::int64_t now);

struct PreviewResult {
  TrainResult train;
  detection::SeriesVerdict series;
};

// Fast-train on the trailing three days and chart the detector over them.
PreviewResult RunPreview(registry::Registry& registry, TrainRequest request, std::int64_t now);

nlohmann::json SeriesVerdictToJson(const detection::SeriesVerdict& s);

}  // namespace tickwatch::orchestrator
