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

#include "tickwatch/orchestrator/train.hpp"

#include <algorithm>
#include <cmath>

#include "tickwatch/core/error.hpp"
#include "tickwatch/drift/monitor.hpp"
#include "tickwatch/drift/statistics.hpp"
#include "tickwatch/models/artifact.hpp"
#include "tickwatch/models/iforest.hpp"

namespace tickwatch::orchestrator {
namespace {

constexpr std::size_t kSmoothingLeadIn = 10;

nlohmann::json MergeParams(const std::string& model_type, const nlohmann::json& overrides) {
  nlohmann::json merged = registry::ModelConfigFor(model_type).default_params;
  if (!overrides.is_null() && !overrides.is_object()) {
    Fail(ErrorCode::kInvalidInput, "params must be an object");
  }
  for (const auto& [key, value] : overrides.items()) merged[key] = value;
  return merged;
}

FeatureWindow WithNoise(const FeatureWindow& window, double eta, std::uint64_t seed) {
  Matrix noisy = window.values();
  for (std::size_t c = 0; c < window.feature_count(); ++c) {
    const std::vector<double> column = InjectNoise(window.values().column(c), eta, seed + c);
    for (std::size_t r = 0; r < window.size(); ++r) noisy(r, c) = column[r];
  }
  return FeatureWindow(window.signal_ids(), window.ts(), std::move(noisy), window.step_ms());
}

}  // namespace

nlohmann::json TrainRequestToJson(const TrainRequest& r) {
  return {{"model_type", r.model_type},
          {"signal_ids", r.signal_ids},
          {"spec", detection::SpecToJson(r.spec)},
          {"params", r.params},
          {"mode", r.mode == TrainMode::kPreview ? "preview" : "full"},
          {"register", r.register_model},
          {"model_id", r.model_id ? nlohmann::json(*r.model_id) : nlohmann::json(nullptr)},
          {"channel_ref", r.channel_ref},
          {"noise_eta", r.noise_eta ? nlohmann::json(*r.noise_eta) : nlohmann::json(nullptr)},
          {"seed", r.seed}};
}

TrainRequest TrainRequestFromJson(const nlohmann::json& j) {
  TrainRequest r;
  try {
    r.model_type = j.at("model_type").get<std::string>();
    r.signal_ids = j.at("signal_ids").get<std::vector<std::string>>();
    nlohmann::json spec = j.value("spec", nlohmann::json::object());
    if (!spec.contains("flow")) {
      spec["flow"] = models::FindModelPlugin(r.model_type).multivariate ? "multivariate" : "univariate";
    }
    r.spec = detection::SpecFromJson(spec);
    r.params = j.value("params", nlohmann::json::object());
    const std::string mode = j.value("mode", std::string("full"));
    if (mode != "full" && mode != "preview") Fail(ErrorCode::kInvalidInput, "mode must be full or preview");
    r.mode = mode == "preview" ? TrainMode::kPreview : TrainMode::kFull;
    r.register_model = j.value("register", false);
    if (j.contains("model_id") && !j["model_id"].is_null()) r.model_id = j["model_id"].get<std::string>();
    r.channel_ref = j.value("channel_ref", std::string());
    if (j.contains("noise_eta") && !j["noise_eta"].is_null()) r.noise_eta = j["noise_eta"].get<double>();
    r.seed = j.value("seed", std::uint64_t{1});
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kInvalidInput, std::string("malformed train request: ") + e.what());
  }
  return r;
}

std::size_t InferenceWindowLength(const models::DetectorModel& model,
                                  const detection::DetectorSpec& spec,
                                  const std::string& model_type) {
  std::size_t n = model.min_history() + static_cast<std::size_t>(spec.hold_window) + kSmoothingLeadIn;
  if (spec.seasonality_period) {
    const auto payload = model.Payload();
    const bool stored = payload.contains("seasonal") && !payload["seasonal"].is_null() &&
                        payload["seasonal"].value("period", 0) == *spec.seasonality_period;
    if (!stored) n = std::max(n, 2 * static_cast<std::size_t>(*spec.seasonality_period));
  }
  return std::max(n, registry::ModelConfigFor(model_type).min_prediction_step);
}

FeatureWindow LoadTrainingWindow(const registry::Registry& registry,
                                 const std::vector<std::string>& signal_ids, TrainMode mode) {
  if (signal_ids.empty()) Fail(ErrorCode::kInvalidInput, "no signals to train on");
  std::vector<SeriesWindow> series;
  for (const auto& id : signal_ids) series.push_back(registry.LoadDataset(id).ToWindow());
  FeatureWindow window = FeatureWindow::Align(series);
  if (mode == TrainMode::kPreview) {
    const auto rows = static_cast<std::size_t>(drift::kPreviewSpanMs / window.step_ms());
    window = window.Tail(rows);
  }
  return window;
}

nlohmann::json BuildTrainSummary(const models::DetectorModel& model,
                                 const detection::DetectorSpec& spec, const std::string& model_type,
                                 const FeatureWindow& window, std::int64_t now) {
  nlohmann::json summary{{"step_ms", window.step_ms()},
                         {"trained_rows", window.size()},
                         {"trained_at", now},
                         {"window_length", InferenceWindowLength(model, spec, model_type)},
                         {"distribution", nullptr}};
  try {
    summary["distribution"] = drift::SummaryToJson(drift::Summarize(window.values().column(0)));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kDegenerateDistribution) throw;  // constant signal: no drift baseline
  }
  return summary;
}

TrainResult RunTrainJob(registry::Registry& registry, const TrainRequest& request,
                        std::int64_t now) {
  const registry::ModelConfig& config = registry::ModelConfigFor(request.model_type);
  const models::ModelPlugin& plugin = models::FindModelPlugin(request.model_type);

  TrainResult result;
  result.spec = request.spec;
  result.spec.flow = plugin.multivariate ? detection::Flow::kMultivariate : detection::Flow::kUnivariate;
  result.spec.Validate();
  result.params = MergeParams(request.model_type, request.params);
  // A detector asking for seasonality makes the forecaster learn the profile
  // so inference never has to decompose live windows.
  if (request.model_type == "arima_uv" && result.spec.seasonality_period &&
      result.params["seasonality_period"].is_null()) {
    result.params["seasonality_period"] = *result.spec.seasonality_period;
  }

  FeatureWindow window = LoadTrainingWindow(registry, request.signal_ids, request.mode);
  const std::size_t needed = request.mode == TrainMode::kPreview ? config.min_preview_length
                                                                   : config.min_training_length;
  if (window.size() < needed) {
    Fail(ErrorCode::kInsufficientData,
         std::string(request.mode == TrainMode::kPreview ? "preview" : "full") + " training needs " +
             std::to_string(needed) + " aligned samples, dataset has " + std::to_string(window.size()));
  }
  if (request.noise_eta && *request.noise_eta > 0.0) {
    window = WithNoise(window, *request.noise_eta, request.seed);
  }

  result.model = plugin.fit(window, result.params, request.seed);
  result.trained_rows = window.size();
  result.temporary = request.mode == TrainMode::kPreview;

  result.train_summary = BuildTrainSummary(*result.model, result.spec, request.model_type, window, now);

  models::ModelArtifact artifact;
  artifact.model_type = request.model_type;
  artifact.created_ts = now;
  artifact.model = result.model;
  artifact.config = {{"params", result.params},
                     {"spec", detection::SpecToJson(result.spec)},
                     {"trained_rows", result.trained_rows},
                     {"train_summary", result.train_summary},
                     {"temporary", result.temporary}};
  if (const auto* forest = dynamic_cast<const models::IsolationForestModel*>(result.model.get())) {
    artifact.config["explain_baseline"] = forest->train_medians();
  }
  result.artifact_bytes = models::SerializeArtifact(artifact);

  if (request.mode == TrainMode::kFull && request.register_model) {
    result.artifact_ref = registry.SaveArtifact(result.artifact_bytes);
    registry::ModelRecord draft;
    if (request.model_id) draft.model_id = *request.model_id;
    draft.model_type = request.model_type;
    draft.signal_ids = request.signal_ids;
    draft.spec = result.spec;
    draft.params = result.params;
    draft.artifact_ref = result.artifact_ref;
    draft.channel_ref = request.channel_ref;
    draft.train_summary = result.train_summary;
    result.record = registry.RegisterModel(draft, now, true);
    result.spec = result.record->spec;
  }
  return result;
}

PreviewResult RunPreview(registry::Registry& registry, TrainRequest request, std::int64_t now) {
  request.mode = TrainMode::kPreview;
  request.register_model = false;
  PreviewResult out;
  out.train = RunTrainJob(registry, request, now);
  const FeatureWindow window = LoadTrainingWindow(registry, request.signal_ids, TrainMode::kPreview);
  out.series = detection::DetectSeries(out.train.spec, out.train.model.get(), window);
  return out;
}

nlohmann::json SeriesVerdictToJson(const detection::SeriesVerdict& s) {
  auto nullable = [](const std::vector<double>& v) {
    nlohmann::json arr = nlohmann::json::array();
    for (double x : v) arr.push_back(std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr));
    return arr;
  };
  auto limit = [](double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); };
  return {{"ts", s.ts},
          {"original", nullable(s.actual)},
          {"predicted", nullable(s.predicted)},
          {"score", nullable(s.model_scores)},
          {"flag", s.flags},
          {"flagged_count", std::count(s.flags.begin(), s.flags.end(), 1)},
          {"score_lower", limit(s.lower)},
          {"score_upper", limit(s.upper)}};
}

}  // namespace tickwatch::orchestrator
