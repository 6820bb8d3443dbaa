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

#include <map>
#include <mutex>

#include "tickwatch/core/error.hpp"
#include "tickwatch/models/arima.hpp"
#include "tickwatch/models/artifact.hpp"
#include "tickwatch/models/iforest.hpp"
#include "tickwatch/models/model.hpp"

namespace tickwatch::models {
namespace {

ModelPlugin ArimaPlugin() {
  ModelPlugin plugin;
  plugin.type_name = "arima_uv";
  plugin.multivariate = false;
  plugin.fit = [](const FeatureWindow& training, const nlohmann::json& params,
                  std::uint64_t seed) -> ModelPtr {
    if (training.feature_count() != 1) {
      Fail(ErrorCode::kInvalidInput, "arima_uv trains on exactly one signal");
    }
    ArimaFitOptions options;
    if (params.contains("order") && !params["order"].is_null()) {
      const auto& o = params["order"];
      options.order = ArimaOrder{o.at("p").get<int>(), o.at("d").get<int>(), o.at("q").get<int>()};
    }
    options.iqr_multiplier = params.value("iqr_multiplier", options.iqr_multiplier);
    if (params.contains("seasonality_period") && !params["seasonality_period"].is_null()) {
      options.seasonality_period = params["seasonality_period"].get<int>();
    }
    return ArimaFit(training.Column(0), options, seed);
  };
  plugin.deserialize = [](const nlohmann::json& payload) -> ModelPtr {
    return ArimaModel::FromPayload(payload);
  };
  return plugin;
}

ModelPlugin IsolationForestPlugin() {
  ModelPlugin plugin;
  plugin.type_name = "iforest_mv";
  plugin.multivariate = true;
  plugin.fit = [](const FeatureWindow& training, const nlohmann::json& params,
                  std::uint64_t seed) -> ModelPtr {
    IsolationForestOptions options;
    options.num_trees = params.value("num_trees", options.num_trees);
    options.subsample_n = params.value("subsample_n", options.subsample_n);
    options.contamination = params.value("contamination", options.contamination);
    options.subsample_n =
        std::min<int>(options.subsample_n, static_cast<int>(training.size()));
    return IsolationForestFit(training.values(), options, seed);
  };
  plugin.deserialize = [](const nlohmann::json& payload) -> ModelPtr {
    return IsolationForestModel::FromPayload(payload);
  };
  return plugin;
}

struct Registry {
  std::mutex mu;
  std::map<std::string, ModelPlugin, std::less<>> plugins;

  Registry() {
    for (ModelPlugin p : {ArimaPlugin(), IsolationForestPlugin()}) {
      plugins.emplace(p.type_name, std::move(p));
    }
  }
};

Registry& GetRegistry() {
  static Registry registry;
  return registry;
}

}  // namespace

void RegisterModelPlugin(ModelPlugin plugin) {
  Registry& r = GetRegistry();
  std::lock_guard lock(r.mu);
  r.plugins[plugin.type_name] = std::move(plugin);
}

const ModelPlugin& FindModelPlugin(std::string_view type_name) {
  Registry& r = GetRegistry();
  std::lock_guard lock(r.mu);
  auto it = r.plugins.find(type_name);
  if (it == r.plugins.end()) {
    Fail(ErrorCode::kInvalidInput, "unknown model type '" + std::string(type_name) + "'");
  }
  return it->second;
}

std::vector<std::string> RegisteredModelTypes() {
  Registry& r = GetRegistry();
  std::lock_guard lock(r.mu);
  std::vector<std::string> out;
  for (const auto& [name, plugin] : r.plugins) out.push_back(name);
  return out;
}

std::string SerializeArtifact(const ModelArtifact& artifact) {
  if (!artifact.model) Fail(ErrorCode::kInvalidInput, "artifact without a model");
  const nlohmann::json j{{"schema_version", artifact.schema_version},
                         {"model_type", artifact.model_type},
                         {"created_ts", artifact.created_ts},
                         {"payload", artifact.model->Payload()},
                         {"config", artifact.config}};
  return j.dump();
}

ModelArtifact DeserializeArtifact(std::string_view bytes) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(bytes);
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kModelUnavailable, std::string("corrupt model artifact: ") + e.what());
  }
  ModelArtifact artifact;
  try {
    artifact.schema_version = j.at("schema_version").get<int>();
    if (artifact.schema_version != kArtifactSchemaVersion) {
      Fail(ErrorCode::kModelUnavailable,
           "unsupported artifact schema_version " + std::to_string(artifact.schema_version));
    }
    artifact.model_type = j.at("model_type").get<std::string>();
    artifact.created_ts = j.at("created_ts").get<std::int64_t>();
    artifact.config = j.at("config");
    artifact.model = FindModelPlugin(artifact.model_type).deserialize(j.at("payload"));
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kModelUnavailable, std::string("malformed model artifact: ") + e.what());
  }
  return artifact;
}

}  // namespace tickwatch::models
