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

#include <functional>
#include <map>
#include <memory>
#include <string>

#include "json.hpp"
#include "tickwatch/api/webhook.hpp"
#include "tickwatch/core/error.hpp"
#include "tickwatch/orchestrator/clock.hpp"
#include "tickwatch/orchestrator/lifecycle.hpp"
#include "tickwatch/orchestrator/metric_store.hpp"
#include "tickwatch/orchestrator/model_cache.hpp"
#include "tickwatch/registry/registry.hpp"

namespace tickwatch::api {

struct ApiRequest {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  std::map<std::string, std::string> headers;  // lower-case names
  std::string body;
};

struct ApiResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;

  nlohmann::json Json() const { return nlohmann::json::parse(body); }
};

// HTTP status for an error code: validation 400, NotFound 404, Conflict and
// InvalidState 409, unavailable dependencies 503, delivery 502, other 500.
int HttpStatusFor(ErrorCode code);
// {"code":..., "message":..., "details":{...}}
ApiResponse ErrorResponse(int status, const std::string& code, const std::string& message,
                          nlohmann::json details = nlohmann::json::object());

struct ServiceHooks {
  std::function<nlohmann::json()> run_tick;        // POST /v1/ticks
  std::function<nlohmann::json()> cluster_status;  // GET /v1/cluster
};

struct ServiceOptions {
  std::string bearer_token;  // empty: no auth
  orchestrator::DriftJobConfig drift;
};

// Every /v1 endpoint, independent of the HTTP library. Mutations honour an
// Idempotency-Key header: a repeated key returns the stored response.
class ApiService {
 public:
  ApiService(registry::Registry& registry, orchestrator::MetricStore& metrics,
             const orchestrator::Clock& clock, WebhookDispatcher* webhooks = nullptr,
             ServiceHooks hooks = {}, ServiceOptions options = {});

  ApiResponse Handle(const ApiRequest& request);

 private:
  ApiResponse Route(const ApiRequest& request);

  registry::Registry& registry_;
  orchestrator::MetricStore& metrics_;
  const orchestrator::Clock& clock_;
  WebhookDispatcher* webhooks_;
  ServiceHooks hooks_;
  ServiceOptions options_;
  orchestrator::ModelCache cache_;
};

}  // namespace tickwatch::api
