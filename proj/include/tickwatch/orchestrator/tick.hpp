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
#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "tickwatch/core/error.hpp"
#include "tickwatch/core/feature_window.hpp"
#include "tickwatch/detection/detector.hpp"
#include "tickwatch/orchestrator/metric_store.hpp"
#include "tickwatch/orchestrator/model_cache.hpp"
#include "tickwatch/orchestrator/transport.hpp"
#include "tickwatch/registry/registry.hpp"

namespace tickwatch::orchestrator {

inline constexpr const char* kPredictedMetric = "tickwatch_predicted_value";
inline constexpr const char* kAnomalyMetric = "tickwatch_anomaly";

struct WorkItem {
  std::string model_id;
  int version = 0;
  std::string model_type;
  std::string artifact_ref;
  detection::DetectorSpec spec;
  FeatureWindow window;
};

struct WorkResult {
  std::string model_id;
  int version = 0;
  bool ok = false;
  ErrorCode code = ErrorCode::kInternal;
  std::string error;
  nlohmann::json verdict;  // VerdictToJson when ok
};

nlohmann::json WorkItemToJson(const WorkItem& item);
WorkItem WorkItemFromJson(const nlohmann::json& j);
nlohmann::json WorkResultToJson(const WorkResult& r);
WorkResult WorkResultFromJson(const nlohmann::json& j);

// Scores a shard. A throw means the whole worker failed (unreachable,
// killed); per-model problems come back as results with ok == false.
class Worker {
 public:
  virtual ~Worker() = default;
  virtual const std::string& id() const = 0;
  virtual std::vector<WorkResult> Score(const std::vector<WorkItem>& items) = 0;
};

using ArtifactFetcher = std::function<std::string(const std::string& ref)>;

class LocalWorker final : public Worker {
 public:
  LocalWorker(std::string id, ArtifactFetcher fetch, std::size_t cache_capacity = 1024,
              int threads = 1);

  const std::string& id() const override { return id_; }
  std::vector<WorkResult> Score(const std::vector<WorkItem>& items) override;

  // Chaos hooks. DieAfter(n): the worker fails once n more items are scored.
  void Kill() { dead_ = true; }
  void Revive() {
    dead_ = false;
    die_after_ = -1;
  }
  void DieAfter(int items) { die_after_ = items; }
  bool dead() const { return dead_; }

  ModelCache& cache() { return cache_; }
  std::uint64_t scored() const { return scored_.load(); }

 private:
  WorkResult ScoreOne(const WorkItem& item);

  std::string id_;
  ArtifactFetcher fetch_;
  ModelCache cache_;
  int threads_;
  std::atomic<bool> dead_{false};
  std::atomic<int> die_after_{-1};
  std::atomic<std::uint64_t> scored_{0};
};

// Worker reached through a Transport.
class RemoteWorker final : public Worker {
 public:
  RemoteWorker(std::string id, std::string caller, Transport& transport,
               std::chrono::milliseconds timeout = std::chrono::milliseconds(30'000))
      : id_(std::move(id)), caller_(std::move(caller)), transport_(transport), timeout_(timeout) {}

  const std::string& id() const override { return id_; }
  std::vector<WorkResult> Score(const std::vector<WorkItem>& items) override;

 private:
  std::string id_;
  std::string caller_;
  Transport& transport_;
  std::chrono::milliseconds timeout_;
};

// Transport handler answering score requests with `worker`.
Handler WorkerHandler(Worker& worker);

struct TickFailure {
  std::string model_id;
  std::string reason;
};

struct TickReport {
  std::uint64_t tick_id = 0;
  std::uint64_t term = 0;
  std::string leader_id;
  std::int64_t at = 0;
  std::size_t models_total = 0;
  std::size_t completed = 0;
  std::size_t failed = 0;
  std::size_t skipped = 0;
  std::size_t redispatched = 0;
  std::size_t anomalies = 0;
  std::size_t samples_published = 0;
  std::size_t alerts_fired = 0;
  double wall_ms = 0.0;
  std::map<std::string, std::size_t> shard_sizes;
  std::vector<TickFailure> failures;  // failed and skipped models with reasons
  std::vector<std::string> anomalous_models;
};

nlohmann::json TickReportToJson(const TickReport& r);

using AlertSink = std::function<void(const registry::AlertRecord&)>;

struct TickContext {
  registry::Registry* registry = nullptr;
  MetricStore* metrics = nullptr;
  std::string leader_id;
  std::uint64_t term = 0;
  // Reachable workers by node id. The leader's own worker may be listed; it
  // receives work only when no other worker is present.
  std::map<std::string, Worker*> workers;
  AlertSink on_alert;
};

// Hold-window breach ratio mapped to quartiles: low / medium / high /
// critical. Rule-path verdicts are critical.
std::string SeverityFor(const nlohmann::json& verdict, int hold_window);

// One round over every active model: build windows from the metric store,
// partition, dispatch, re-dispatch a failed worker's shard once to the
// survivors, publish predicted value and anomaly flag per model (at most once
// each), record and emit alerts.
TickReport RunInferenceTick(TickContext& ctx, std::uint64_t tick_id, std::int64_t now);

}  // namespace tickwatch::orchestrator
