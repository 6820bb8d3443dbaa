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
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "tickwatch/detection/detector.hpp"
#include "tickwatch/eval/metrics.hpp"
#include "tickwatch/orchestrator/metric_store.hpp"
#include "tickwatch/orchestrator/tick.hpp"
#include "tickwatch/registry/registry.hpp"

namespace tickwatch::runtime {

// ---------------------------------------------------------------- replay

// Replays a CSV (`ts_ms,f1..fk[,label]`) through the production path: the
// leading rows are ingested, snapshotted and trained on, then every later
// row is appended and scored by one inference tick on a virtual clock.
struct ReplayOptions {
  std::string model_type;  // empty: arima_uv for one feature, else iforest_mv
  nlohmann::json params = nlohmann::json::object();
  detection::DetectorSpec spec;
  // Rows used for training; default is max(type minimum, half the rows).
  std::optional<std::size_t> train_rows;
  // 0 replays as fast as possible; otherwise data time runs `speed` times
  // faster than wall time.
  double speed = 0.0;
  std::uint64_t seed = 1;
  std::filesystem::path data_dir;  // registry root; empty keeps it in memory
};

struct ReplayRow {
  std::int64_t ts = 0;
  int predicted = 0;
  std::optional<int> label;
};

struct ReplayResult {
  std::string model_id;
  std::string model_type;
  std::vector<std::string> signals;
  std::size_t train_rows = 0;
  std::vector<ReplayRow> rows;  // scored rows only
  std::size_t skipped_ticks = 0;
  std::size_t failed_ticks = 0;
  std::optional<eval::Confusion> confusion;  // when the CSV has labels
  double train_ms = 0.0;
  double replay_ms = 0.0;
};

using TickObserver = std::function<void(const orchestrator::TickReport&, const ReplayRow&)>;

ReplayResult RunReplay(std::string_view csv, const ReplayOptions& options,
                       const TickObserver& observer = {});
nlohmann::json ReplayResultToJson(const ReplayResult& r, bool include_rows = false);

// ----------------------------------------------------------------- bench

struct BenchOptions {
  int models = 1000;
  int signals = 0;  // 0: min(models, 50)
  int workers = 3;
  int ticks = 3;    // measured ticks after one warm-up tick
  std::uint64_t seed = 1;
};

struct BenchResult {
  int models = 0;
  int signals = 0;
  int workers = 0;
  double setup_ms = 0.0;
  double warmup_ms = 0.0;
  std::vector<double> tick_ms;
  std::vector<std::size_t> completed;
  orchestrator::CacheStats cache;  // summed over workers, measured ticks only

  double max_tick_ms() const;
};

// N models spread over shared signals, one warm-up tick, then measured
// ticks. Models of the same signal share an artifact but are cached and
// scored as distinct (model_id, version) entries.
BenchResult RunBench(const BenchOptions& options);
nlohmann::json BenchResultToJson(const BenchResult& r);

// ----------------------------------------------------------------- chaos

struct ChaosOptions {
  std::uint64_t seed = 1;
  int nodes = 3;
  double loss = 0.0;
  double election_timeout = 10.0;  // T, simulated seconds
};

struct ChaosResult {
  std::uint64_t seed = 0;
  int nodes = 0;
  double loss = 0.0;
  std::string old_leader;
  std::string new_leader;
  std::uint64_t old_term = 0;
  std::uint64_t new_term = 0;
  double reelection_s = -1.0;  // negative when no leader emerged
  double bound_s = 0.0;        // 10 T
  bool safety_ok = false;
  orchestrator::TickReport tick;
  std::size_t models = 0;
  std::size_t published_once = 0;  // models with exactly one sample this tick
  bool exactly_once = false;

  bool reelected_in_bound() const { return reelection_s >= 0.0 && reelection_s <= bound_s; }
  bool passed() const { return safety_ok && reelected_in_bound() && exactly_once; }
};

// Registry, store and trained models reused by many chaos runs; each run
// advances the data by one step.
class ChaosFixture {
 public:
  explicit ChaosFixture(int models = 6, std::uint64_t seed = 7);
  ChaosFixture(const ChaosFixture&) = delete;
  ChaosFixture& operator=(const ChaosFixture&) = delete;

  // Appends one fresh sample to every signal; returns the new time.
  std::int64_t Advance();
  orchestrator::LocalWorker& WorkerFor(const std::string& node_id);

  registry::Registry& registry() { return registry_; }
  orchestrator::MetricStore& metrics() { return metrics_; }
  std::size_t model_count() const { return models_; }
  std::uint64_t next_tick_id() { return ++tick_id_; }

 private:
  registry::Registry registry_;
  orchestrator::MetricStore metrics_;
  std::vector<std::string> signal_names_;
  std::map<std::string, std::unique_ptr<orchestrator::LocalWorker>> workers_;
  std::size_t models_ = 0;
  std::int64_t now_ = 0;
  std::uint64_t tick_id_ = 0;
  std::uint64_t seed_ = 0;
};

// Elects a leader in a seeded simulation, kills it, waits for re-election
// and runs the post-failover tick with the dead leader's worker still
// listed, so its shard must be re-dispatched.
ChaosResult RunChaos(const ChaosOptions& options, ChaosFixture& fixture);
nlohmann::json ChaosResultToJson(const ChaosResult& r);

}  // namespace tickwatch::runtime
