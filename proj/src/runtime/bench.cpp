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

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

#include "tickwatch/core/error.hpp"
#include "tickwatch/eval/benchmarks.hpp"
#include "tickwatch/orchestrator/train.hpp"
#include "tickwatch/runtime/harness.hpp"

namespace tickwatch::runtime {
namespace {

using Ms = std::chrono::duration<double, std::milli>;
constexpr std::int64_t kStep = 60'000;
constexpr std::size_t kHistoryRows = 8 * 1440;

double Sample(std::int64_t ts, double level, std::mt19937_64& rng) {
  std::normal_distribution<double> eps(0.0, 0.3);
  const double phase = 2.0 * M_PI * static_cast<double>((ts / kStep) % 1440) / 1440.0;
  return level + 3.0 * std::sin(phase) + eps(rng);
}

}  // namespace

double BenchResult::max_tick_ms() const {
  return tick_ms.empty() ? 0.0 : *std::max_element(tick_ms.begin(), tick_ms.end());
}

BenchResult RunBench(const BenchOptions& options) {
  if (options.models < 1 || options.workers < 1 || options.ticks < 1) {
    Fail(ErrorCode::kInvalidInput, "bench needs at least one model, worker and tick");
  }
  BenchResult result;
  result.models = options.models;
  result.signals = options.signals > 0 ? std::min(options.signals, options.models) : std::min(options.models, 50);
  result.workers = options.workers;

  const auto setup_start = std::chrono::steady_clock::now();
  registry::Registry registry;
  orchestrator::MetricStore metrics;
  std::mt19937_64 rng(options.seed);
  std::int64_t now = eval::kBenchmarkStart + static_cast<std::int64_t>(kHistoryRows) * kStep;
  const std::map<std::string, std::string> series_labels{{"src", "bench"}};

  std::vector<std::string> names;
  std::vector<double> levels;
  std::vector<registry::ModelRecord> base;
  for (int s = 0; s < result.signals; ++s) {
    names.push_back("bench_signal_" + std::to_string(s));
    levels.push_back(10.0 + static_cast<double>(s % 7));
    std::vector<TimePoint> points;
    points.reserve(kHistoryRows);
    for (std::size_t i = 0; i < kHistoryRows; ++i) {
      const std::int64_t ts = now - static_cast<std::int64_t>(kHistoryRows - 1 - i) * kStep;
      points.push_back({ts, Sample(ts, levels.back(), rng)});
    }
    metrics.AppendSeries(names.back(), series_labels, points);
    const auto signal = registry.RegisterSignal(names.back(), names.back() + "{src=\"bench\"}", now);
    registry.SnapshotSignal(signal.signal_id, metrics, now);
    orchestrator::TrainRequest request;
    request.model_type = "arima_uv";
    request.signal_ids = {signal.signal_id};
    request.params = {{"order", {{"p", 1}, {"d", 0}, {"q", 0}}}};
    request.register_model = true;
    request.seed = options.seed + static_cast<std::uint64_t>(s);
    base.push_back(*orchestrator::RunTrainJob(registry, request, now).record);
  }
  for (int m = result.signals; m < options.models; ++m) {
    registry::ModelRecord draft = base[static_cast<std::size_t>(m % result.signals)];
    draft.model_id.clear();
    draft.version = 0;
    draft.active_version = 0;
    registry.RegisterModel(std::move(draft), now);
  }

  std::vector<std::unique_ptr<orchestrator::LocalWorker>> workers;
  orchestrator::TickContext ctx;
  ctx.registry = &registry;
  ctx.metrics = &metrics;
  ctx.leader_id = "node-0";
  ctx.term = 1;
  for (int w = 1; w <= options.workers; ++w) {
    workers.push_back(std::make_unique<orchestrator::LocalWorker>(
        "node-" + std::to_string(w), [&registry](const std::string& ref) { return registry.LoadArtifact(ref); },
        static_cast<std::size_t>(options.models) + 16));
    ctx.workers[workers.back()->id()] = workers.back().get();
  }
  result.setup_ms = Ms(std::chrono::steady_clock::now() - setup_start).count();

  auto tick = [&](std::uint64_t id) {
    now += kStep;
    for (std::size_t s = 0; s < names.size(); ++s) metrics.Append({names[s], series_labels, now, Sample(now, levels[s], rng)});
    const auto start = std::chrono::steady_clock::now();
    const auto report = orchestrator::RunInferenceTick(ctx, id, now);
    return std::make_pair(Ms(std::chrono::steady_clock::now() - start).count(), report);
  };

  result.warmup_ms = tick(1).first;
  for (auto& w : workers) w->cache().ResetStats();
  for (int t = 0; t < options.ticks; ++t) {
    const auto [ms, report] = tick(static_cast<std::uint64_t>(t) + 2);
    result.tick_ms.push_back(ms);
    result.completed.push_back(report.completed);
  }
  for (auto& w : workers) {
    const auto s = w->cache().stats();
    result.cache.hits += s.hits;
    result.cache.misses += s.misses;
    result.cache.evictions += s.evictions;
    result.cache.loads += s.loads;
  }
  return result;
}

nlohmann::json BenchResultToJson(const BenchResult& r) {
  return {{"models", r.models},
          {"signals", r.signals},
          {"workers", r.workers},
          {"setup_ms", r.setup_ms},
          {"warmup_tick_ms", r.warmup_ms},
          {"tick_ms", r.tick_ms},
          {"max_tick_ms", r.max_tick_ms()},
          {"completed", r.completed},
          {"cache", {{"hits", r.cache.hits},
                     {"misses", r.cache.misses},
                     {"evictions", r.cache.evictions},
                     {"loads", r.cache.loads},
                     {"hit_ratio", r.cache.hit_ratio()}}}};
}

}  // namespace tickwatch::runtime
