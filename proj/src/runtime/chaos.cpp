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

#include <cmath>
#include <random>

#include "tickwatch/core/error.hpp"
#include "tickwatch/eval/benchmarks.hpp"
#include "tickwatch/orchestrator/cluster_sim.hpp"
#include "tickwatch/orchestrator/train.hpp"
#include "tickwatch/runtime/harness.hpp"

namespace tickwatch::runtime {
namespace {

constexpr std::int64_t kStep = 60'000;
constexpr std::size_t kHistoryRows = 8 * 1440;
const std::map<std::string, std::string> kSeriesLabels{{"src", "chaos"}};

double Wave(std::int64_t ts, double level, std::mt19937_64& rng) {
  std::normal_distribution<double> eps(0.0, 0.3);
  const double phase = 2.0 * M_PI * static_cast<double>((ts / kStep) % 1440) / 1440.0;
  return level + 3.0 * std::sin(phase) + eps(rng);
}

}  // namespace

ChaosFixture::ChaosFixture(int models, std::uint64_t seed) : seed_(seed) {
  if (models < 1) Fail(ErrorCode::kInvalidInput, "chaos fixture needs at least one model");
  std::mt19937_64 rng(seed);
  now_ = eval::kBenchmarkStart + static_cast<std::int64_t>(kHistoryRows) * kStep;
  for (int m = 0; m < models; ++m) {
    const std::string name = "chaos_signal_" + std::to_string(m);
    std::vector<TimePoint> points;
    for (std::size_t i = 0; i < kHistoryRows; ++i) {
      const std::int64_t ts = now_ - static_cast<std::int64_t>(kHistoryRows - 1 - i) * kStep;
      points.push_back({ts, Wave(ts, 10.0 + m, rng)});
    }
    metrics_.AppendSeries(name, kSeriesLabels, points);
    const auto signal = registry_.RegisterSignal(name, name + "{src=\"chaos\"}", now_);
    registry_.SnapshotSignal(signal.signal_id, metrics_, now_);
    orchestrator::TrainRequest request;
    request.model_type = "arima_uv";
    request.signal_ids = {signal.signal_id};
    request.params = {{"order", {{"p", 1}, {"d", 0}, {"q", 0}}}};
    request.register_model = true;
    request.seed = seed + static_cast<std::uint64_t>(m);
    orchestrator::RunTrainJob(registry_, request, now_);
    signal_names_.push_back(name);
  }
  models_ = static_cast<std::size_t>(models);
}

std::int64_t ChaosFixture::Advance() {
  now_ += kStep;
  std::mt19937_64 rng(seed_ ^ static_cast<std::uint64_t>(now_));
  for (std::size_t s = 0; s < signal_names_.size(); ++s) {
    metrics_.Append({signal_names_[s], kSeriesLabels, now_, Wave(now_, 10.0 + static_cast<double>(s), rng)});
  }
  return now_;
}

orchestrator::LocalWorker& ChaosFixture::WorkerFor(const std::string& node_id) {
  auto& slot = workers_[node_id];
  if (!slot) {
    slot = std::make_unique<orchestrator::LocalWorker>(
        node_id, [this](const std::string& ref) { return registry_.LoadArtifact(ref); });
  }
  return *slot;
}

ChaosResult RunChaos(const ChaosOptions& options, ChaosFixture& fixture) {
  if (options.nodes < 3) Fail(ErrorCode::kInvalidInput, "chaos needs at least three nodes");
  if (options.loss < 0.0 || options.loss >= 1.0) Fail(ErrorCode::kInvalidInput, "loss must lie in [0, 1)");
  ChaosResult result;
  result.seed = options.seed;
  result.nodes = options.nodes;
  result.loss = options.loss;
  const double t = options.election_timeout;
  result.bound_s = 10.0 * t;

  orchestrator::SimConfig config;
  config.nodes = options.nodes;
  config.election.timeout = t;
  config.min_delay = t / 100.0;
  config.max_delay = t / 10.0;
  config.loss = options.loss;
  config.seed = options.seed;
  orchestrator::ClusterSim sim(config);

  if (!sim.RunUntil([&] { return sim.Leader().has_value(); }, 100.0 * t)) {
    result.safety_ok = !sim.SafetyViolated();
    return result;
  }
  // Let the first leader settle for a few heartbeats before the kill.
  sim.RunUntil(sim.now() + t);
  const auto old = sim.Leader();
  if (!old) return result;
  result.old_leader = *old;
  result.old_term = sim.node(*old).current_term;
  const double killed_at = sim.now();
  sim.Kill(*old);
  sim.RunUntil(
      [&] {
        const auto l = sim.Leader();
        return l && *l != result.old_leader;
      },
      killed_at + 20.0 * t);
  // Keep running past the bound so late split-brain would be observed.
  sim.RunUntil(std::max(sim.now(), killed_at + result.bound_s));
  result.safety_ok = !sim.SafetyViolated();
  const auto first = sim.FirstLeaderAfterTerm(result.old_term);
  const auto leader = sim.Leader();
  if (!first || !leader) return result;
  result.reelection_s = *first - killed_at;
  result.new_leader = *leader;
  result.new_term = sim.node(*leader).current_term;

  const std::int64_t now = fixture.Advance();
  orchestrator::TickContext ctx;
  ctx.registry = &fixture.registry();
  ctx.metrics = &fixture.metrics();
  ctx.leader_id = result.new_leader;
  ctx.term = result.new_term;
  for (const auto& id : sim.node_ids()) {
    auto& worker = fixture.WorkerFor(id);
    worker.Revive();
    if (!sim.is_up(id)) worker.Kill();
    ctx.workers[id] = &worker;
  }
  result.tick = orchestrator::RunInferenceTick(ctx, fixture.next_tick_id(), now);

  result.models = fixture.model_count();
  for (const auto& m : fixture.registry().GetActiveModels()) {
    std::size_t samples = 0;
    for (const auto& s : fixture.metrics().QueryRange(std::string(orchestrator::kPredictedMetric) +
                                                           "{model_id=\"" + m.model_id + "\"}",
                                                       now, now)) {
      samples += s.points.size();
    }
    result.published_once += samples == 1;
  }
  result.exactly_once = result.published_once == result.models && result.tick.completed == result.models;
  return result;
}

nlohmann::json ChaosResultToJson(const ChaosResult& r) {
  return {{"seed", r.seed},
          {"nodes", r.nodes},
          {"loss", r.loss},
          {"old_leader", r.old_leader},
          {"old_term", r.old_term},
          {"new_leader", r.new_leader},
          {"new_term", r.new_term},
          {"reelection_s", r.reelection_s},
          {"bound_s", r.bound_s},
          {"safety_ok", r.safety_ok},
          {"models", r.models},
          {"published_once", r.published_once},
          {"redispatched", r.tick.redispatched},
          {"exactly_once", r.exactly_once},
          {"passed", r.passed()}};
}

}  // namespace tickwatch::runtime
