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

#include "tickwatch/orchestrator/tick.hpp"

#include <algorithm>
#include <future>
#include <set>
#include <thread>

#include "tickwatch/models/artifact.hpp"
#include "tickwatch/orchestrator/partition.hpp"

namespace tickwatch::orchestrator {
namespace {

constexpr std::size_t kDefaultWindowRows = 60;

nlohmann::json WindowToJson(const FeatureWindow& w) {
  return {{"signal_ids", w.signal_ids()},
          {"ts", w.ts()},
          {"values", w.values().data()},
          {"step_ms", w.step_ms()}};
}

FeatureWindow WindowFromJson(const nlohmann::json& j) {
  auto ids = j.at("signal_ids").get<std::vector<std::string>>();
  auto ts = j.at("ts").get<std::vector<std::int64_t>>();
  const auto flat = j.at("values").get<std::vector<double>>();
  if (ids.empty() || flat.size() != ts.size() * ids.size()) {
    Fail(ErrorCode::kInvalidInput, "window values do not match ts x signals");
  }
  Matrix values(ts.size(), ids.size());
  std::copy(flat.begin(), flat.end(), values.row(0).data());
  return FeatureWindow(std::move(ids), std::move(ts), std::move(values), j.at("step_ms").get<std::int64_t>());
}

// Fields of a verdict worth keeping on an alert; score arrays are dropped.
nlohmann::json VerdictSummary(const nlohmann::json& v) {
  nlohmann::json out{{"is_anomaly", v.at("is_anomaly")},
                     {"triggered_by", v.at("triggered_by")},
                     {"breach_count", v.at("breach_count")},
                     {"anomaly_count", v.at("anomaly_count")},
                     {"flagged_ts", v.at("flagged_ts")},
                     {"predicted_value", v.at("predicted_value")},
                     {"attribution", v.at("attribution")}};
  return out;
}

// Predicted signal value where the model forecasts; otherwise the newest
// model score; on the rule path, the newest observed value.
double PublishedPrediction(const nlohmann::json& v, const FeatureWindow& window) {
  if (!v.at("predicted_value").is_null()) return v["predicted_value"].get<double>();
  const auto& scores = v.at("model_scores");
  if (!scores.empty() && !scores.back().is_null()) return scores.back().get<double>();
  return window.values()(window.size() - 1, 0);
}

std::string CodeName(ErrorCode c) { return std::string(ErrorCodeName(c)); }

}  // namespace

nlohmann::json WorkItemToJson(const WorkItem& item) {
  return {{"model_id", item.model_id},
          {"version", item.version},
          {"model_type", item.model_type},
          {"artifact_ref", item.artifact_ref},
          {"spec", detection::SpecToJson(item.spec)},
          {"window", WindowToJson(item.window)}};
}

WorkItem WorkItemFromJson(const nlohmann::json& j) {
  try {
    return WorkItem{j.at("model_id").get<std::string>(), j.at("version").get<int>(),
                    j.at("model_type").get<std::string>(), j.at("artifact_ref").get<std::string>(),
                    detection::SpecFromJson(j.at("spec")), WindowFromJson(j.at("window"))};
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kInvalidInput, std::string("malformed work item: ") + e.what());
  }
}

nlohmann::json WorkResultToJson(const WorkResult& r) {
  return {{"model_id", r.model_id}, {"version", r.version}, {"ok", r.ok},
          {"code", CodeName(r.code)}, {"error", r.error}, {"verdict", r.verdict}};
}

WorkResult WorkResultFromJson(const nlohmann::json& j) {
  try {
    WorkResult r;
    r.model_id = j.at("model_id").get<std::string>();
    r.version = j.at("version").get<int>();
    r.ok = j.at("ok").get<bool>();
    r.code = ErrorCodeFromName(j.at("code").get<std::string>());
    r.error = j.at("error").get<std::string>();
    r.verdict = j.at("verdict");
    return r;
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kInvalidInput, std::string("malformed work result: ") + e.what());
  }
}

LocalWorker::LocalWorker(std::string id, ArtifactFetcher fetch, std::size_t cache_capacity,
                         int threads)
    : id_(std::move(id)),
      fetch_(std::move(fetch)),
      cache_(cache_capacity, [](const std::string& model_id, int) -> models::ModelPtr {
        Fail(ErrorCode::kModelUnavailable, "no artifact reference for " + model_id);
      }),
      threads_(std::max(1, threads)) {}

WorkResult LocalWorker::ScoreOne(const WorkItem& item) {
  WorkResult r;
  r.model_id = item.model_id;
  r.version = item.version;
  try {
    const auto model = cache_.Get(item.model_id, item.version, [&](const std::string&, int) {
      return models::DeserializeArtifact(fetch_(item.artifact_ref)).model;
    });
    r.verdict = detection::VerdictToJson(detection::Detect(item.spec, model.get(), item.window));
    r.ok = true;
    r.code = ErrorCode::kInternal;
  } catch (const Error& e) {
    r.code = e.code();
    r.error = e.what();
  } catch (const std::exception& e) {
    r.code = ErrorCode::kInternal;
    r.error = e.what();
  }
  return r;
}

std::vector<WorkResult> LocalWorker::Score(const std::vector<WorkItem>& items) {
  if (dead_) Fail(ErrorCode::kSourceUnavailable, "worker " + id_ + " is down");
  std::vector<WorkResult> results(items.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> died{false};
  auto run = [&] {
    for (std::size_t i = next++; i < items.size() && !died; i = next++) {
      if (die_after_ >= 0 && die_after_.fetch_sub(1) <= 0) {
        dead_ = true;
        died = true;
        return;
      }
      results[i] = ScoreOne(items[i]);
      ++scored_;
    }
  };
  const int n = std::min<int>(threads_, static_cast<int>(items.size()));
  if (n <= 1) {
    run();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n; ++t) pool.emplace_back(run);
    for (auto& t : pool) t.join();
  }
  if (died) Fail(ErrorCode::kSourceUnavailable, "worker " + id_ + " died mid-shard");
  return results;
}

std::vector<WorkResult> RemoteWorker::Score(const std::vector<WorkItem>& items) {
  nlohmann::json body = nlohmann::json::array();
  for (const auto& item : items) body.push_back(WorkItemToJson(item));
  Envelope request;
  request.type = EnvelopeType::kScoreRequest;
  request.sender = caller_;
  request.payload = body.dump();
  const Envelope reply = transport_.Call(id_, request, timeout_);
  if (reply.type != EnvelopeType::kScoreResponse) {
    Fail(ErrorCode::kSourceUnavailable, "worker " + id_ + " failed: " + reply.payload);
  }
  std::vector<WorkResult> out;
  for (const auto& j : nlohmann::json::parse(reply.payload)) out.push_back(WorkResultFromJson(j));
  if (out.size() != items.size()) Fail(ErrorCode::kSourceUnavailable, "short reply from " + id_);
  return out;
}

Handler WorkerHandler(Worker& worker) {
  return [&worker](const Envelope& request) {
    Envelope reply;
    reply.sender = worker.id();
    reply.term = request.term;
    if (request.type != EnvelopeType::kScoreRequest) {
      reply.type = EnvelopeType::kError;
      reply.payload = "unexpected message type";
      return reply;
    }
    std::vector<WorkItem> items;
    for (const auto& j : nlohmann::json::parse(request.payload)) items.push_back(WorkItemFromJson(j));
    nlohmann::json out = nlohmann::json::array();
    for (const auto& r : worker.Score(items)) out.push_back(WorkResultToJson(r));
    reply.type = EnvelopeType::kScoreResponse;
    reply.payload = out.dump();
    return reply;
  };
}

nlohmann::json TickReportToJson(const TickReport& r) {
  nlohmann::json failures = nlohmann::json::array();
  for (const auto& f : r.failures) failures.push_back({{"model_id", f.model_id}, {"reason", f.reason}});
  return {{"tick_id", r.tick_id},
          {"term", r.term},
          {"leader_id", r.leader_id},
          {"at", r.at},
          {"models_total", r.models_total},
          {"completed", r.completed},
          {"failed", r.failed},
          {"skipped", r.skipped},
          {"redispatched", r.redispatched},
          {"anomalies", r.anomalies},
          {"samples_published", r.samples_published},
          {"alerts_fired", r.alerts_fired},
          {"wall_ms", r.wall_ms},
          {"shard_sizes", r.shard_sizes},
          {"failures", failures},
          {"anomalous_models", r.anomalous_models}};
}

std::string SeverityFor(const nlohmann::json& verdict, int hold_window) {
  if (verdict.value("triggered_by", std::string()) == "rule") return "critical";
  const double ratio = static_cast<double>(verdict.value("anomaly_count", 0)) /
                       static_cast<double>(std::max(1, hold_window));
  if (ratio <= 0.25) return "low";
  if (ratio <= 0.5) return "medium";
  if (ratio <= 0.75) return "high";
  return "critical";
}

TickReport RunInferenceTick(TickContext& ctx, std::uint64_t tick_id, std::int64_t now) {
  if (ctx.registry == nullptr || ctx.metrics == nullptr) {
    Fail(ErrorCode::kInvalidState, "tick needs a registry and a metric store");
  }
  const auto wall_start = std::chrono::steady_clock::now();
  TickReport report;
  report.tick_id = tick_id;
  report.term = ctx.term;
  report.leader_id = ctx.leader_id;
  report.at = now;

  // 1. Windows for every active model.
  const auto active = ctx.registry->GetActiveModels();
  report.models_total = active.size();
  std::map<std::string, WorkItem> items;
  std::vector<std::string> order;
  std::map<std::string, std::vector<TimePoint>> fetched;  // per signal, widest fetch
  for (const auto& m : active) {
    try {
      const auto& summary = m.train_summary;
      const std::int64_t step = summary.is_object() ? summary.value("step_ms", std::int64_t{60'000}) : 60'000;
      const auto rows = summary.is_object()
                            ? summary.value("window_length", kDefaultWindowRows)
                            : kDefaultWindowRows;
      std::vector<SeriesWindow> series;
      for (const auto& sid : m.signal_ids) {
        const auto signal = ctx.registry->GetSignal(sid);
        const auto selector = registry::ParseSelector(signal.query_expr);
        const std::int64_t start = now - static_cast<std::int64_t>(rows + 1) * step;
        std::vector<TimePoint> points = ctx.metrics->FetchSeries(selector, start, now);
        if (points.size() > rows) points.erase(points.begin(), points.end() - static_cast<std::ptrdiff_t>(rows));
        if (points.size() < rows) {
          Fail(ErrorCode::kInsufficientData, sid + " has " + std::to_string(points.size()) + " of " +
                                                 std::to_string(rows) + " samples");
        }
        series.emplace_back(sid, std::move(points), step);
      }
      FeatureWindow window = FeatureWindow::Align(series);
      if (window.size() < static_cast<std::size_t>(m.spec.hold_window)) {
        Fail(ErrorCode::kInsufficientData, "aligned window shorter than the hold window");
      }
      items.emplace(m.model_id, WorkItem{m.model_id, m.version, m.model_type, m.artifact_ref, m.spec,
                                         std::move(window)});
      order.push_back(m.model_id);
    } catch (const Error& e) {
      ++report.skipped;
      report.failures.push_back({m.model_id, std::string("skipped: ") + e.what()});
    }
  }

  // 2. Partition and dispatch.
  std::vector<std::string> live;
  for (const auto& [id, w] : ctx.workers) live.push_back(id);
  std::map<std::string, WorkResult> results;
  std::set<std::string> failed_workers;

  auto dispatch = [&](const Assignment& assignment) {
    std::vector<std::string> lost;
    std::vector<std::pair<std::string, std::future<std::vector<WorkResult>>>> calls;
    for (const auto& [wid, models] : assignment.shards) {
      if (models.empty()) continue;
      auto it = ctx.workers.find(wid);
      if (it == ctx.workers.end()) {
        lost.insert(lost.end(), models.begin(), models.end());
        failed_workers.insert(wid);
        continue;
      }
      std::vector<WorkItem> shard;
      for (const auto& mid : models) shard.push_back(items.at(mid));
      Worker* worker = it->second;
      calls.emplace_back(wid, std::async(std::launch::async, [worker, shard = std::move(shard)] {
                           return worker->Score(shard);
                         }));
    }
    for (auto& [wid, call] : calls) {
      try {
        for (auto& r : call.get()) results.emplace(r.model_id, std::move(r));
      } catch (const std::exception&) {
        failed_workers.insert(wid);
        const auto& models = assignment.shards.at(wid);
        lost.insert(lost.end(), models.begin(), models.end());
      }
    }
    return lost;
  };

  if (!order.empty() && live.empty()) {
    for (const auto& mid : order) report.failures.push_back({mid, "no live worker"});
    report.failed = order.size();
    order.clear();
  }
  std::vector<std::string> lost;
  if (!order.empty()) {
    const Assignment first = PartitionModels(order, live, ctx.leader_id, tick_id, ctx.term);
    for (const auto& [wid, models] : first.shards) report.shard_sizes[wid] = models.size();
    lost = dispatch(first);
  }
  if (!lost.empty()) {
    std::vector<std::string> survivors;
    for (const auto& id : live) {
      if (!failed_workers.count(id)) survivors.push_back(id);
    }
    if (survivors.empty()) {
      for (const auto& mid : lost) report.failures.push_back({mid, "worker failed; no survivor"});
      report.failed += lost.size();
    } else {
      report.redispatched = lost.size();
      const auto retry = dispatch(PartitionModels(lost, survivors, ctx.leader_id, tick_id, ctx.term));
      for (const auto& mid : retry) report.failures.push_back({mid, "worker failed twice"});
      report.failed += retry.size();
    }
  }

  // 3. Publish, at most once per model.
  std::set<std::string> published;
  for (const auto& mid : order) {
    auto it = results.find(mid);
    if (it == results.end()) continue;  // counted above
    const WorkResult& r = it->second;
    if (!r.ok) {
      ++report.failed;
      report.failures.push_back({mid, CodeName(r.code) + ": " + r.error});
      continue;
    }
    if (!published.insert(mid).second) continue;
    const WorkItem& item = items.at(mid);
    const bool anomaly = r.verdict.at("is_anomaly").get<bool>();
    const std::map<std::string, std::string> labels{{"model_id", mid}};
    ctx.metrics->Append({kPredictedMetric, labels, now, PublishedPrediction(r.verdict, item.window)});
    ctx.metrics->Append({kAnomalyMetric, labels, now, anomaly ? 1.0 : 0.0});
    report.samples_published += 2;
    ++report.completed;
    if (anomaly) {
      ++report.anomalies;
      report.anomalous_models.push_back(mid);
      const auto alert = ctx.registry->RecordAlert(mid, r.version, now,
                                                   SeverityFor(r.verdict, item.spec.hold_window),
                                                   VerdictSummary(r.verdict));
      ++report.alerts_fired;
      if (ctx.on_alert) ctx.on_alert(alert);
    }
  }
  report.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - wall_start).count();
  return report;
}

}  // namespace tickwatch::orchestrator
