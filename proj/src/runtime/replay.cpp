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
#include <cctype>
#include <chrono>
#include <set>
#include <thread>

#include "tickwatch/core/error.hpp"
#include "tickwatch/orchestrator/clock.hpp"
#include "tickwatch/orchestrator/train.hpp"
#include "tickwatch/runtime/harness.hpp"

namespace tickwatch::runtime {
namespace {

using Ms = std::chrono::duration<double, std::milli>;

// Column names become metric names, so they must fit the selector grammar.
std::string MetricName(const std::string& column, std::set<std::string>& taken) {
  std::string out;
  for (char c : column) {
    out += std::isalnum(static_cast<unsigned char>(c)) || c == '_' ? c : '_';
  }
  if (out.empty() || std::isdigit(static_cast<unsigned char>(out[0]))) out = "_" + out;
  std::string candidate = out;
  for (int n = 2; !taken.insert(candidate).second; ++n) candidate = out + "_" + std::to_string(n);
  return candidate;
}

}  // namespace

ReplayResult RunReplay(std::string_view csv, const ReplayOptions& options, const TickObserver& observer) {
  registry::CsvTable table = registry::ParseCsv(csv);
  std::optional<std::vector<int>> labels;
  if (const auto it = std::find(table.columns.begin(), table.columns.end(), "label"); it != table.columns.end()) {
    const auto c = static_cast<std::size_t>(it - table.columns.begin());
    std::vector<int> l;
    l.reserve(table.ts.size());
    for (double v : table.values[c]) {
      if (v != 0.0 && v != 1.0) Fail(ErrorCode::kInvalidInput, "label column must hold 0 or 1");
      l.push_back(static_cast<int>(v));
    }
    labels = std::move(l);
    table.columns.erase(it);
    table.values.erase(table.values.begin() + static_cast<std::ptrdiff_t>(c));
  }
  if (table.columns.empty()) Fail(ErrorCode::kInvalidInput, "csv has no feature columns");
  const std::size_t n = table.ts.size();
  if (n < 2) Fail(ErrorCode::kInsufficientData, "replay needs at least two rows");

  ReplayResult result;
  result.model_type = !options.model_type.empty()     ? options.model_type
                      : table.columns.size() == 1 ? "arima_uv"
                                                  : "iforest_mv";
  const auto& config = registry::ModelConfigFor(result.model_type);
  result.train_rows = options.train_rows.value_or(std::max(config.min_training_length, n / 2));
  if (result.train_rows >= n) {
    Fail(ErrorCode::kInsufficientData, "replay needs rows beyond the " + std::to_string(result.train_rows) +
                                           " training rows, got " + std::to_string(n));
  }

  registry::Registry registry(options.data_dir);
  orchestrator::MetricStore metrics;
  orchestrator::VirtualClock clock(table.ts[result.train_rows - 1]);

  std::set<std::string> taken;
  std::vector<std::string> names;
  for (const auto& column : table.columns) names.push_back(MetricName(column, taken));
  const std::map<std::string, std::string> labels_of_series{{"src", "replay"}};
  for (std::size_t c = 0; c < names.size(); ++c) {
    std::vector<TimePoint> points;
    points.reserve(result.train_rows);
    for (std::size_t i = 0; i < result.train_rows; ++i) points.push_back({table.ts[i], table.values[c][i]});
    metrics.AppendSeries(names[c], labels_of_series, points);
    const auto signal = registry.RegisterSignal(names[c], names[c] + "{src=\"replay\"}", clock.NowMs());
    registry.SnapshotSignal(signal.signal_id, metrics, clock.NowMs());
    result.signals.push_back(signal.signal_id);
  }

  const auto train_start = std::chrono::steady_clock::now();
  orchestrator::TrainRequest request;
  request.model_type = result.model_type;
  request.signal_ids = result.signals;
  request.spec = options.spec;
  request.params = options.params;
  request.register_model = true;
  request.seed = options.seed;
  const auto trained = orchestrator::RunTrainJob(registry, request, clock.NowMs());
  result.model_id = trained.record->model_id;
  result.train_ms = Ms(std::chrono::steady_clock::now() - train_start).count();

  orchestrator::LocalWorker worker("replay",
                                   [&registry](const std::string& ref) { return registry.LoadArtifact(ref); });
  orchestrator::TickContext ctx;
  ctx.registry = &registry;
  ctx.metrics = &metrics;
  ctx.leader_id = "replay";
  ctx.term = 1;
  ctx.workers = {{"replay", &worker}};

  const auto replay_start = std::chrono::steady_clock::now();
  std::vector<int> predicted;
  std::vector<int> actual;
  for (std::size_t i = result.train_rows; i < n; ++i) {
    if (options.speed > 0.0) {
      const double due_ms = static_cast<double>(table.ts[i] - table.ts[result.train_rows]) / options.speed;
      std::this_thread::sleep_until(replay_start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                                       Ms(due_ms)));
    }
    clock.Set(table.ts[i]);
    for (std::size_t c = 0; c < names.size(); ++c) {
      metrics.Append({names[c], labels_of_series, table.ts[i], table.values[c][i]});
    }
    const auto report = orchestrator::RunInferenceTick(ctx, i - result.train_rows + 1, clock.NowMs());
    result.skipped_ticks += report.skipped > 0;
    result.failed_ticks += report.failed > 0;
    ReplayRow row;
    row.ts = table.ts[i];
    row.predicted = std::find(report.anomalous_models.begin(), report.anomalous_models.end(), result.model_id) !=
                            report.anomalous_models.end()
                        ? 1
                        : 0;
    if (labels) row.label = (*labels)[i];
    if (observer) observer(report, row);
    predicted.push_back(row.predicted);
    if (labels) actual.push_back(*row.label);
    result.rows.push_back(row);
  }
  result.replay_ms = Ms(std::chrono::steady_clock::now() - replay_start).count();
  if (labels) result.confusion = eval::Confuse(predicted, actual);
  return result;
}

nlohmann::json ReplayResultToJson(const ReplayResult& r, bool include_rows) {
  nlohmann::json anomalies = nlohmann::json::array();
  for (const auto& row : r.rows) {
    if (row.predicted) anomalies.push_back(row.ts);
  }
  nlohmann::json j{{"model_id", r.model_id},
                   {"model_type", r.model_type},
                   {"signals", r.signals},
                   {"train_rows", r.train_rows},
                   {"scored_rows", r.rows.size()},
                   {"anomalies", anomalies.size()},
                   {"anomaly_ts", anomalies},
                   {"skipped_ticks", r.skipped_ticks},
                   {"failed_ticks", r.failed_ticks},
                   {"train_ms", r.train_ms},
                   {"replay_ms", r.replay_ms}};
  if (r.confusion) {
    j["confusion"] = eval::ConfusionToJson(*r.confusion);
    j["precision"] = r.confusion->precision();
    j["recall"] = r.confusion->recall();
    j["balanced_accuracy"] = r.confusion->balanced_accuracy();
  }
  if (include_rows) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : r.rows) {
      nlohmann::json o{{"ts", row.ts}, {"predicted", row.predicted}};
      if (row.label) o["label"] = *row.label;
      rows.push_back(std::move(o));
    }
    j["rows"] = std::move(rows);
  }
  return j;
}

}  // namespace tickwatch::runtime
