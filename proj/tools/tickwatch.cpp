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

#include <pthread.h>
#include <signal.h>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "tickwatch/api/node.hpp"
#include "tickwatch/core/error.hpp"
#include "tickwatch/orchestrator/clock.hpp"
#include "tickwatch/orchestrator/train.hpp"
#include "tickwatch/registry/registry.hpp"
#include "tickwatch/runtime/harness.hpp"

namespace {

using nlohmann::json;
using namespace tickwatch;

enum class Output { kText, kJsonLines };

struct Printer {
  Output mode = Output::kText;

  // Text mode prints one `key=value ...` line per record; nested values stay
  // compact JSON.
  void Emit(const json& j) const {
    if (mode == Output::kJsonLines) {
      std::cout << j.dump() << "\n";
      return;
    }
    if (!j.is_object()) {
      std::cout << j.dump() << "\n";
      return;
    }
    std::string line;
    for (const auto& [k, v] : j.items()) {
      if (!line.empty()) line += ' ';
      line += k + "=" + (v.is_string() ? v.get<std::string>() : v.dump());
    }
    std::cout << line << "\n";
  }
};

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kNotFound, "cannot read " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

json ParseJsonArg(const std::string& text, const char* what) {
  if (text.empty()) return json::object();
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    Fail(ErrorCode::kInvalidInput, std::string(what) + " is not valid JSON: " + e.what());
  }
}

std::vector<std::string> SplitList(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

int Serve(api::NodeConfig config, const std::vector<std::string>& roles, const Printer& out) {
  if (!roles.empty()) {
    config.coordinator = std::find(roles.begin(), roles.end(), "coordinator") != roles.end();
    config.worker = std::find(roles.begin(), roles.end(), "worker") != roles.end();
  }
  sigset_t stop_signals;
  sigemptyset(&stop_signals);
  sigaddset(&stop_signals, SIGINT);
  sigaddset(&stop_signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &stop_signals, nullptr);

  api::Node node(config);
  node.Start();
  out.Emit({{"event", "serving"}, {"node_id", config.node_id}, {"http_port", node.http_port()},
            {"status", node.Status()}});
  std::cout.flush();
  int received = 0;
  sigwait(&stop_signals, &received);
  node.Stop();
  out.Emit({{"event", "stopped"}, {"signal", received}});
  return 0;
}

int Onboard(const std::string& csv_path, const std::string& data_dir, const std::string& prefix,
            const Printer& out) {
  const registry::CsvTable table = registry::ParseCsv(ReadFile(csv_path));
  if (table.ts.size() < 2) Fail(ErrorCode::kInsufficientData, "csv needs at least two rows");
  registry::Registry reg(data_dir);
  const orchestrator::SystemClock clock;
  const std::int64_t step = table.ts[1] - table.ts[0];
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    if (table.columns[c] == "label") continue;
    const std::string name = prefix.empty() ? table.columns[c] : prefix + "_" + table.columns[c];
    const auto signal = reg.RegisterSignal(name, name + "{src=\"csv\"}", clock.NowMs());
    registry::Dataset d;
    d.signal_id = signal.signal_id;
    d.step_ms = step;
    for (std::size_t i = 0; i < table.ts.size(); ++i) d.points.push_back({table.ts[i], table.values[c][i]});
    d.start_ts = d.points.front().ts;
    reg.PutDataset(d, clock.NowMs());
    const auto stored = reg.LoadDataset(signal.signal_id);
    out.Emit({{"signal_id", signal.signal_id},
              {"name", name},
              {"points", stored.points.size()},
              {"step_ms", stored.step_ms},
              {"span_ms", stored.span_ms()},
              {"short", stored.is_short()}});
  }
  return 0;
}

struct TrainArgs {
  std::string data_dir;
  std::string signals;
  std::string model_type = "arima_uv";
  std::string params;
  std::string spec;
  std::string channel;
  std::uint64_t seed = 1;
  bool series = false;
};

orchestrator::TrainRequest BuildRequest(const TrainArgs& a) {
  orchestrator::TrainRequest req;
  req.model_type = a.model_type;
  req.signal_ids = SplitList(a.signals);
  req.params = ParseJsonArg(a.params, "--params");
  req.spec = detection::SpecFromJson(ParseJsonArg(a.spec, "--spec"));
  req.channel_ref = a.channel;
  req.seed = a.seed;
  return req;
}

int Train(const TrainArgs& a, const Printer& out) {
  registry::Registry reg(a.data_dir);
  auto req = BuildRequest(a);
  req.register_model = true;
  const auto result = orchestrator::RunTrainJob(reg, req, orchestrator::SystemClock().NowMs());
  out.Emit({{"model_id", result.record->model_id},
            {"version", result.record->version},
            {"model_type", result.record->model_type},
            {"artifact_ref", result.artifact_ref},
            {"trained_rows", result.trained_rows},
            {"spec", detection::SpecToJson(result.spec)}});
  return 0;
}

int Preview(const TrainArgs& a, const Printer& out) {
  registry::Registry reg(a.data_dir);
  const auto preview = orchestrator::RunPreview(reg, BuildRequest(a), orchestrator::SystemClock().NowMs());
  std::size_t flagged = 0;
  for (int f : preview.series.flags) flagged += f != 0;
  json j{{"trained_rows", preview.train.trained_rows},
         {"rows", preview.series.flags.size()},
         {"flagged", flagged},
         {"spec", detection::SpecToJson(preview.train.spec)},
         {"temporary", true}};
  if (a.series) j["series"] = orchestrator::SeriesVerdictToJson(preview.series);
  out.Emit(j);
  return 0;
}

struct ReplayArgs {
  std::string dataset;
  std::string speed = "max";
  std::string model_type;
  std::string params;
  std::string spec;
  std::size_t train_rows = 0;
  std::uint64_t seed = 1;
  bool ticks = false;
};

int Replay(const ReplayArgs& a, const Printer& out) {
  runtime::ReplayOptions options;
  options.model_type = a.model_type;
  options.params = ParseJsonArg(a.params, "--params");
  options.spec = detection::SpecFromJson(ParseJsonArg(a.spec, "--spec"));
  if (a.train_rows > 0) options.train_rows = a.train_rows;
  options.seed = a.seed;
  if (a.speed != "max") {
    try {
      options.speed = std::stod(a.speed);
    } catch (const std::exception&) {
      options.speed = 0.0;
    }
    if (!(options.speed > 0.0)) Fail(ErrorCode::kInvalidInput, "--speed must be 'max' or a positive factor");
  }
  runtime::TickObserver observer;
  if (a.ticks) {
    observer = [&out](const orchestrator::TickReport& report, const runtime::ReplayRow& row) {
      json j = orchestrator::TickReportToJson(report);
      j["predicted"] = row.predicted;
      if (row.label) j["label"] = *row.label;
      out.Emit(j);
    };
  }
  const auto result = runtime::RunReplay(ReadFile(a.dataset), options, observer);
  json summary = runtime::ReplayResultToJson(result);
  summary["event"] = "replay_summary";
  out.Emit(summary);
  return result.failed_ticks == 0 ? 0 : 1;
}

int Bench(const runtime::BenchOptions& options, const Printer& out) {
  const auto result = runtime::RunBench(options);
  for (std::size_t t = 0; t < result.tick_ms.size(); ++t) {
    out.Emit({{"event", "tick"}, {"tick", t + 1}, {"wall_ms", result.tick_ms[t]},
              {"completed", result.completed[t]}});
  }
  json summary = runtime::BenchResultToJson(result);
  summary["event"] = "bench_summary";
  out.Emit(summary);
  for (auto c : result.completed) {
    if (c != static_cast<std::size_t>(options.models)) return 1;
  }
  return 0;
}

int Chaos(runtime::ChaosOptions options, int runs, int models, const Printer& out) {
  runtime::ChaosFixture fixture(models, options.seed);
  int failed = 0;
  const std::uint64_t first = options.seed;
  for (int r = 0; r < runs; ++r) {
    options.seed = first + static_cast<std::uint64_t>(r);
    const auto result = runtime::RunChaos(options, fixture);
    failed += !result.passed();
    json j = runtime::ChaosResultToJson(result);
    j["event"] = "chaos_run";
    out.Emit(j);
  }
  out.Emit({{"event", "chaos_summary"}, {"runs", runs}, {"passed", runs - failed}, {"failed", failed}});
  return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tickwatch: streaming anomaly detection service"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string output = "text";
  app.add_option("--output", output, "Output format")
      ->check(CLI::IsMember({"text", "json-lines"}))
      ->capture_default_str();

  api::NodeConfig node;
  try {
    api::ApplyEnvironment(node);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  std::string peers;
  std::string workers;
  std::vector<std::string> roles;
  auto* serve = app.add_subcommand("serve", "Run a node: HTTP API, election, tick loop");
  serve->add_option("--node-id", node.node_id)->capture_default_str();
  serve->add_option("--data-dir", node.data_dir, "Registry directory (empty: in memory)");
  serve->add_option("--host", node.http_host)->capture_default_str();
  serve->add_option("--port", node.http_port, "HTTP port (0: any free port)")->capture_default_str();
  serve->add_option("--peers", peers, "Coordinators as id=host:port,... including this node");
  serve->add_option("--workers", workers, "Worker-only nodes as id=host:port,...");
  serve->add_option("--role", roles, "coordinator and/or worker (default both)")
      ->check(CLI::IsMember({"coordinator", "worker"}))
      ->delimiter(',');
  serve->add_option("--tick-period-ms", node.tick_period_ms)->capture_default_str();
  serve->add_option("--election-timeout-ms", node.election_timeout_ms)->capture_default_str();
  serve->add_option("--token", node.bearer_token, "Bearer token required on /v1");
  serve->add_option("--public-url", node.public_base_url, "Base URL used in webhook action links");
  serve->add_option("--seed", node.seed)->capture_default_str();

  std::string csv;
  std::string data_dir = node.data_dir.string();
  std::string prefix;
  auto* onboard = app.add_subcommand("onboard", "Ingest a CSV as signals with stored datasets");
  onboard->add_option("--csv", csv, "ts_ms,value or ts_ms,f1,...,fk (optional header)")->required();
  onboard->add_option("--data-dir", data_dir, "Registry directory");
  onboard->add_option("--prefix", prefix, "Signal name prefix");

  TrainArgs train_args;
  train_args.data_dir = node.data_dir.string();
  auto add_train_options = [&](CLI::App* cmd) {
    cmd->add_option("--data-dir", train_args.data_dir, "Registry directory");
    cmd->add_option("--signals", train_args.signals, "Signal ids, comma separated")->required();
    cmd->add_option("--model-type", train_args.model_type)
        ->check(CLI::IsMember({"arima_uv", "iforest_mv"}))
        ->capture_default_str();
    cmd->add_option("--params", train_args.params, "Model parameters as JSON");
    cmd->add_option("--spec", train_args.spec, "Detector spec as JSON");
    cmd->add_option("--seed", train_args.seed)->capture_default_str();
  };
  auto* train = app.add_subcommand("train", "Train on stored datasets and register a model version");
  add_train_options(train);
  train->add_option("--channel", train_args.channel, "Webhook URL for alerts");
  auto* preview = app.add_subcommand("preview", "Fast-train on the last three days and chart verdicts");
  add_train_options(preview);
  preview->add_flag("--series", train_args.series, "Include the full verdict series");

  ReplayArgs replay_args;
  auto* replay = app.add_subcommand("replay", "Replay a CSV end to end on a virtual clock");
  replay->add_option("--dataset", replay_args.dataset, "ts_ms,f1..fk[,label] CSV")->required();
  replay->add_option("--speed", replay_args.speed, "'max' or a speed-up factor")->capture_default_str();
  replay->add_option("--model-type", replay_args.model_type, "Default: by column count");
  replay->add_option("--params", replay_args.params, "Model parameters as JSON");
  replay->add_option("--spec", replay_args.spec, "Detector spec as JSON");
  replay->add_option("--train-rows", replay_args.train_rows, "Leading rows used for training");
  replay->add_option("--seed", replay_args.seed)->capture_default_str();
  replay->add_flag("--ticks", replay_args.ticks, "Emit every tick report");

  runtime::BenchOptions bench_options;
  auto* bench = app.add_subcommand("bench", "Tick latency and cache report for N models");
  bench->add_option("--models", bench_options.models)->capture_default_str();
  bench->add_option("--signals", bench_options.signals, "Shared signals (default min(N, 50))");
  bench->add_option("--workers", bench_options.workers)->capture_default_str();
  bench->add_option("--ticks", bench_options.ticks, "Measured ticks after warm-up")->capture_default_str();
  bench->add_option("--seed", bench_options.seed)->capture_default_str();

  runtime::ChaosOptions chaos_options;
  int chaos_runs = 1;
  int chaos_models = 6;
  auto* chaos = app.add_subcommand("chaos", "Seeded leader-failure simulation with a post-failover tick");
  chaos->add_flag("--kill-leader", "Kill the elected leader (the supported scenario)")->required();
  chaos->add_option("--seed", chaos_options.seed)->capture_default_str();
  chaos->add_option("--nodes", chaos_options.nodes)->check(CLI::Range(3, 9))->capture_default_str();
  chaos->add_option("--loss", chaos_options.loss, "Message loss probability")
      ->check(CLI::Range(0.0, 0.5))
      ->capture_default_str();
  chaos->add_option("--timeout", chaos_options.election_timeout, "Election timeout T (simulated s)")
      ->capture_default_str();
  chaos->add_option("--runs", chaos_runs, "Consecutive seeds starting at --seed")->capture_default_str();
  chaos->add_option("--models", chaos_models)->capture_default_str();

  CLI11_PARSE(app, argc, argv);
  Printer out{output == "json-lines" ? Output::kJsonLines : Output::kText};
  try {
    if (*serve) {
      if (!peers.empty()) node.peers = api::ParsePeerList(peers);
      if (!workers.empty()) node.workers = api::ParsePeerList(workers);
      return Serve(node, roles, out);
    }
    if (*onboard) return Onboard(csv, data_dir, prefix, out);
    if (*train) return Train(train_args, out);
    if (*preview) return Preview(train_args, out);
    if (*replay) return Replay(replay_args, out);
    if (*bench) return Bench(bench_options, out);
    if (*chaos) return Chaos(chaos_options, chaos_runs, chaos_models, out);
  } catch (const Error& e) {
    std::cerr << "error: " << ErrorCodeName(e.code()) << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
