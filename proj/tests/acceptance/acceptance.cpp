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

// Acceptance suite: one check per headline requirement, one PASS/FAIL line
// each. Exit status is the number of failed checks (capped at 1).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "scripted_model.hpp"
#include "tickwatch/api/service.hpp"
#include "tickwatch/api/webhook.hpp"
#include "tickwatch/detection/detector.hpp"
#include "tickwatch/drift/monitor.hpp"
#include "tickwatch/drift/statistics.hpp"
#include "tickwatch/eval/benchmarks.hpp"
#include "tickwatch/eval/experiments.hpp"
#include "tickwatch/models/iforest.hpp"
#include "tickwatch/orchestrator/tick.hpp"
#include "tickwatch/runtime/harness.hpp"

namespace {

using namespace tickwatch;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

// Collects failed expectations; the first few are reported.
class Tally {
 public:
  void Expect(bool ok, const std::string& what) {
    ++checked_;
    if (ok) return;
    ++failed_;
    if (failures_.size() < 3) failures_.push_back(what);
  }
  bool ok() const { return failed_ == 0; }
  std::string Summary() const {
    std::ostringstream out;
    out << (checked_ - failed_) << "/" << checked_ << " checks";
    for (const auto& f : failures_) out << "; " << f;
    return out.str();
  }

 private:
  long checked_ = 0;
  long failed_ = 0;
  std::vector<std::string> failures_;
};

std::string Fixed(double v, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

double Seconds(Clock::time_point start) { return std::chrono::duration<double>(Clock::now() - start).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

// ---------------------------------------------------------------------------

Outcome SeasonalRecallGain() {
  const auto start = Clock::now();
  const auto dataset = eval::SeasonalPointBenchmark(1);
  const auto arms = eval::SeasonalArms();
  const auto base = eval::RunArm(dataset, arms.at(0), 1);
  const auto seasonal = eval::RunArm(dataset, arms.at(1), 1);
  const auto& a = base.confusion;
  const auto& b = seasonal.confusion;
  const double elapsed = Seconds(start);
  const bool pass = b.recall() >= a.recall() + 0.10 && b.precision() >= a.precision() - 0.05 &&
                    b.balanced_accuracy() > a.balanced_accuracy() && elapsed < 120.0;
  return {pass, "recall " + Fixed(a.recall()) + " -> " + Fixed(b.recall()) + ", precision " +
                    Fixed(a.precision()) + " -> " + Fixed(b.precision()) + ", BA " + Fixed(a.balanced_accuracy()) +
                    " -> " + Fixed(b.balanced_accuracy()) + ", " + Fixed(elapsed, 1) + " s (< 120)"};
}

Outcome EnrichmentLadder() {
  const auto start = Clock::now();
  const auto arms = eval::EnrichmentArms();
  int hold_wins = 0;
  int smoothing_wins = 0;
  std::string per_dataset;
  for (int v = 0; v < eval::kBurstVariants; ++v) {
    const auto dataset = eval::BurstBenchmark(v, 1);
    double ba[3];
    for (int i = 0; i < 3; ++i) ba[i] = eval::RunArm(dataset, arms.at(static_cast<std::size_t>(i)), 1).confusion.balanced_accuracy();
    hold_wins += ba[1] >= ba[0] + 0.01;
    smoothing_wins += ba[2] >= ba[1] + 0.01;
    per_dataset += (v ? " | " : "") + Fixed(ba[0]) + "/" + Fixed(ba[1]) + "/" + Fixed(ba[2]);
  }
  const double elapsed = Seconds(start);
  const bool pass = hold_wins >= 3 && smoothing_wins >= 3 && elapsed < 300.0;
  return {pass, "BA if/hold/smooth " + per_dataset + "; hold +0.01 on " + std::to_string(hold_wins) +
                    "/4, smoothing +0.01 on " + std::to_string(smoothing_wins) + "/4, " + Fixed(elapsed, 1) +
                    " s (< 300)"};
}

Outcome DetectorContract() {
  using detection::Detect;
  using testing::ScriptedModel;
  using testing::WindowOf;
  constexpr int kCases = 1000;
  Tally t;
  int rule_cases = 0;

  std::mt19937_64 rng(101);
  for (int i = 0; i < kCases; ++i) {  // rule short-circuit
    const auto c = testing::DrawCase(rng);
    ScriptedModel model(1, Boundary{-1, 1});
    const auto w = WindowOf(c.values);
    const int breaches = detection::StaticBreachCount(w.Tail(c.spec.hold_window), c.spec);
    const auto v = Detect(c.spec, &model, w);
    if (breaches > c.spec.hold_tolerance) {
      ++rule_cases;
      t.Expect(v.is_anomaly && v.triggered_by == detection::Trigger::kRule && model.calls.load() == 0,
               "short-circuit case " + std::to_string(i));
    } else {
      t.Expect(v.triggered_by == detection::Trigger::kModel && model.calls.load() == 1,
               "model path case " + std::to_string(i));
    }
  }
  t.Expect(rule_cases > 50, "too few rule cases drawn");

  rng.seed(102);
  for (int i = 0; i < kCases; ++i) {  // hold monotonicity in k
    auto c = testing::DrawCase(rng);
    ScriptedModel model(1, Boundary{-1, 1});
    const auto w = WindowOf(c.values);
    bool previous = true;
    bool monotone = true;
    for (int k = 0; k < c.spec.hold_window; ++k) {
      c.spec.hold_tolerance = k;
      const bool now = Detect(c.spec, &model, w).is_anomaly;
      monotone = monotone && (previous || !now);
      previous = now;
    }
    t.Expect(monotone, "hold monotonicity case " + std::to_string(i));
  }

  rng.seed(103);
  for (int i = 0; i < kCases; ++i) {  // transient suppression
    const int L = std::uniform_int_distribution<int>(2, 10)(rng);
    detection::DetectorSpec spec;
    spec.model_id = "m";
    spec.hold_window = L;
    spec.hold_tolerance = std::uniform_int_distribution<int>(1, L - 1)(rng);
    spec.smoothing_alpha = std::uniform_real_distribution<double>(0.01, 1.0)(rng);
    std::vector<double> values(static_cast<std::size_t>(L + std::uniform_int_distribution<int>(0, 10)(rng)));
    std::uniform_real_distribution<double> calm(-0.9, 0.9);
    for (double& v : values) v = calm(rng);
    values[std::uniform_int_distribution<std::size_t>(0, values.size() - 1)(rng)] = 25.0;
    ScriptedModel model(1, Boundary{-1, 1});
    t.Expect(!Detect(spec, &model, WindowOf(values)).is_anomaly, "transient case " + std::to_string(i));
  }

  rng.seed(104);
  for (int i = 0; i < kCases; ++i) {  // determinism
    const auto c = testing::DrawCase(rng);
    ScriptedModel model(1, Boundary{-1, 1});
    const auto w = WindowOf(c.values);
    t.Expect(Detect(c.spec, &model, w) == Detect(c.spec, &model, w), "determinism case " + std::to_string(i));
  }
  return {t.ok(), "4 properties x 1000 cases: " + t.Summary()};
}

std::vector<double> Normal(std::size_t n, double mean, double sd, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(mean, sd);
  std::vector<double> out(n);
  for (double& x : out) x = d(rng);
  return out;
}

Outcome DriftStatistics() {
  using namespace drift;
  Tally t;
  auto near = [&](double got, double want, double tol, const std::string& what) {
    t.Expect(std::abs(got - want) <= tol, what + " = " + Fixed(got, 9) + ", want " + Fixed(want, 9));
  };
  const std::vector<double> abc{1, 2, 3};
  near(KsStatistic(abc, abc), 0.0, 1e-6, "ks identical");
  near(KsStatistic(abc, std::vector<double>{4, 5, 6}), 1.0, 1e-6, "ks disjoint");
  near(KsStatistic(std::vector<double>{1, 2}, std::vector<double>{1, 3}), 0.5, 1e-6, "ks half");
  const std::vector<double> half{0.5, 0.5};
  near(PsiProbs(half, half), 0.0, 1e-6, "psi equal");
  near(PsiProbs(half, std::vector<double>{0.25, 0.75}), 0.25 * std::log(3.0), 1e-6, "psi");
  t.Expect(std::isfinite(PsiProbs(half, std::vector<double>{0.0, 1.0})), "psi with emptied bin not finite");
  const std::vector<double> one_zero{1.0, 0.0};
  near(Kl(one_zero, one_zero), 0.0, 1e-6, "kl equal");
  near(Js(half, half), 0.0, 1e-6, "js equal");
  near(Kl(one_zero, half), std::log(2.0), 1e-4, "kl");
  near(Js(one_zero, std::vector<double>{0.0, 1.0}), std::log(2.0), 1e-4, "js disjoint");
  near(Wasserstein1(abc, abc), 0.0, 1e-6, "w1 identical");
  near(Wasserstein1(std::vector<double>{0}, std::vector<double>{1}), 1.0, 1e-6, "w1 point masses");
  near(Wasserstein1(std::vector<double>{0, 1}, std::vector<double>{1, 2}), 1.0, 1e-6, "w1 shift");
  {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> data(10000);
    for (double& x : data) x = u(rng);
    for (double p : Summarize(data, 10).bin_probs) near(p, 0.1, 0.02, "uniform bin");
    const std::vector<double> distinct{1, 2, 3, 4, 5};
    for (double p : Summarize(distinct, 5).bin_probs) near(p, 0.2, 1e-6, "n == k bin");
  }
  int healthy = 0;
  int drifted = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto train = Normal(3000, 5.0, 1.5, seed);
    const auto summary = Summarize(train, 10);
    const std::vector<int> counts{2, 1, 3, 0, 1, 2, 1};
    const auto calm = EvaluateDrift("m", summary, Normal(1440, 5.0, 1.5, seed + 1000), counts, 30 * kDayMs, 0);
    const auto shifted =
        EvaluateDrift("m", summary, Normal(1440, 5.0 + 3.0 * 1.5, 1.5, seed + 2000), counts, 30 * kDayMs, 0);
    healthy += calm.verdict == DriftVerdict::kHealthy;
    drifted += shifted.verdict == DriftVerdict::kDrifted;
  }
  t.Expect(healthy == 100, "identical runs healthy " + std::to_string(healthy) + "/100");
  t.Expect(drifted == 100, "3 sigma runs drifted " + std::to_string(drifted) + "/100");
  return {t.ok(), "golden values and Monte-Carlo verdicts (healthy " + std::to_string(healthy) + "/100, drifted " +
                      std::to_string(drifted) + "/100): " + t.Summary()};
}

Outcome ElectionFailover() {
  const auto start = Clock::now();
  runtime::ChaosFixture fixture(6, 7);
  int passed = 0;
  int unsafe = 0;
  int slow = 0;
  int not_once = 0;
  double worst = 0.0;
  std::string first_failure;
  for (std::uint64_t seed = 1; seed <= 1000; ++seed) {
    runtime::ChaosOptions options;
    options.seed = seed;
    options.nodes = 3 + static_cast<int>(seed % 3);
    options.loss = static_cast<double>(seed % 11) / 100.0;  // 0 .. 10 %
    const auto r = runtime::RunChaos(options, fixture);
    passed += r.passed();
    unsafe += !r.safety_ok;
    slow += !r.reelected_in_bound();
    not_once += !r.exactly_once;
    worst = std::max(worst, r.reelection_s / r.bound_s);
    if (!r.passed() && first_failure.empty()) first_failure = "; first failure " + runtime::ChaosResultToJson(r).dump();
  }
  return {passed == 1000, std::to_string(passed) + "/1000 runs (3-5 nodes, loss 0-10%): split-brain " +
                              std::to_string(unsafe) + ", re-election over 10 T " + std::to_string(slow) +
                              " (worst " + Fixed(worst * 10.0, 2) + " T), publish not exactly once " +
                              std::to_string(not_once) + ", " + Fixed(Seconds(start), 1) + " s" + first_failure};
}

Outcome TickThroughput() {
  runtime::BenchOptions options;
  options.models = 1000;
  const auto r = runtime::RunBench(options);
  bool complete = true;
  for (auto c : r.completed) complete = complete && c == 1000;
  const bool pass = complete && r.max_tick_ms() < 60'000.0 && r.cache.hit_ratio() >= 0.99;
  return {pass, "1000 models, " + std::to_string(r.workers) + " workers: max tick " + Fixed(r.max_tick_ms(), 1) +
                    " ms (< 60000), cache hit ratio " + Fixed(r.cache.hit_ratio(), 4) + " (>= 0.99), all completed " +
                    (complete ? "yes" : "no")};
}

class RecordingPoster : public api::WebhookPoster {
 public:
  int Post(const std::string& url, const std::string& body) override {
    urls.push_back(url);
    bodies.push_back(json::parse(body));
    return 200;
  }
  std::vector<std::string> urls;
  std::vector<json> bodies;
};

Outcome LifecycleRoundTrip() {
  using testing::kDay;
  using testing::kMinute;
  const auto start = Clock::now();
  Tally t;
  registry::Registry reg;
  orchestrator::MetricStore metrics;
  std::int64_t now = testing::kEpoch + 30 * kDay + 12 * 60 * kMinute;
  orchestrator::VirtualClock clock(now);
  RecordingPoster poster;
  api::WebhookConfig webhook_config;
  webhook_config.public_base_url = "http://tw.local";
  api::WebhookDispatcher webhooks(reg, poster, webhook_config, [&] { return clock.NowMs(); }, [](std::int64_t) {});
  orchestrator::LocalWorker worker("node-1", [&](const std::string& ref) { return reg.LoadArtifact(ref); });
  std::uint64_t tick_id = 0;
  api::ServiceHooks hooks;
  hooks.run_tick = [&] {
    orchestrator::TickContext ctx;
    ctx.registry = &reg;
    ctx.metrics = &metrics;
    ctx.leader_id = "node-0";
    ctx.term = 1;
    ctx.workers = {{"node-1", &worker}};
    ctx.on_alert = [&](const registry::AlertRecord& a) { webhooks.Enqueue(a.alert_id); };
    return orchestrator::TickReportToJson(orchestrator::RunInferenceTick(ctx, ++tick_id, clock.NowMs()));
  };
  api::ApiService service(reg, metrics, clock, &webhooks, hooks);
  auto call = [&](const std::string& method, const std::string& path, const json& body = nullptr) {
    api::ApiRequest r;
    r.method = method;
    r.path = path;
    if (!body.is_null()) r.body = body.dump();
    const auto resp = service.Handle(r);
    return std::make_pair(resp.status, resp.body.empty() ? json() : json::parse(resp.body));
  };
  std::mt19937_64 rng(9);
  std::normal_distribution<double> noise(0.0, 0.3);
  auto value_at = [&](std::int64_t ts) {
    const double phase = 2.0 * M_PI * static_cast<double>((ts / kMinute) % 1440) / 1440.0;
    return 10.0 + 3.0 * std::sin(phase) + noise(rng);
  };
  const std::map<std::string, std::string> labels{{"src", "prod"}};
  for (std::int64_t ts = now - 8 * kDay + kMinute; ts <= now; ts += kMinute) {
    metrics.Append({"cpu", labels, ts, value_at(ts)});
  }
  auto advance = [&](double offset) {
    now += kMinute;
    clock.Set(now);
    metrics.Append({"cpu", labels, now, value_at(now) + offset});
  };

  // register -> snapshot -> train
  auto [st, signal] = call("POST", "/v1/signals", {{"name", "cpu"}, {"query", "cpu{src=\"prod\"}"}});
  t.Expect(st == 201, "register signal status " + std::to_string(st));
  const std::string sid = signal.value("signal_id", "");
  auto [snap_status, snap] = call("POST", "/v1/signals/" + sid + "/snapshot", json::object());
  t.Expect(snap_status == 200 && snap.value("points", 0) >= 8 * 1440, "snapshot " + snap.dump().substr(0, 120));
  auto [train_status, model] = call("POST", "/v1/models",
                                    {{"model_type", "arima_uv"},
                                     {"signal_ids", {sid}},
                                     {"params", {{"order", {{"p", 1}, {"d", 0}, {"q", 0}}}, {"seasonality_period", 1440}}},
                                     {"spec", {{"hold_window", 3}, {"hold_tolerance", 1}, {"seasonality_period", 1440}}},
                                     {"channel_ref", "http://hooks.example/alerts"}});
  t.Expect(train_status == 201 && model.value("version", 0) == 1, "train status " + std::to_string(train_status));
  const std::string mid = model.value("model_id", "");

  // tick detects an injected anomaly; the webhook goes out
  for (int i = 0; i < 3; ++i) {
    advance(0.0);
    call("POST", "/v1/ticks", json::object());
  }
  std::string alert_id;
  for (int i = 0; i < 4 && alert_id.empty(); ++i) {
    advance(12.0);
    auto [tick_status, report] = call("POST", "/v1/ticks", json::object());
    t.Expect(tick_status == 200, "tick status " + std::to_string(tick_status));
    if (report.value("alerts_fired", 0) > 0) {
      auto [s, alerts] = call("GET", "/v1/alerts");
      if (s == 200 && !alerts.empty()) alert_id = alerts.back().value("alert_id", "");
    }
  }
  t.Expect(!alert_id.empty(), "no alert for the injected anomaly");
  t.Expect(!poster.bodies.empty() && poster.urls.front() == "http://hooks.example/alerts", "webhook not posted");
  auto [alert_status, alert] = call("GET", "/v1/alerts/" + alert_id);
  t.Expect(alert_status == 200 && alert.value("delivery", "") == "delivered", "alert delivery " + alert.dump().substr(0, 80));

  // FP feedback through the webhook's action link
  if (!poster.bodies.empty()) {
    const std::string link = poster.bodies.back()["actions"]["false_positive"];
    const std::string path = link.substr(std::string("http://tw.local").size());
    auto [fp_status, fp] = call("GET", path);
    t.Expect(fp_status == 200, "false-positive link status " + std::to_string(fp_status));
    auto [again, _] = call("GET", path);
    t.Expect(again == 409, "action link reused");
    auto [s, a] = call("GET", "/v1/alerts/" + poster.bodies.back().value("alert_id", ""));
    t.Expect(s == 200 && a["feedback"].is_object() && a["feedback"].value("label", "") == "false_positive",
             "feedback not recorded");
  }

  // forced noisy condition -> proposal -> timeout auto-applies -> version bump
  for (int i = 0; i < 80; ++i) reg.RecordAlert(mid, 1, now - i * kMinute, "low", json::object());
  auto [drift_status, job] = call("POST", "/v1/drift/run", json::object());
  t.Expect(drift_status == 200 && job["proposal_ids"].size() == 1, "drift job " + job.dump().substr(0, 160));
  const std::string pid = job["proposal_ids"].empty() ? "" : job["proposal_ids"][0].get<std::string>();
  auto [p_status, proposal] = call("GET", "/v1/proposals/" + pid);
  t.Expect(p_status == 200 && proposal.value("reason", "") == "noisy" && proposal.value("status", "") == "pending",
           "proposal " + proposal.dump().substr(0, 120));
  auto [before_status, before] = call("GET", "/v1/models/" + mid);
  t.Expect(before.value("active_version", 0) == 1, "version changed before the timeout");
  now += kDay + kMinute;
  clock.Set(now);
  call("GET", "/v1/proposals");
  auto [after_p_status, after_p] = call("GET", "/v1/proposals/" + pid);
  t.Expect(after_p.value("status", "") == "auto_applied", "proposal after timeout " + after_p.value("status", ""));
  auto [after_status, after] = call("GET", "/v1/models/" + mid);
  t.Expect(after_status == 200 && after.value("active_version", 0) == 2,
           "active version after timeout " + std::to_string(after.value("active_version", 0)));
  const double elapsed = Seconds(start);
  t.Expect(elapsed < 60.0, "scenario took " + Fixed(elapsed, 1) + " s");
  return {t.ok(), "register > snapshot > train > detect > webhook > FP > noisy proposal > auto-apply > v2 in " +
                      Fixed(elapsed, 2) + " s: " + t.Summary()};
}

Outcome IsolationForestOracle() {
  Tally t;
  std::mt19937_64 rng(17);
  std::normal_distribution<double> dist(0.0, 1.0);
  Matrix data;
  for (int i = 0; i < 1000; ++i) {
    const double row[2] = {dist(rng), dist(rng)};
    data.AppendRow(row);
  }
  const double outlier[2] = {10.0, 10.0};
  data.AppendRow(outlier);
  const auto model = models::IsolationForestFit(data, {100, 256, 0.01}, 42);
  std::size_t argmax = 0;
  double best = -1.0;
  bool in_range = true;
  for (std::size_t r = 0; r < data.rows(); ++r) {
    const double s = model->Score(data.row(r));
    in_range = in_range && s > 0.0 && s < 1.0;
    if (s > best) {
      best = s;
      argmax = r;
    }
  }
  t.Expect(argmax == 1000, "argmax row " + std::to_string(argmax));
  t.Expect(in_range, "score outside (0, 1)");
  double worst_gap = 0.0;
  for (int n : {2, 3, 10, 100, 256, 1000, 4096}) {
    const double hand = 2.0 * (std::log(n - 1.0) + 0.5772156649) - 2.0 * (n - 1.0) / n;
    worst_gap = std::max(worst_gap, std::abs(models::CFactor(n) - hand));
  }
  t.Expect(worst_gap <= 1e-9, "c_factor gap " + std::to_string(worst_gap));
  return {t.ok(), "1001 points: outlier score " + Fixed(best, 4) + " is the maximum, all scores in (0,1), c(n) max gap " +
                      std::to_string(worst_gap) + ": " + t.Summary()};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> checks{
      {"seasonal-profile-recall-gain", SeasonalRecallGain},
      {"enrichment-ladder", EnrichmentLadder},
      {"detector-contract-properties", DetectorContract},
      {"drift-statistics", DriftStatistics},
      {"election-failover", ElectionFailover},
      {"tick-throughput", TickThroughput},
      {"lifecycle-round-trip", LifecycleRoundTrip},
      {"isolation-forest-oracle", IsolationForestOracle},
  };
  int failed = 0;
  for (std::size_t i = 0; i < checks.size(); ++i) {
    const auto start = Clock::now();
    Outcome outcome;
    try {
      outcome = checks[i].second();
    } catch (const std::exception& e) {
      outcome = {false, std::string("threw: ") + e.what()};
    }
    failed += !outcome.pass;
    std::cout << (outcome.pass ? "PASS" : "FAIL") << " [" << i + 1 << "/" << checks.size() << "] " << checks[i].first
              << " (" << Fixed(Seconds(start), 2) << " s): " << outcome.detail << std::endl;
  }
  std::cout << (checks.size() - static_cast<std::size_t>(failed)) << "/" << checks.size() << " acceptance criteria passed"
            << std::endl;
  return failed == 0 ? 0 : 1;
}
