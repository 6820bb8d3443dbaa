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

#include <gtest/gtest.h>

#include <deque>

#include "fixtures.hpp"
#include "httplib.h"
#include "tickwatch/api/http_server.hpp"
#include "tickwatch/api/service.hpp"
#include "tickwatch/api/webhook.hpp"

namespace tickwatch {
namespace {

using nlohmann::json;
using testing::kDay;
using testing::kEpoch;
using testing::kMinute;

class FakePoster : public api::WebhookPoster {
 public:
  int Post(const std::string& url, const std::string& body) override {
    urls.push_back(url);
    bodies.push_back(json::parse(body));
    if (statuses.empty()) return fallback;
    const int s = statuses.front();
    statuses.pop_front();
    return s;
  }
  std::deque<int> statuses;
  int fallback = 200;
  std::vector<std::string> urls;
  std::vector<json> bodies;
};

struct ApiFixture : ::testing::Test {
  testing::Sandbox box;
  orchestrator::VirtualClock clock{0};
  FakePoster poster;
  std::vector<std::int64_t> sleeps;
  std::unique_ptr<api::WebhookDispatcher> webhooks;
  std::unique_ptr<api::ApiService> service;
  std::string signal_id;
  registry::ModelRecord model;

  void SetUp() override {
    clock.Set(box.now);
    signal_id = box.AddSignal("cpu", testing::SeasonalSeries(box.now - 7 * kDay, 7 * 1440, 3));
    orchestrator::TrainRequest req;
    req.model_type = "arima_uv";
    req.signal_ids = {signal_id};
    req.params = {{"order", {{"p", 1}, {"d", 0}, {"q", 0}}}};
    req.channel_ref = "http://hooks.example/alerts";
    req.register_model = true;
    model = *orchestrator::RunTrainJob(box.registry, req, box.now).record;
    api::WebhookConfig cfg;
    cfg.public_base_url = "http://tw.local";
    webhooks = std::make_unique<api::WebhookDispatcher>(
        box.registry, poster, cfg, [this] { return clock.NowMs(); },
        [this](std::int64_t ms) { sleeps.push_back(ms); });
    service = std::make_unique<api::ApiService>(box.registry, box.metrics, clock, webhooks.get());
  }

  std::string FireAlert() {
    return box.registry
        .RecordAlert(model.model_id, model.version, box.now, "high",
                     {{"triggered_by", "model"}, {"anomaly_count", 3}, {"breach_count", 0}})
        .alert_id;
  }

  api::ApiResponse Call(const std::string& method, const std::string& path, const json& body = nullptr,
                        std::map<std::string, std::string> headers = {},
                        std::map<std::string, std::string> query = {}) {
    api::ApiRequest r;
    r.method = method;
    r.path = path;
    r.query = std::move(query);
    r.headers = std::move(headers);
    if (!body.is_null()) r.body = body.dump();
    return service->Handle(r);
  }
};

// Webhook delivery.

TEST_F(ApiFixture, WebhookHealthyEndpointTakesOneAttempt) {
  const auto id = FireAlert();
  const auto result = webhooks->Deliver(id);
  EXPECT_TRUE(result.delivered);
  EXPECT_EQ(result.attempts, 1);
  EXPECT_TRUE(sleeps.empty());
  ASSERT_EQ(poster.bodies.size(), 1u);
  EXPECT_EQ(poster.urls[0], "http://hooks.example/alerts");
  const json& ev = poster.bodies[0];
  EXPECT_EQ(ev["alert_id"], id);
  EXPECT_EQ(ev["model_name"], "cpu");
  EXPECT_EQ(ev["summary"]["anomaly_count"], 3);
  for (const char* action : {"true_positive", "false_positive", "snooze", "delete"}) {
    const std::string url = ev["actions"][action];
    EXPECT_EQ(url.rfind("http://tw.local/v1/actions/", 0), 0u) << url;
  }
  const auto stored = box.registry.GetAlert(id);
  EXPECT_EQ(stored.delivery, registry::DeliveryStatus::kDelivered);
  EXPECT_EQ(stored.delivery_attempts, 1);
}

TEST_F(ApiFixture, WebhookRetriesWithExponentialBackoff) {
  poster.statuses = {500, 503, 200};
  const auto result = webhooks->Deliver(FireAlert());
  EXPECT_TRUE(result.delivered);
  EXPECT_EQ(result.attempts, 3);
  EXPECT_EQ(sleeps, (std::vector<std::int64_t>{200, 400}));
}

TEST_F(ApiFixture, WebhookDownEndpointFailsAfterThreeAttemptsAndAlertStaysOpen) {
  poster.fallback = 0;
  const auto id = FireAlert();
  const auto result = webhooks->Deliver(id);
  EXPECT_FALSE(result.delivered);
  EXPECT_EQ(result.attempts, 3);
  EXPECT_EQ(result.error.rfind("DeliveryFailed", 0), 0u) << result.error;
  const auto stored = box.registry.GetAlert(id);
  EXPECT_EQ(stored.delivery, registry::DeliveryStatus::kFailed);
  EXPECT_EQ(stored.delivery_attempts, 3);
  EXPECT_EQ(stored.EffectiveState(box.now), registry::AlertState::kOpen);
}

TEST_F(ApiFixture, WebhookQueueOverflowDropsOldest) {
  api::WebhookConfig cfg;
  cfg.queue_capacity = 2;
  api::WebhookDispatcher small(box.registry, poster, cfg, [this] { return clock.NowMs(); },
                               [](std::int64_t) {});
  const auto a = FireAlert(), b = FireAlert(), c = FireAlert();
  small.Enqueue(a);
  small.Enqueue(b);
  small.Enqueue(c);
  EXPECT_EQ(small.dropped(), 1u);
  EXPECT_EQ(small.Drain(), 2u);
  ASSERT_EQ(poster.bodies.size(), 2u);
  EXPECT_EQ(poster.bodies[0]["alert_id"], b);
  EXPECT_EQ(poster.bodies[1]["alert_id"], c);
  EXPECT_EQ(box.registry.GetAlert(a).delivery, registry::DeliveryStatus::kPending);
}

TEST_F(ApiFixture, WebhookBackgroundWorkerDelivers) {
  const auto id = FireAlert();
  webhooks->Start();
  webhooks->Enqueue(id);
  for (int i = 0; i < 200 && box.registry.GetAlert(id).delivery == registry::DeliveryStatus::kPending; ++i) {
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  webhooks->Stop();
  EXPECT_EQ(box.registry.GetAlert(id).delivery, registry::DeliveryStatus::kDelivered);
}

TEST_F(ApiFixture, ActionLinkIsSingleUse) {
  const auto id = FireAlert();
  webhooks->Deliver(id);
  const std::string url = poster.bodies[0]["actions"]["false_positive"];
  const std::string path = url.substr(std::string("http://tw.local").size());
  const auto first = Call("GET", path);
  ASSERT_EQ(first.status, 200) << first.body;
  EXPECT_EQ(first.Json()["alert"]["feedback"]["label"], "false_positive");
  const auto second = Call("GET", path);
  EXPECT_EQ(second.status, 409);
  EXPECT_EQ(second.Json()["code"], "Conflict");
  EXPECT_EQ(Call("GET", "/v1/actions/nope").status, 404);
}

// Router.

TEST_F(ApiFixture, HealthAndExposition) {
  EXPECT_EQ(Call("GET", "/healthz").Json()["status"], "ok");
  const auto metrics = Call("GET", "/metrics");
  EXPECT_EQ(metrics.status, 200);
  EXPECT_NE(metrics.content_type.find("text/plain"), std::string::npos);
  EXPECT_NE(metrics.body.find("cpu{src=\"test\"}"), std::string::npos);
}

TEST_F(ApiFixture, ErrorEnvelopeAndStatusMapping) {
  const auto bad = Call("POST", "/v1/signals", {{"name", "x"}, {"query", "cpu{src="}});
  EXPECT_EQ(bad.status, 400);
  const json j = bad.Json();
  EXPECT_EQ(j["code"], "InvalidQuery");
  EXPECT_TRUE(j["message"].is_string());
  EXPECT_TRUE(j["details"].is_object());

  EXPECT_EQ(Call("GET", "/v1/models/m-missing").status, 404);
  EXPECT_EQ(Call("GET", "/v1/nothing").status, 404);
  api::ApiRequest raw{"POST", "/v1/signals", {}, {}, "{not json"};
  const auto malformed = service->Handle(raw);
  EXPECT_EQ(malformed.status, 400);
  EXPECT_EQ(malformed.Json()["code"], "InvalidInput");
  EXPECT_EQ(Call("GET", "/v1/metrics/query", nullptr, {}, {{"selector", "{}"}}).status, 400);
  EXPECT_EQ(api::HttpStatusFor(ErrorCode::kModelUnavailable), 503);
  EXPECT_EQ(api::HttpStatusFor(ErrorCode::kDeliveryFailed), 502);
  EXPECT_EQ(api::HttpStatusFor(ErrorCode::kInvalidState), 409);
}

TEST_F(ApiFixture, SignalLifecycle) {
  box.metrics.AppendSeries("mem", {{"src", "test"}},
                           testing::SeasonalSeries(box.now - 2 * kDay, 2 * 1440, 9));
  const auto created = Call("POST", "/v1/signals", {{"name", "mem"}, {"query", "mem{src=\"test\"}"}});
  ASSERT_EQ(created.status, 201) << created.body;
  const std::string id = created.Json()["signal_id"];
  EXPECT_EQ(Call("POST", "/v1/signals", {{"name", "mem"}, {"query", "mem"}}).status, 409);
  const auto snap = Call("POST", "/v1/signals/" + id + "/snapshot");
  ASSERT_EQ(snap.status, 200) << snap.body;
  EXPECT_EQ(snap.Json()["points"], 2 * 1440);
  EXPECT_TRUE(snap.Json()["short"]);
  const auto csv = Call("GET", "/v1/signals/" + id + "/dataset");
  EXPECT_EQ(csv.content_type, "text/csv");
  EXPECT_FALSE(csv.body.empty());
  const auto renamed = Call("PATCH", "/v1/signals/" + id, {{"name", "memory"}});
  EXPECT_EQ(renamed.Json()["name"], "memory");
  EXPECT_EQ(Call("GET", "/v1/signals").Json().size(), 2u);
  EXPECT_EQ(Call("DELETE", "/v1/signals/" + id).status, 200);
  EXPECT_EQ(Call("GET", "/v1/signals").Json().size(), 1u);
}

TEST_F(ApiFixture, IdempotencyKeyReplaysStoredResponse) {
  box.metrics.AppendSeries("disk", {{"src", "test"}}, testing::SeasonalSeries(box.now - kDay, 10, 1));
  const json body = {{"name", "disk"}, {"query", "disk{src=\"test\"}"}};
  const auto first = Call("POST", "/v1/signals", body, {{"idempotency-key", "k1"}});
  const auto second = Call("POST", "/v1/signals", body, {{"idempotency-key", "k1"}});
  EXPECT_EQ(first.status, 201);
  EXPECT_EQ(second.status, 201);
  EXPECT_EQ(first.body, second.body);
  EXPECT_EQ(box.registry.ListSignals().size(), 2u);
  EXPECT_EQ(Call("POST", "/v1/signals", body, {{"idempotency-key", "k2"}}).status, 409);
}

TEST_F(ApiFixture, PreviewReturnsPairedSeriesWithoutRegistering) {
  const auto res = Call("POST", "/v1/models/preview",
                        {{"model_type", "arima_uv"},
                         {"signal_ids", {signal_id}},
                         {"params", {{"order", {{"p", 1}, {"d", 0}, {"q", 0}}}}}});
  ASSERT_EQ(res.status, 200) << res.body.substr(0, 400);
  const json s = res.Json()["series"];
  const std::size_t n = s["ts"].size();
  EXPECT_EQ(n, 3u * 1440);
  for (const char* key : {"original", "predicted", "score", "flag"}) EXPECT_EQ(s[key].size(), n) << key;
  EXPECT_TRUE(res.Json()["temporary"]);
  EXPECT_EQ(box.registry.ListModels().size(), 1u);

  const auto by_model = Call("POST", "/v1/models/" + model.model_id + "/preview", {{"spec", {{"hold_window", 7}}}});
  ASSERT_EQ(by_model.status, 200) << by_model.body.substr(0, 400);
  EXPECT_EQ(by_model.Json()["spec"]["hold_window"], 7);
}

TEST_F(ApiFixture, ModelEndpoints) {
  const std::string base = "/v1/models/" + model.model_id;
  EXPECT_EQ(Call("GET", "/v1/models").Json().size(), 1u);
  EXPECT_EQ(Call("PATCH", base, {{"status", "paused"}}).Json()["status"], "paused");
  EXPECT_EQ(Call("PATCH", base, {{"status", "active"}}).Json()["status"], "active");
  const auto retrained = Call("POST", base + "/train", {{"noise_eta", 0.05}, {"seed", 4}});
  ASSERT_EQ(retrained.status, 201) << retrained.body;
  EXPECT_EQ(retrained.Json()["version"], 2);
  EXPECT_EQ(Call("GET", base + "/versions").Json().size(), 2u);
  EXPECT_EQ(Call("POST", base + "/activate", {{"version", 1}}).Json()["active_version"], 1);
  EXPECT_EQ(Call("GET", base, nullptr, {}, {{"version", "2"}}).Json()["version"], 2);
  EXPECT_EQ(Call("DELETE", base).Json()["status"], "deleted");
  EXPECT_EQ(Call("GET", "/v1/models").Json().size(), 0u);
}

TEST_F(ApiFixture, CreateModelTrainsAndRegisters) {
  const auto res = Call("POST", "/v1/models",
                        {{"model_type", "arima_uv"},
                         {"signal_ids", {signal_id}},
                         {"params", {{"order", {{"p", 2}, {"d", 0}, {"q", 0}}}}}});
  ASSERT_EQ(res.status, 201) << res.body;
  EXPECT_EQ(res.Json()["version"], 1);
  EXPECT_EQ(Call("POST", "/v1/models", {{"model_type", "nope"}, {"signal_ids", {signal_id}}}).status, 400);
}

TEST_F(ApiFixture, DetectScoresSuppliedRows) {
  json rows = json::array();
  for (int i = 0; i < 60; ++i) rows.push_back({10.0});
  auto res = Call("POST", "/v1/detect", {{"model_id", model.model_id}, {"rows", rows}});
  ASSERT_EQ(res.status, 200) << res.body;
  EXPECT_FALSE(res.Json()["is_anomaly"]);
  for (int i = 55; i < 60; ++i) rows[i] = {95.0};
  res = Call("POST", "/v1/detect", {{"model_id", model.model_id}, {"rows", rows}});
  ASSERT_EQ(res.status, 200) << res.body;
  EXPECT_TRUE(res.Json()["is_anomaly"]);
  EXPECT_EQ(Call("POST", "/v1/detect", {{"model_id", model.model_id}, {"rows", json::array()}}).status, 400);
}

TEST_F(ApiFixture, DoubleFeedbackConflicts) {
  const auto id = FireAlert();
  const auto path = "/v1/alerts/" + id + "/feedback";
  ASSERT_EQ(Call("POST", path, {{"label", "true_positive"}}).status, 200);
  const auto again = Call("POST", path, {{"label", "false_positive"}});
  EXPECT_EQ(again.status, 409);
  EXPECT_EQ(again.Json()["code"], "Conflict");
}

TEST_F(ApiFixture, SnoozeLapsesAndDeleteHides) {
  const auto id = FireAlert();
  const auto snoozed = Call("POST", "/v1/alerts/" + id + "/snooze", {{"minutes", 30}});
  ASSERT_EQ(snoozed.status, 200) << snoozed.body;
  EXPECT_EQ(Call("GET", "/v1/alerts/" + id).Json()["effective_state"], "snoozed");
  clock.Advance(31 * kMinute);
  EXPECT_EQ(Call("GET", "/v1/alerts/" + id).Json()["effective_state"], "open");
  EXPECT_EQ(Call("DELETE", "/v1/alerts/" + id).status, 200);
  EXPECT_EQ(Call("GET", "/v1/alerts").Json().size(), 0u);
  EXPECT_EQ(Call("GET", "/v1/alerts", nullptr, {}, {{"include_deleted", "true"}}).Json().size(), 1u);
}

TEST_F(ApiFixture, DriftRunAndProposalApproval) {
  box.metrics.AppendSeries("cpu", {{"src", "test"}},
                           testing::SeasonalSeries(box.now + kMinute, 1440, 5, 30.0));
  clock.Set(box.now + kDay + kMinute);
  const auto run = Call("POST", "/v1/drift/run");
  ASSERT_EQ(run.status, 200) << run.body;
  ASSERT_EQ(run.Json()["proposal_ids"].size(), 1u) << run.body;
  const std::string pid = run.Json()["proposal_ids"][0];
  EXPECT_EQ(Call("GET", "/v1/drift/reports").Json()[0]["verdict"], "drifted");
  const auto prop = Call("GET", "/v1/proposals/" + pid).Json();
  EXPECT_FALSE(prop.contains("candidate_artifact"));
  EXPECT_EQ(Call("GET", "/v1/proposals", nullptr, {}, {{"status", "pending"}}).Json().size(), 1u);
  const auto approved = Call("POST", "/v1/proposals/" + pid + "/approve");
  ASSERT_EQ(approved.status, 200) << approved.body;
  EXPECT_EQ(approved.Json()["outcome"], "applied");
  EXPECT_EQ(box.registry.GetModel(model.model_id).version, 2);
  EXPECT_EQ(Call("POST", "/v1/proposals/" + pid + "/reject").status, 409);
}

TEST_F(ApiFixture, BearerTokenGuardsApiButNotActionsOrHealth) {
  api::ServiceOptions opts;
  opts.bearer_token = "s3cret";
  api::ApiService guarded(box.registry, box.metrics, clock, nullptr, {}, opts);
  api::ApiRequest r{"GET", "/v1/models", {}, {}, ""};
  EXPECT_EQ(guarded.Handle(r).status, 401);
  r.headers["authorization"] = "Bearer s3cret";
  EXPECT_EQ(guarded.Handle(r).status, 200);
  EXPECT_EQ(guarded.Handle({"GET", "/healthz", {}, {}, ""}).status, 200);
  EXPECT_EQ(guarded.Handle({"GET", "/v1/actions/none", {}, {}, ""}).status, 404);
}

TEST_F(ApiFixture, HttpServerRoundTrip) {
  api::HttpServer server(*service);
  const int port = server.Start("127.0.0.1", 0);
  httplib::Client client("127.0.0.1", port);
  auto res = client.Get("/healthz");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  res = client.Get("/v1/models/" + model.model_id + "?version=1");
  ASSERT_TRUE(res);
  EXPECT_EQ(json::parse(res->body)["version"], 1);
  res = client.Post("/v1/signals", R"({"name":"x","query":"bad{"})", "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 400);
  server.Stop();
}

}  // namespace
}  // namespace tickwatch
