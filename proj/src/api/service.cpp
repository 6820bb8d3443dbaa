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

#include "tickwatch/api/service.hpp"

#include <algorithm>
#include <sstream>

#include "tickwatch/core/error.hpp"
#include "tickwatch/detection/detector.hpp"
#include "tickwatch/models/artifact.hpp"
#include "tickwatch/orchestrator/train.hpp"

namespace tickwatch::api {
namespace {

using nlohmann::json;
using Params = std::map<std::string, std::string>;

ApiResponse JsonResponse(int status, const json& body) {
  return ApiResponse{status, "application/json", body.dump()};
}

std::vector<std::string> SplitPath(const std::string& path) {
  std::vector<std::string> parts;
  std::stringstream ss(path);
  std::string part;
  while (std::getline(ss, part, '/')) {
    if (!part.empty()) parts.push_back(part);
  }
  return parts;
}

// Matches "/v1/models/{id}/train" style patterns.
bool Match(const std::string& pattern, const std::vector<std::string>& parts, Params& out) {
  const auto want = SplitPath(pattern);
  if (want.size() != parts.size()) return false;
  Params captured;
  for (std::size_t i = 0; i < want.size(); ++i) {
    if (want[i].front() == '{') {
      captured[want[i].substr(1, want[i].size() - 2)] = parts[i];
    } else if (want[i] != parts[i]) {
      return false;
    }
  }
  out = std::move(captured);
  return true;
}

json Body(const ApiRequest& r) {
  if (r.body.empty()) return json::object();
  try {
    json j = json::parse(r.body);
    if (!j.is_object()) Fail(ErrorCode::kInvalidInput, "request body must be a JSON object");
    return j;
  } catch (const json::parse_error& e) {
    Fail(ErrorCode::kInvalidInput, std::string("malformed JSON: ") + e.what());
  }
}

std::int64_t QueryInt(const ApiRequest& r, const std::string& key, std::int64_t fallback) {
  auto it = r.query.find(key);
  if (it == r.query.end() || it->second.empty()) return fallback;
  try {
    return std::stoll(it->second);
  } catch (const std::exception&) {
    Fail(ErrorCode::kInvalidInput, "query parameter " + key + " must be an integer");
  }
}

bool QueryBool(const ApiRequest& r, const std::string& key) {
  auto it = r.query.find(key);
  return it != r.query.end() && (it->second == "true" || it->second == "1");
}

json ProposalView(const drift::RetrainProposal& p, bool with_preview) {
  json j = drift::ProposalToJson(p, with_preview);
  j.erase("candidate_artifact");
  return j;
}

json ModelView(const registry::ModelRecord& m) {
  json j = registry::ToJson(m);
  return j;
}

bool IsMutation(const std::string& method) {
  return method == "POST" || method == "PATCH" || method == "PUT" || method == "DELETE";
}

// Fields of a stored model a retrain or preview starts from; the body may
// override spec fields, params, noise and seed.
orchestrator::TrainRequest RequestFromModel(const registry::ModelRecord& m, const json& body) {
  orchestrator::TrainRequest req;
  req.model_type = m.model_type;
  req.signal_ids = m.signal_ids;
  json spec = detection::SpecToJson(m.spec);
  if (body.contains("spec")) {
    for (const auto& [k, v] : body["spec"].items()) spec[k] = v;
  }
  req.spec = detection::SpecFromJson(spec);
  req.params = m.params;
  if (body.contains("params")) {
    for (const auto& [k, v] : body["params"].items()) req.params[k] = v;
  }
  req.model_id = m.model_id;
  req.channel_ref = body.value("channel_ref", m.channel_ref);
  if (body.contains("noise_eta") && !body["noise_eta"].is_null()) req.noise_eta = body["noise_eta"].get<double>();
  req.seed = body.value("seed", std::uint64_t{1});
  return req;
}

json PreviewBody(const orchestrator::PreviewResult& p) {
  return {{"series", orchestrator::SeriesVerdictToJson(p.series)},
          {"spec", detection::SpecToJson(p.train.spec)},
          {"params", p.train.params},
          {"trained_rows", p.train.trained_rows},
          {"temporary", true}};
}

}  // namespace

int HttpStatusFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidInput:
    case ErrorCode::kInsufficientData:
    case ErrorCode::kFitFailure:
    case ErrorCode::kDegenerateDistribution:
    case ErrorCode::kInvalidQuery:
      return 400;
    case ErrorCode::kNotFound:
      return 404;
    case ErrorCode::kConflict:
    case ErrorCode::kInvalidState:
      return 409;
    case ErrorCode::kModelUnavailable:
    case ErrorCode::kSourceUnavailable:
      return 503;
    case ErrorCode::kDeliveryFailed:
      return 502;
    case ErrorCode::kInternal:
      return 500;
  }
  return 500;
}

ApiResponse ErrorResponse(int status, const std::string& code, const std::string& message,
                          json details) {
  return JsonResponse(status, {{"code", code}, {"message", message}, {"details", std::move(details)}});
}

ApiService::ApiService(registry::Registry& registry, orchestrator::MetricStore& metrics,
                       const orchestrator::Clock& clock, WebhookDispatcher* webhooks,
                       ServiceHooks hooks, ServiceOptions options)
    : registry_(registry),
      metrics_(metrics),
      clock_(clock),
      webhooks_(webhooks),
      hooks_(std::move(hooks)),
      options_(std::move(options)),
      cache_(64, [this](const std::string& model_id, int version) {
        const auto m = registry_.GetModel(model_id, version);
        return models::DeserializeArtifact(registry_.LoadArtifact(m.artifact_ref)).model;
      }) {}

ApiResponse ApiService::Handle(const ApiRequest& request) {
  const bool open_path = request.path == "/healthz" || request.path == "/metrics" ||
                         request.path.rfind("/v1/actions/", 0) == 0;
  if (!options_.bearer_token.empty() && !open_path) {
    auto it = request.headers.find("authorization");
    if (it == request.headers.end() || it->second != "Bearer " + options_.bearer_token) {
      return ErrorResponse(401, "Unauthorized", "missing or wrong bearer token");
    }
  }
  std::string idem_key;
  if (IsMutation(request.method)) {
    auto it = request.headers.find("idempotency-key");
    if (it != request.headers.end() && !it->second.empty()) {
      idem_key = request.method + " " + request.path + " " + it->second;
      if (auto stored = registry_.LookupIdempotent(idem_key)) {
        return ApiResponse{stored->status, "application/json", stored->body};
      }
    }
  }
  ApiResponse response;
  try {
    response = Route(request);
  } catch (const Error& e) {
    response = ErrorResponse(HttpStatusFor(e.code()), std::string(ErrorCodeName(e.code())), e.what());
  } catch (const json::exception& e) {
    response = ErrorResponse(400, "InvalidInput", std::string("malformed request: ") + e.what());
  } catch (const std::exception& e) {
    response = ErrorResponse(500, "Internal", e.what());
  }
  if (!idem_key.empty() && response.status < 500 && response.content_type == "application/json") {
    registry_.RememberIdempotent(idem_key, {response.status, response.body});
  }
  return response;
}

ApiResponse ApiService::Route(const ApiRequest& r) {
  const auto parts = SplitPath(r.path);
  const std::string& m = r.method;
  const std::int64_t now = clock_.NowMs();
  Params p;

  if (m == "GET" && r.path == "/healthz") return JsonResponse(200, {{"status", "ok"}, {"now", now}});
  if (m == "GET" && r.path == "/metrics") {
    return ApiResponse{200, "text/plain; version=0.0.4", metrics_.RenderExposition(now)};
  }

  // Signals and datasets.
  if (Match("/v1/signals", parts, p)) {
    if (m == "GET") {
      json out = json::array();
      for (const auto& s : registry_.ListSignals()) out.push_back(registry::ToJson(s));
      return JsonResponse(200, out);
    }
    if (m == "POST") {
      const json b = Body(r);
      const auto s = registry_.RegisterSignal(b.at("name").get<std::string>(),
                                              b.at("query").get<std::string>(), now);
      return JsonResponse(201, registry::ToJson(s));
    }
  }
  if (Match("/v1/signals/{id}", parts, p)) {
    if (m == "GET") return JsonResponse(200, registry::ToJson(registry_.GetSignal(p["id"])));
    if (m == "PATCH") {
      const json b = Body(r);
      std::optional<std::string> name, query;
      if (b.contains("name")) name = b["name"].get<std::string>();
      if (b.contains("query")) query = b["query"].get<std::string>();
      return JsonResponse(200, registry::ToJson(registry_.UpdateSignal(p["id"], name, query)));
    }
    if (m == "DELETE") {
      registry_.DeleteSignal(p["id"]);
      return JsonResponse(200, {{"signal_id", p["id"]}, {"deleted", true}});
    }
  }
  if (m == "POST" && Match("/v1/signals/{id}/snapshot", parts, p)) {
    const json b = Body(r);
    const auto snap = registry_.SnapshotSignal(p["id"], metrics_, now, b.value("force", false));
    return JsonResponse(200, {{"signal_id", snap.dataset.signal_id},
                              {"step_ms", snap.dataset.step_ms},
                              {"start_ts", snap.dataset.start_ts},
                              {"points", snap.dataset.points.size()},
                              {"span_ms", snap.dataset.span_ms()},
                              {"short", snap.dataset.is_short()},
                              {"reused", snap.reused}});
  }
  if (m == "GET" && Match("/v1/signals/{id}/dataset", parts, p)) {
    return ApiResponse{200, "text/csv", registry_.LoadDatasetBytes(p["id"])};
  }

  // Raw metrics.
  if (m == "POST" && Match("/v1/metrics/samples", parts, p)) {
    const json b = Body(r);
    std::size_t accepted = 0;
    for (const auto& s : b.at("samples")) {
      metrics_.Append({s.at("metric").get<std::string>(),
                       s.value("labels", std::map<std::string, std::string>{}),
                       s.at("ts").get<std::int64_t>(), s.at("value").get<double>()});
      ++accepted;
    }
    return JsonResponse(200, {{"accepted", accepted}});
  }
  if (m == "GET" && Match("/v1/metrics/query", parts, p)) {
    auto sel = r.query.find("selector");
    if (sel == r.query.end()) Fail(ErrorCode::kInvalidQuery, "selector is required");
    const auto series = metrics_.QueryRange(sel->second, QueryInt(r, "start", 0), QueryInt(r, "end", now),
                                            QueryInt(r, "step", 0));
    json out = json::array();
    for (const auto& s : series) {
      json points = json::array();
      for (const auto& pt : s.points) points.push_back({pt.ts, pt.value});
      out.push_back({{"metric", s.metric_name}, {"labels", s.labels}, {"points", points}});
    }
    return JsonResponse(200, out);
  }

  // Models.
  if (Match("/v1/models", parts, p) || Match("/v1/models/train", parts, p)) {
    if (m == "GET" && parts.size() == 2) {
      json out = json::array();
      for (const auto& model : registry_.ListModels(QueryBool(r, "include_deleted"))) {
        out.push_back(ModelView(model));
      }
      return JsonResponse(200, out);
    }
    if (m == "POST") {
      auto req = orchestrator::TrainRequestFromJson(Body(r));
      req.mode = orchestrator::TrainMode::kFull;
      const bool do_register = !Body(r).contains("register") || req.register_model;
      req.register_model = do_register;
      const auto result = orchestrator::RunTrainJob(registry_, req, now);
      if (!result.record) {
        return JsonResponse(200, {{"registered", false},
                                  {"trained_rows", result.trained_rows},
                                  {"spec", detection::SpecToJson(result.spec)},
                                  {"params", result.params}});
      }
      return JsonResponse(201, ModelView(*result.record));
    }
  }
  if (m == "POST" && Match("/v1/models/preview", parts, p)) {
    const auto req = orchestrator::TrainRequestFromJson(Body(r));
    return JsonResponse(200, PreviewBody(orchestrator::RunPreview(registry_, req, now)));
  }
  if (Match("/v1/models/{id}", parts, p)) {
    if (m == "GET") {
      std::optional<int> version;
      if (r.query.count("version")) version = static_cast<int>(QueryInt(r, "version", 0));
      return JsonResponse(200, ModelView(registry_.GetModel(p["id"], version)));
    }
    if (m == "PATCH") {
      const json b = Body(r);
      const auto status = registry::ModelStatusFromName(b.at("status").get<std::string>());
      if (status == registry::ModelStatus::kDeleted) {
        Fail(ErrorCode::kInvalidInput, "use DELETE to delete a model");
      }
      return JsonResponse(200, ModelView(registry_.SetModelStatus(p["id"], status)));
    }
    if (m == "DELETE") {
      return JsonResponse(200, ModelView(registry_.SetModelStatus(p["id"], registry::ModelStatus::kDeleted)));
    }
  }
  if (m == "GET" && Match("/v1/models/{id}/versions", parts, p)) {
    json out = json::array();
    for (const auto& v : registry_.ListVersions(p["id"])) out.push_back(ModelView(v));
    return JsonResponse(200, out);
  }
  if (m == "POST" && Match("/v1/models/{id}/activate", parts, p)) {
    return JsonResponse(200, ModelView(registry_.ActivateVersion(p["id"], Body(r).at("version").get<int>())));
  }
  if (m == "POST" && Match("/v1/models/{id}/train", parts, p)) {
    const json b = Body(r);
    auto req = RequestFromModel(registry_.GetModel(p["id"]), b);
    req.mode = orchestrator::TrainMode::kFull;
    req.register_model = true;
    return JsonResponse(201, ModelView(*orchestrator::RunTrainJob(registry_, req, now).record));
  }
  if (m == "POST" && Match("/v1/models/{id}/preview", parts, p)) {
    const auto req = RequestFromModel(registry_.GetModel(p["id"]), Body(r));
    return JsonResponse(200, PreviewBody(orchestrator::RunPreview(registry_, req, now)));
  }
  if (m == "POST" && Match("/v1/detect", parts, p)) {
    const json b = Body(r);
    std::optional<int> version;
    if (b.contains("version")) version = b["version"].get<int>();
    const auto model = registry_.GetModel(b.at("model_id").get<std::string>(), version);
    auto spec = model.spec;
    if (b.contains("spec")) {
      json merged = detection::SpecToJson(spec);
      for (const auto& [k, v] : b["spec"].items()) merged[k] = v;
      spec = detection::SpecFromJson(merged);
    }
    const auto rows = b.at("rows").get<std::vector<std::vector<double>>>();
    if (rows.empty()) Fail(ErrorCode::kInvalidInput, "rows is empty");
    const std::int64_t step = b.value("step_ms", std::int64_t{60'000});
    std::vector<std::int64_t> ts = b.value("ts", std::vector<std::int64_t>{});
    if (ts.empty()) {
      for (std::size_t i = 0; i < rows.size(); ++i) ts.push_back(now - static_cast<std::int64_t>(rows.size() - 1 - i) * step);
    }
    if (ts.size() != rows.size()) Fail(ErrorCode::kInvalidInput, "ts and rows differ in length");
    Matrix values(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != values.cols()) Fail(ErrorCode::kInvalidInput, "ragged rows");
      std::copy(rows[i].begin(), rows[i].end(), values.row(i).begin());
    }
    const FeatureWindow window(model.signal_ids, ts, std::move(values), step);
    const auto fitted = cache_.Get(model.model_id, model.version);
    return JsonResponse(200, detection::VerdictToJson(detection::Detect(spec, fitted.get(), window)));
  }

  // Alerts and actions.
  if (m == "GET" && Match("/v1/alerts", parts, p)) {
    std::optional<std::string> model_id;
    if (r.query.count("model_id")) model_id = r.query.at("model_id");
    json out = json::array();
    for (const auto& a : registry_.ListAlerts(model_id, QueryBool(r, "include_deleted"))) {
      json view = registry::ToJson(a);
      view["effective_state"] = registry::AlertStateName(a.EffectiveState(now));
      out.push_back(std::move(view));
    }
    return JsonResponse(200, out);
  }
  if (Match("/v1/alerts/{id}", parts, p)) {
    if (m == "GET") {
      const auto a = registry_.GetAlert(p["id"]);
      json view = registry::ToJson(a);
      view["effective_state"] = registry::AlertStateName(a.EffectiveState(now));
      return JsonResponse(200, view);
    }
    if (m == "DELETE") return JsonResponse(200, registry::ToJson(registry_.DeleteAlert(p["id"])));
  }
  if (m == "POST" && Match("/v1/alerts/{id}/feedback", parts, p)) {
    const json b = Body(r);
    const auto label = registry::FeedbackLabelFromName(b.at("label").get<std::string>());
    return JsonResponse(200, registry::ToJson(registry_.RecordFeedback(p["id"], label,
                                                                       b.value("by", std::string("api")), now)));
  }
  if (m == "POST" && Match("/v1/alerts/{id}/snooze", parts, p)) {
    const json b = Body(r);
    const std::int64_t until = b.contains("until") ? b["until"].get<std::int64_t>()
                                                   : now + b.value("minutes", 60) * 60'000LL;
    return JsonResponse(200, registry::ToJson(registry_.SnoozeAlert(p["id"], until, now)));
  }
  if ((m == "GET" || m == "POST") && Match("/v1/actions/{token}", parts, p)) {
    const auto token = registry_.ConsumeActionToken(p["token"]);
    registry::AlertRecord a;
    switch (token.action) {
      case registry::AlertAction::kTruePositive:
        a = registry_.RecordFeedback(token.alert_id, registry::FeedbackLabel::kTruePositive, "webhook", now);
        break;
      case registry::AlertAction::kFalsePositive:
        a = registry_.RecordFeedback(token.alert_id, registry::FeedbackLabel::kFalsePositive, "webhook", now);
        break;
      case registry::AlertAction::kSnooze:
        a = registry_.SnoozeAlert(token.alert_id, now + 60 * 60'000LL, now);
        break;
      case registry::AlertAction::kDelete:
        a = registry_.DeleteAlert(token.alert_id);
        break;
    }
    return JsonResponse(200, {{"action", registry::AlertActionName(token.action)}, {"alert", registry::ToJson(a)}});
  }

  // Drift and proposals.
  if (m == "GET" && Match("/v1/drift/reports", parts, p)) {
    std::optional<std::string> model_id;
    if (r.query.count("model_id")) model_id = r.query.at("model_id");
    json out = json::array();
    for (const auto& rep : registry_.ListDriftReports(model_id)) out.push_back(drift::ReportToJson(rep));
    return JsonResponse(200, out);
  }
  if (m == "POST" && Match("/v1/drift/run", parts, p)) {
    const auto job = orchestrator::RunDriftJob(registry_, metrics_, now, options_.drift);
    json out = orchestrator::DriftJobReportToJson(job);
    out["auto_applied"] = orchestrator::SweepExpiredProposals(registry_, now);
    return JsonResponse(200, out);
  }
  if (m == "GET" && Match("/v1/proposals", parts, p)) {
    std::optional<drift::ProposalStatus> status;
    if (r.query.count("status")) {
      for (auto s : {drift::ProposalStatus::kPending, drift::ProposalStatus::kApproved,
                     drift::ProposalStatus::kRejected, drift::ProposalStatus::kAutoApplied}) {
        if (r.query.at("status") == drift::ProposalStatusName(s)) status = s;
      }
      if (!status) Fail(ErrorCode::kInvalidInput, "unknown proposal status");
    }
    orchestrator::SweepExpiredProposals(registry_, now);
    json out = json::array();
    for (const auto& prop : registry_.ListProposals(status)) out.push_back(ProposalView(prop, false));
    return JsonResponse(200, out);
  }
  if (m == "GET" && Match("/v1/proposals/{id}", parts, p)) {
    orchestrator::SweepExpiredProposals(registry_, now);
    return JsonResponse(200, ProposalView(registry_.GetProposal(p["id"]), true));
  }
  if (m == "POST" && (Match("/v1/proposals/{id}/approve", parts, p) ||
                      Match("/v1/proposals/{id}/reject", parts, p))) {
    const bool approve = parts.back() == "approve";
    const auto outcome = orchestrator::ApplyProposal(
        registry_, p["id"], approve ? drift::Decision::kApprove : drift::Decision::kReject, now);
    const auto prop = registry_.GetProposal(p["id"]);
    return JsonResponse(200, {{"outcome", outcome == drift::ApplyOutcome::kApplied ? "applied" : "discarded"},
                              {"proposal", ProposalView(prop, false)}});
  }

  // Runtime.
  if (m == "POST" && Match("/v1/ticks", parts, p)) {
    if (!hooks_.run_tick) Fail(ErrorCode::kInvalidState, "this node does not run ticks");
    json report = hooks_.run_tick();
    if (webhooks_) webhooks_->Drain();
    return JsonResponse(200, report);
  }
  if (m == "GET" && Match("/v1/cluster", parts, p)) {
    return JsonResponse(200, hooks_.cluster_status ? hooks_.cluster_status() : json{{"mode", "standalone"}});
  }

  return ErrorResponse(404, "NotFound", "no route for " + m + " " + r.path);
}

}  // namespace tickwatch::api
