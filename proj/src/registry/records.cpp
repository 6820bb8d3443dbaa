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

#include "tickwatch/registry/records.hpp"

#include "tickwatch/core/error.hpp"

namespace tickwatch::registry {
namespace {

template <typename E, std::size_t N>
E FromName(const std::string& s, const E (&values)[N], const char* (*name)(E), const char* what) {
  for (E v : values) {
    if (s == name(v)) return v;
  }
  Fail(ErrorCode::kInvalidInput, std::string("unknown ") + what + " '" + s + "'");
}

constexpr ModelStatus kModelStatuses[] = {ModelStatus::kActive, ModelStatus::kPaused,
                                          ModelStatus::kDeleted};
constexpr AlertState kAlertStates[] = {AlertState::kOpen, AlertState::kSnoozed, AlertState::kDeleted};
constexpr FeedbackLabel kLabels[] = {FeedbackLabel::kTruePositive, FeedbackLabel::kFalsePositive};
constexpr DeliveryStatus kDeliveries[] = {DeliveryStatus::kPending, DeliveryStatus::kDelivered,
                                          DeliveryStatus::kFailed};
constexpr AlertAction kActions[] = {AlertAction::kTruePositive, AlertAction::kFalsePositive,
                                    AlertAction::kSnooze, AlertAction::kDelete};

template <typename F>
auto Guard(const char* what, F&& f) {
  try {
    return f();
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kInvalidInput, std::string("malformed ") + what + ": " + e.what());
  }
}

}  // namespace

const char* ModelStatusName(ModelStatus s) {
  switch (s) {
    case ModelStatus::kActive: return "active";
    case ModelStatus::kPaused: return "paused";
    case ModelStatus::kDeleted: return "deleted";
  }
  return "active";
}

ModelStatus ModelStatusFromName(const std::string& s) {
  return FromName(s, kModelStatuses, ModelStatusName, "model status");
}

const char* AlertStateName(AlertState s) {
  switch (s) {
    case AlertState::kOpen: return "open";
    case AlertState::kSnoozed: return "snoozed";
    case AlertState::kDeleted: return "deleted";
  }
  return "open";
}

const char* FeedbackLabelName(FeedbackLabel l) {
  return l == FeedbackLabel::kTruePositive ? "true_positive" : "false_positive";
}

FeedbackLabel FeedbackLabelFromName(const std::string& s) {
  return FromName(s, kLabels, FeedbackLabelName, "feedback label");
}

const char* DeliveryStatusName(DeliveryStatus s) {
  switch (s) {
    case DeliveryStatus::kPending: return "pending";
    case DeliveryStatus::kDelivered: return "delivered";
    case DeliveryStatus::kFailed: return "failed";
  }
  return "pending";
}

const char* AlertActionName(AlertAction a) {
  switch (a) {
    case AlertAction::kTruePositive: return "true_positive";
    case AlertAction::kFalsePositive: return "false_positive";
    case AlertAction::kSnooze: return "snooze";
    case AlertAction::kDelete: return "delete";
  }
  return "true_positive";
}

AlertAction AlertActionFromName(const std::string& s) {
  return FromName(s, kActions, AlertActionName, "alert action");
}

nlohmann::json ToJson(const SignalRecord& r) {
  return {{"signal_id", r.signal_id},   {"name", r.name},
          {"query_expr", r.query_expr}, {"created_at", r.created_at},
          {"last_snapshot_at", r.last_snapshot_at}, {"deleted", r.deleted}};
}

SignalRecord SignalFromJson(const nlohmann::json& j) {
  return Guard("signal", [&] {
    SignalRecord r;
    r.signal_id = j.at("signal_id").get<std::string>();
    r.name = j.at("name").get<std::string>();
    r.query_expr = j.at("query_expr").get<std::string>();
    r.created_at = j.at("created_at").get<std::int64_t>();
    r.last_snapshot_at = j.value("last_snapshot_at", std::int64_t{0});
    r.deleted = j.value("deleted", false);
    return r;
  });
}

nlohmann::json ToJson(const ModelRecord& r) {
  return {{"model_id", r.model_id},
          {"version", r.version},
          {"active_version", r.active_version},
          {"model_type", r.model_type},
          {"signal_ids", r.signal_ids},
          {"detector_spec", detection::SpecToJson(r.spec)},
          {"params", r.params},
          {"artifact_ref", r.artifact_ref},
          {"channel_ref", r.channel_ref},
          {"status", ModelStatusName(r.status)},
          {"created_at", r.created_at},
          {"train_summary", r.train_summary}};
}

ModelRecord ModelFromJson(const nlohmann::json& j) {
  return Guard("model", [&] {
    ModelRecord r;
    r.model_id = j.at("model_id").get<std::string>();
    r.version = j.value("version", 0);
    r.active_version = j.value("active_version", 0);
    r.model_type = j.at("model_type").get<std::string>();
    r.signal_ids = j.at("signal_ids").get<std::vector<std::string>>();
    r.spec = detection::SpecFromJson(j.value("detector_spec", nlohmann::json::object()));
    r.params = j.value("params", nlohmann::json::object());
    r.artifact_ref = j.value("artifact_ref", std::string());
    r.channel_ref = j.value("channel_ref", std::string());
    r.status = ModelStatusFromName(j.value("status", std::string("active")));
    r.created_at = j.value("created_at", std::int64_t{0});
    r.train_summary = j.value("train_summary", nlohmann::json());
    return r;
  });
}

nlohmann::json ToJson(const AlertRecord& r) {
  nlohmann::json feedback = nullptr;
  if (r.feedback) {
    feedback = {{"label", FeedbackLabelName(r.feedback->label)},
                {"by", r.feedback->by},
                {"at", r.feedback->at}};
  }
  return {{"alert_id", r.alert_id},
          {"model_id", r.model_id},
          {"version", r.version},
          {"fired_at", r.fired_at},
          {"severity", r.severity},
          {"verdict", r.verdict},
          {"state", AlertStateName(r.state)},
          {"snoozed_until", r.snoozed_until},
          {"feedback", feedback},
          {"delivery", DeliveryStatusName(r.delivery)},
          {"delivery_attempts", r.delivery_attempts},
          {"delivery_error", r.delivery_error}};
}

AlertRecord AlertFromJson(const nlohmann::json& j) {
  return Guard("alert", [&] {
    AlertRecord r;
    r.alert_id = j.at("alert_id").get<std::string>();
    r.model_id = j.at("model_id").get<std::string>();
    r.version = j.at("version").get<int>();
    r.fired_at = j.at("fired_at").get<std::int64_t>();
    r.severity = j.value("severity", std::string());
    r.verdict = j.value("verdict", nlohmann::json());
    r.state = FromName(j.at("state").get<std::string>(), kAlertStates, AlertStateName, "alert state");
    r.snoozed_until = j.value("snoozed_until", std::int64_t{0});
    if (j.contains("feedback") && !j["feedback"].is_null()) {
      const auto& f = j["feedback"];
      r.feedback = Feedback{FeedbackLabelFromName(f.at("label").get<std::string>()),
                            f.value("by", std::string()), f.value("at", std::int64_t{0})};
    }
    r.delivery = FromName(j.value("delivery", std::string("pending")), kDeliveries,
                          DeliveryStatusName, "delivery status");
    r.delivery_attempts = j.value("delivery_attempts", 0);
    r.delivery_error = j.value("delivery_error", std::string());
    return r;
  });
}

nlohmann::json ToJson(const ActionToken& t) {
  return {{"token", t.token},
          {"alert_id", t.alert_id},
          {"action", AlertActionName(t.action)},
          {"issued_at", t.issued_at},
          {"used", t.used}};
}

ActionToken TokenFromJson(const nlohmann::json& j) {
  return Guard("action token", [&] {
    ActionToken t;
    t.token = j.at("token").get<std::string>();
    t.alert_id = j.at("alert_id").get<std::string>();
    t.action = AlertActionFromName(j.at("action").get<std::string>());
    t.issued_at = j.value("issued_at", std::int64_t{0});
    t.used = j.value("used", false);
    return t;
  });
}

}  // namespace tickwatch::registry
