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
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "tickwatch/detection/detector.hpp"

namespace tickwatch::registry {

struct SignalRecord {
  std::string signal_id;
  std::string name;
  std::string query_expr;
  std::int64_t created_at = 0;
  std::int64_t last_snapshot_at = 0;  // 0 until the first snapshot
  bool deleted = false;
};

enum class ModelStatus { kActive, kPaused, kDeleted };

// One version of a model. Versions are immutable once registered; status
// and the active version are per model.
struct ModelRecord {
  std::string model_id;
  int version = 0;
  int active_version = 0;
  std::string model_type;
  std::vector<std::string> signal_ids;
  detection::DetectorSpec spec;
  nlohmann::json params = nlohmann::json::object();
  std::string artifact_ref;
  std::string channel_ref;  // webhook URL, may be empty
  ModelStatus status = ModelStatus::kActive;
  std::int64_t created_at = 0;
  // Training-time distribution summary for drift checks (null when absent).
  nlohmann::json train_summary;
};

enum class AlertState { kOpen, kSnoozed, kDeleted };
enum class FeedbackLabel { kTruePositive, kFalsePositive };
enum class DeliveryStatus { kPending, kDelivered, kFailed };

struct Feedback {
  FeedbackLabel label = FeedbackLabel::kTruePositive;
  std::string by;
  std::int64_t at = 0;
};

struct AlertRecord {
  std::string alert_id;
  std::string model_id;
  int version = 0;
  std::int64_t fired_at = 0;
  std::string severity;
  nlohmann::json verdict;
  AlertState state = AlertState::kOpen;
  std::int64_t snoozed_until = 0;
  std::optional<Feedback> feedback;
  DeliveryStatus delivery = DeliveryStatus::kPending;
  int delivery_attempts = 0;
  std::string delivery_error;

  // Snoozes lapse on their own; an expired snooze reads as open.
  AlertState EffectiveState(std::int64_t now) const {
    return state == AlertState::kSnoozed && now >= snoozed_until ? AlertState::kOpen : state;
  }
};

enum class AlertAction { kTruePositive, kFalsePositive, kSnooze, kDelete };

struct ActionToken {
  std::string token;
  std::string alert_id;
  AlertAction action = AlertAction::kTruePositive;
  std::int64_t issued_at = 0;
  bool used = false;
};

struct StoredResponse {
  int status = 200;
  std::string body;
};

const char* ModelStatusName(ModelStatus s);
ModelStatus ModelStatusFromName(const std::string& s);
const char* AlertStateName(AlertState s);
const char* FeedbackLabelName(FeedbackLabel l);
FeedbackLabel FeedbackLabelFromName(const std::string& s);
const char* DeliveryStatusName(DeliveryStatus s);
const char* AlertActionName(AlertAction a);
AlertAction AlertActionFromName(const std::string& s);

nlohmann::json ToJson(const SignalRecord& r);
nlohmann::json ToJson(const ModelRecord& r);
nlohmann::json ToJson(const AlertRecord& r);
nlohmann::json ToJson(const ActionToken& t);
SignalRecord SignalFromJson(const nlohmann::json& j);
ModelRecord ModelFromJson(const nlohmann::json& j);
AlertRecord AlertFromJson(const nlohmann::json& j);
ActionToken TokenFromJson(const nlohmann::json& j);

}  // namespace tickwatch::registry
