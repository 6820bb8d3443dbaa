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

#include "tickwatch/api/webhook.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "httplib.h"
#include "tickwatch/core/error.hpp"

namespace tickwatch::api {
namespace {

constexpr std::size_t kTopFeatures = 3;

nlohmann::json TopFeatures(const nlohmann::json& verdict, const std::vector<std::string>& names) {
  nlohmann::json out = nlohmann::json::array();
  if (!verdict.is_object() || !verdict.contains("attribution") || verdict["attribution"].is_null()) {
    return out;
  }
  const auto contributions =
      verdict["attribution"].at("feature_contributions").get<std::vector<double>>();
  std::vector<std::size_t> order(contributions.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(contributions[a]) > std::abs(contributions[b]);
  });
  for (std::size_t i = 0; i < std::min(kTopFeatures, order.size()); ++i) {
    const std::size_t f = order[i];
    out.push_back({{"feature", f < names.size() ? names[f] : "f" + std::to_string(f + 1)},
                   {"contribution", contributions[f]}});
  }
  return out;
}

}  // namespace

int HttpPoster::Post(const std::string& url, const std::string& json_body) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) return 0;
  const auto path_start = url.find('/', scheme_end + 3);
  const std::string base = url.substr(0, path_start);
  const std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);
  httplib::Client client(base);
  client.set_connection_timeout(std::chrono::milliseconds(timeout_ms_));
  client.set_read_timeout(std::chrono::milliseconds(timeout_ms_));
  const auto res = client.Post(path, json_body, "application/json");
  return res ? res->status : 0;
}

nlohmann::json BuildAlertEvent(const registry::AlertRecord& alert, const std::string& model_name,
                               const std::vector<std::string>& feature_names,
                               const std::map<registry::AlertAction, std::string>& tokens,
                               const std::string& base_url) {
  nlohmann::json actions = nlohmann::json::object();
  for (const auto& [action, token] : tokens) {
    actions[registry::AlertActionName(action)] = base_url + "/v1/actions/" + token;
  }
  const auto& v = alert.verdict;
  return {{"alert_id", alert.alert_id},
          {"model_id", alert.model_id},
          {"model_name", model_name},
          {"version", alert.version},
          {"fired_at", alert.fired_at},
          {"severity", alert.severity},
          {"summary",
           {{"triggered_by", v.is_object() ? v.value("triggered_by", std::string("model")) : "model"},
            {"breach_count", v.is_object() ? v.value("breach_count", 0) : 0},
            {"anomaly_count", v.is_object() ? v.value("anomaly_count", 0) : 0},
            {"top_features", TopFeatures(v, feature_names)}}},
          {"actions", actions}};
}

WebhookDispatcher::WebhookDispatcher(registry::Registry& registry, WebhookPoster& poster,
                                     WebhookConfig config, NowFn now, SleepFn sleep)
    : registry_(registry),
      poster_(poster),
      config_(std::move(config)),
      now_(std::move(now)),
      sleep_(sleep ? std::move(sleep) : SleepFn([](std::int64_t ms) {
        std::this_thread::sleep_for(std::chrono::milliseconds(ms));
      })) {}

WebhookDispatcher::~WebhookDispatcher() { Stop(); }

void WebhookDispatcher::Enqueue(const std::string& alert_id) {
  {
    std::lock_guard lock(mu_);
    if (queue_.size() >= config_.queue_capacity) {
      queue_.pop_front();
      ++dropped_;
    }
    queue_.push_back(alert_id);
  }
  cv_.notify_one();
}

DeliveryResult WebhookDispatcher::Deliver(const std::string& alert_id) {
  DeliveryResult result;
  const auto alert = registry_.GetAlert(alert_id);
  const auto model = registry_.GetModel(alert.model_id, alert.version);
  if (model.channel_ref.empty()) {
    result.error = "model has no channel";
    return result;
  }
  std::vector<std::string> names;
  for (const auto& sid : model.signal_ids) {
    try {
      names.push_back(registry_.GetSignal(sid).name);
    } catch (const Error&) {
      names.push_back(sid);
    }
  }
  std::map<registry::AlertAction, std::string> tokens;
  for (auto action : {registry::AlertAction::kTruePositive, registry::AlertAction::kFalsePositive,
                      registry::AlertAction::kSnooze, registry::AlertAction::kDelete}) {
    tokens[action] = registry_.IssueActionToken(alert_id, action, now_()).token;
  }
  std::string base_url;
  {
    std::lock_guard lock(mu_);
    base_url = config_.public_base_url;
  }
  const std::string body =
      BuildAlertEvent(alert, names.empty() ? model.model_id : names.front(), names, tokens, base_url).dump();
  std::int64_t backoff = config_.base_backoff_ms;
  for (int attempt = 1; attempt <= config_.max_attempts; ++attempt) {
    result.attempts = attempt;
    int status = 0;
    try {
      status = poster_.Post(model.channel_ref, body);
    } catch (const std::exception& e) {
      result.error = e.what();
    }
    if (status >= 200 && status < 300) {
      result.delivered = true;
      result.error.clear();
      break;
    }
    result.error = status == 0 ? (result.error.empty() ? "no response" : result.error)
                               : "HTTP " + std::to_string(status);
    if (attempt < config_.max_attempts) {
      sleep_(backoff);
      backoff *= 2;
    }
  }
  if (!result.delivered) {
    result.error = std::string(ErrorCodeName(ErrorCode::kDeliveryFailed)) + ": " + result.error;
  }
  registry_.RecordDelivery(alert_id,
                           result.delivered ? registry::DeliveryStatus::kDelivered
                                            : registry::DeliveryStatus::kFailed,
                           result.attempts, result.error);
  return result;
}

std::size_t WebhookDispatcher::Drain() {
  std::size_t n = 0;
  for (;;) {
    std::string id;
    {
      std::lock_guard lock(mu_);
      if (queue_.empty()) return n;
      id = std::move(queue_.front());
      queue_.pop_front();
    }
    try {
      Deliver(id);
    } catch (const Error&) {
      // alert or model deleted since enqueue
    }
    ++n;
  }
}

void WebhookDispatcher::Start() {
  std::lock_guard lock(mu_);
  if (running_) return;
  running_ = true;
  worker_ = std::thread([this] {
    for (;;) {
      {
        std::unique_lock lock(mu_);
        cv_.wait(lock, [this] { return !running_ || !queue_.empty(); });
        if (!running_) return;
      }
      Drain();
    }
  });
}

void WebhookDispatcher::Stop() {
  {
    std::lock_guard lock(mu_);
    if (!running_) return;
    running_ = false;
  }
  cv_.notify_all();
  if (worker_.joinable()) worker_.join();
}

std::uint64_t WebhookDispatcher::dropped() const {
  std::lock_guard lock(mu_);
  return dropped_;
}

std::size_t WebhookDispatcher::queued() const {
  std::lock_guard lock(mu_);
  return queue_.size();
}

void WebhookDispatcher::set_public_base_url(std::string url) {
  std::lock_guard lock(mu_);
  config_.public_base_url = std::move(url);
}

}  // namespace tickwatch::api
