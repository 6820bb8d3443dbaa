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

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <thread>

#include "json.hpp"
#include "tickwatch/registry/registry.hpp"

namespace tickwatch::api {

struct WebhookConfig {
  int max_attempts = 3;
  std::int64_t base_backoff_ms = 200;  // doubles after each failed attempt
  std::size_t queue_capacity = 1024;
  std::string public_base_url = "http://127.0.0.1:8080";  // prefix of action links
  std::int64_t timeout_ms = 5000;
};

// Sends one POST; returns the HTTP status, or 0 when no response arrived.
class WebhookPoster {
 public:
  virtual ~WebhookPoster() = default;
  virtual int Post(const std::string& url, const std::string& json_body) = 0;
};

class HttpPoster final : public WebhookPoster {
 public:
  explicit HttpPoster(std::int64_t timeout_ms = 5000) : timeout_ms_(timeout_ms) {}
  int Post(const std::string& url, const std::string& json_body) override;

 private:
  std::int64_t timeout_ms_;
};

// Wire form of an alert (sorted keys, compact):
//   {"actions":{"delete":url,"false_positive":url,"snooze":url,"true_positive":url},
//    "alert_id":..., "fired_at":ms, "model_id":..., "model_name":..., "severity":...,
//    "summary":{"anomaly_count":n,"breach_count":n,"top_features":[{"feature":..,"contribution":x}],
//               "triggered_by":"rule"|"model"},
//    "version":n}
nlohmann::json BuildAlertEvent(const registry::AlertRecord& alert, const std::string& model_name,
                               const std::vector<std::string>& feature_names,
                               const std::map<registry::AlertAction, std::string>& tokens,
                               const std::string& base_url);

struct DeliveryResult {
  bool delivered = false;
  int attempts = 0;
  std::string error;
};

// Delivers alert events to each model's channel_ref. Enqueue never blocks:
// past capacity the oldest queued alert is dropped and counted. Every
// attempted delivery is recorded on the alert, delivered or failed; a failed
// delivery leaves the alert open.
class WebhookDispatcher {
 public:
  using NowFn = std::function<std::int64_t()>;
  using SleepFn = std::function<void(std::int64_t ms)>;

  WebhookDispatcher(registry::Registry& registry, WebhookPoster& poster, WebhookConfig config,
                    NowFn now, SleepFn sleep = nullptr);
  ~WebhookDispatcher();

  void Enqueue(const std::string& alert_id);
  DeliveryResult Deliver(const std::string& alert_id);
  // Delivers everything queued on the calling thread; returns the count.
  std::size_t Drain();

  void Start();
  void Stop();

  // Prefix of action links in events built from now on.
  void set_public_base_url(std::string url);
  std::uint64_t dropped() const;
  std::size_t queued() const;

 private:
  registry::Registry& registry_;
  WebhookPoster& poster_;
  WebhookConfig config_;
  NowFn now_;
  SleepFn sleep_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::deque<std::string> queue_;
  std::uint64_t dropped_ = 0;
  bool running_ = false;
  std::thread worker_;
};

}  // namespace tickwatch::api
