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

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include "json.hpp"
#include "tickwatch/api/http_server.hpp"
#include "tickwatch/api/service.hpp"
#include "tickwatch/api/webhook.hpp"
#include "tickwatch/orchestrator/clock.hpp"
#include "tickwatch/orchestrator/election_driver.hpp"
#include "tickwatch/orchestrator/metric_store.hpp"
#include "tickwatch/orchestrator/tick.hpp"
#include "tickwatch/orchestrator/transport.hpp"
#include "tickwatch/registry/registry.hpp"

namespace tickwatch::api {

struct NodeConfig {
  std::string node_id = "node-0";
  std::filesystem::path data_dir;  // empty keeps the registry in memory
  std::string http_host = "127.0.0.1";
  int http_port = 8080;  // 0 picks a free port
  // Inter-node transport addresses, id -> host:port. Must list this node
  // when non-empty; coordinators in it take part in the election.
  std::map<std::string, std::string> peers;
  // Worker-only nodes the leader also dispatches to, id -> host:port.
  std::map<std::string, std::string> workers;
  bool coordinator = true;
  bool worker = true;
  std::int64_t tick_period_ms = 60'000;
  std::int64_t election_timeout_ms = 10'000;
  std::string bearer_token;
  std::string public_base_url;  // action link prefix; default http://host:port
  std::uint64_t seed = 1;
};

// Overrides `config` from TICKWATCH_* environment variables: NODE_ID,
// DATA_DIR, HTTP_HOST, HTTP_PORT, PEERS (id=host:port,...), WORKERS,
// TICK_PERIOD_MS, ELECTION_TIMEOUT_MS, TOKEN, PUBLIC_URL.
void ApplyEnvironment(NodeConfig& config);
// "a=h:p,b=h:p" -> map. Throws InvalidInput on malformed entries.
std::map<std::string, std::string> ParsePeerList(const std::string& text);

// One serving process: HTTP API, election over TCP (when peers are given),
// the tick loop while leader, snapshot tasks, proposal sweeps, the daily
// drift job and webhook delivery.
class Node {
 public:
  explicit Node(NodeConfig config);
  ~Node();
  Node(const Node&) = delete;
  Node& operator=(const Node&) = delete;

  void Start();
  void Stop();

  int http_port() const { return http_port_; }
  bool is_leader() const;
  nlohmann::json Status() const;
  // One maintenance pass plus inference tick, if this node leads.
  nlohmann::json TickNow();

  registry::Registry& registry() { return registry_; }
  orchestrator::MetricStore& metrics() { return metrics_; }

 private:
  void TickerLoop();
  void Maintenance(std::int64_t now);

  NodeConfig config_;
  orchestrator::SystemClock clock_;
  registry::Registry registry_;
  orchestrator::MetricStore metrics_;
  HttpPoster poster_;
  std::unique_ptr<WebhookDispatcher> webhooks_;
  std::unique_ptr<orchestrator::LocalWorker> local_worker_;
  std::unique_ptr<orchestrator::TcpTransport> transport_;
  std::unique_ptr<orchestrator::ElectionDriver> election_;
  std::map<std::string, std::unique_ptr<orchestrator::RemoteWorker>> remote_workers_;
  std::unique_ptr<ApiService> service_;
  std::unique_ptr<HttpServer> http_;
  int http_port_ = 0;

  std::mutex tick_mu_;
  std::uint64_t tick_id_ = 0;
  std::int64_t last_drift_day_ = -1;
  nlohmann::json last_tick_;

  std::mutex run_mu_;
  std::condition_variable run_cv_;
  bool running_ = false;
  std::thread ticker_;
};

}  // namespace tickwatch::api
