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

#include "tickwatch/api/node.hpp"

#include <chrono>
#include <cstdlib>
#include <iostream>

#include "tickwatch/core/error.hpp"
#include "tickwatch/orchestrator/lifecycle.hpp"

namespace tickwatch::api {
namespace {

using nlohmann::json;
using orchestrator::Envelope;
using orchestrator::EnvelopeType;

constexpr std::int64_t kDayMs = 86'400'000;

const char* Env(const char* name) {
  const char* v = std::getenv(name);
  return v && *v ? v : nullptr;
}

std::int64_t ParsePositive(const char* name, const std::string& text) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(text, &used);
    if (used == text.size() && v > 0) return v;
  } catch (const std::exception&) {
  }
  Fail(ErrorCode::kInvalidInput, std::string(name) + " must be a positive integer, got '" + text + "'");
}

bool IsElection(EnvelopeType t) {
  return t == EnvelopeType::kVoteRequest || t == EnvelopeType::kVoteResponse || t == EnvelopeType::kHeartbeat ||
         t == EnvelopeType::kHeartbeatReply;
}

Envelope ErrorEnvelope(const std::string& sender, const std::string& message) {
  Envelope e;
  e.type = EnvelopeType::kError;
  e.sender = sender;
  e.payload = message;
  return e;
}

}  // namespace

std::map<std::string, std::string> ParsePeerList(const std::string& text) {
  std::map<std::string, std::string> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find(',', pos), text.size());
    const std::string entry = text.substr(pos, end - pos);
    pos = end + 1;
    if (entry.empty()) continue;
    const auto eq = entry.find('=');
    const auto colon = entry.rfind(':');
    if (eq == std::string::npos || eq == 0 || colon == std::string::npos || colon < eq) {
      Fail(ErrorCode::kInvalidInput, "peer entry '" + entry + "' is not id=host:port");
    }
    out[entry.substr(0, eq)] = entry.substr(eq + 1);
  }
  return out;
}

void ApplyEnvironment(NodeConfig& config) {
  if (const char* v = Env("TICKWATCH_NODE_ID")) config.node_id = v;
  if (const char* v = Env("TICKWATCH_DATA_DIR")) config.data_dir = v;
  if (const char* v = Env("TICKWATCH_HTTP_HOST")) config.http_host = v;
  if (const char* v = Env("TICKWATCH_HTTP_PORT")) {
    config.http_port = static_cast<int>(ParsePositive("TICKWATCH_HTTP_PORT", v));
  }
  if (const char* v = Env("TICKWATCH_PEERS")) config.peers = ParsePeerList(v);
  if (const char* v = Env("TICKWATCH_WORKERS")) config.workers = ParsePeerList(v);
  if (const char* v = Env("TICKWATCH_TICK_PERIOD_MS")) {
    config.tick_period_ms = ParsePositive("TICKWATCH_TICK_PERIOD_MS", v);
  }
  if (const char* v = Env("TICKWATCH_ELECTION_TIMEOUT_MS")) {
    config.election_timeout_ms = ParsePositive("TICKWATCH_ELECTION_TIMEOUT_MS", v);
  }
  if (const char* v = Env("TICKWATCH_TOKEN")) config.bearer_token = v;
  if (const char* v = Env("TICKWATCH_PUBLIC_URL")) config.public_base_url = v;
}

Node::Node(NodeConfig config) : config_(std::move(config)), registry_(config_.data_dir) {
  if (!config_.coordinator && !config_.worker) Fail(ErrorCode::kInvalidInput, "node needs at least one role");
  const bool clustered = !config_.peers.empty() || !config_.workers.empty();
  if (clustered && !config_.peers.count(config_.node_id) && !config_.workers.count(config_.node_id)) {
    Fail(ErrorCode::kInvalidInput, "peer list does not contain this node (" + config_.node_id + ")");
  }
  if (!clustered && !config_.coordinator) Fail(ErrorCode::kInvalidInput, "a worker-only node needs peers");
}

Node::~Node() { Stop(); }

void Node::Start() {
  {
    std::lock_guard lock(run_mu_);
    if (running_) return;
    running_ = true;
  }
  local_worker_ = std::make_unique<orchestrator::LocalWorker>(
      config_.node_id, [this](const std::string& ref) { return registry_.LoadArtifact(ref); });

  std::map<std::string, std::string> addresses = config_.peers;
  addresses.insert(config_.workers.begin(), config_.workers.end());
  if (!addresses.empty()) {
    transport_ = std::make_unique<orchestrator::TcpTransport>(addresses);
    const auto timeout = std::chrono::milliseconds(config_.election_timeout_ms);
    if (config_.coordinator && config_.peers.count(config_.node_id)) {
      std::vector<std::string> voters;
      for (const auto& [id, addr] : config_.peers) {
        if (id != config_.node_id) voters.push_back(id);
      }
      election_ = std::make_unique<orchestrator::ElectionDriver>(config_.node_id, voters, *transport_, timeout,
                                                                 config_.seed);
    }
    for (const auto& [id, addr] : addresses) {
      if (id == config_.node_id) continue;
      remote_workers_[id] = std::make_unique<orchestrator::RemoteWorker>(
          id, config_.node_id, *transport_, std::max(std::chrono::milliseconds(30'000), 3 * timeout));
    }
    auto score = orchestrator::WorkerHandler(*local_worker_);
    transport_->Listen(config_.node_id, [this, score](const Envelope& e) {
      if (IsElection(e.type)) {
        return election_ ? election_->Handle(e) : ErrorEnvelope(config_.node_id, "not a coordinator");
      }
      if (e.type == EnvelopeType::kScoreRequest && config_.worker) return score(e);
      return ErrorEnvelope(config_.node_id, "unsupported request");
    });
  }

  ServiceHooks hooks;
  hooks.run_tick = [this] { return TickNow(); };
  hooks.cluster_status = [this] { return Status(); };
  ServiceOptions options;
  options.bearer_token = config_.bearer_token;
  options.drift.seed = config_.seed;

  webhooks_ = std::make_unique<WebhookDispatcher>(registry_, poster_, WebhookConfig{},
                                                  [this] { return clock_.NowMs(); });
  service_ = std::make_unique<ApiService>(registry_, metrics_, clock_, webhooks_.get(), hooks, options);
  http_ = std::make_unique<HttpServer>(*service_);
  http_port_ = http_->Bind(config_.http_host, config_.http_port);
  webhooks_->set_public_base_url(!config_.public_base_url.empty()
                                     ? config_.public_base_url
                                     : "http://" + config_.http_host + ":" + std::to_string(http_port_));
  webhooks_->Start();
  http_->ServeInBackground();

  last_drift_day_ = clock_.NowMs() / kDayMs;
  if (election_) election_->Start();
  ticker_ = std::thread([this] { TickerLoop(); });
}

void Node::Stop() {
  {
    std::lock_guard lock(run_mu_);
    if (!running_) return;
    running_ = false;
  }
  run_cv_.notify_all();
  if (ticker_.joinable()) ticker_.join();
  if (http_) http_->Stop();
  if (election_) election_->Stop();
  if (transport_) transport_->Stop();
  if (webhooks_) webhooks_->Stop();
}

bool Node::is_leader() const {
  if (!config_.coordinator) return false;
  return election_ ? election_->is_leader() : true;
}

json Node::Status() const {
  json j{{"node_id", config_.node_id},
         {"mode", election_ ? "cluster" : (transport_ ? "worker" : "standalone")},
         {"roles", json::array()},
         {"leader", is_leader()},
         {"http_port", http_port_},
         {"tick_period_ms", config_.tick_period_ms}};
  if (config_.coordinator) j["roles"].push_back("coordinator");
  if (config_.worker) j["roles"].push_back("worker");
  if (election_) {
    const auto s = election_->state();
    j["term"] = s.current_term;
    j["role"] = orchestrator::RoleName(s.role);
    j["leader_id"] = election_->leader() ? json(*election_->leader()) : json(nullptr);
    j["peers"] = s.peers;
  }
  return j;
}

void Node::Maintenance(std::int64_t now) {
  for (const auto& sid : registry_.TakeSnapshotTasks()) {
    try {
      registry_.SnapshotSignal(sid, metrics_, now);
    } catch (const Error& e) {
      std::cerr << "snapshot " << sid << ": " << e.what() << "\n";
    }
  }
  orchestrator::SweepExpiredProposals(registry_, now);
  if (now / kDayMs != last_drift_day_) {
    last_drift_day_ = now / kDayMs;
    orchestrator::DriftJobConfig drift;
    drift.seed = config_.seed;
    orchestrator::RunDriftJob(registry_, metrics_, now, drift);
  }
}

json Node::TickNow() {
  if (!is_leader()) {
    std::string leader;
    if (election_ && election_->leader()) leader = *election_->leader();
    Fail(ErrorCode::kInvalidState, "node " + config_.node_id + " is not the leader" +
                                       (leader.empty() ? std::string() : " (leader: " + leader + ")"));
  }
  std::lock_guard lock(tick_mu_);
  const std::int64_t now = clock_.NowMs();
  Maintenance(now);
  orchestrator::TickContext ctx;
  ctx.registry = &registry_;
  ctx.metrics = &metrics_;
  ctx.leader_id = config_.node_id;
  ctx.term = election_ ? election_->state().current_term : 1;
  if (config_.worker) ctx.workers[config_.node_id] = local_worker_.get();
  for (auto& [id, w] : remote_workers_) ctx.workers[id] = w.get();
  ctx.on_alert = [this](const registry::AlertRecord& a) { webhooks_->Enqueue(a.alert_id); };
  last_tick_ = orchestrator::TickReportToJson(orchestrator::RunInferenceTick(ctx, ++tick_id_, now));
  return last_tick_;
}

void Node::TickerLoop() {
  std::unique_lock lock(run_mu_);
  while (running_) {
    run_cv_.wait_for(lock, std::chrono::milliseconds(config_.tick_period_ms));
    if (!running_) break;
    lock.unlock();
    try {
      if (is_leader()) TickNow();
    } catch (const std::exception& e) {
      std::cerr << "tick: " << e.what() << "\n";
    }
    lock.lock();
  }
}

}  // namespace tickwatch::api
