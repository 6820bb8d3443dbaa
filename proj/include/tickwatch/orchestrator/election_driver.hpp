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

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <future>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "tickwatch/orchestrator/election.hpp"
#include "tickwatch/orchestrator/transport.hpp"

namespace tickwatch::orchestrator {

// Runs ElectionStep on wall-clock time over a Transport. Requests are
// answered inline (vote and heartbeat replies travel back as the call's
// response); outbound requests are sent from short-lived tasks so a slow
// peer never blocks the state machine.
class ElectionDriver {
 public:
  ElectionDriver(std::string node_id, std::vector<std::string> peers, Transport& transport,
                 std::chrono::milliseconds timeout, std::uint64_t seed);
  ~ElectionDriver();
  ElectionDriver(const ElectionDriver&) = delete;
  ElectionDriver& operator=(const ElectionDriver&) = delete;

  // Answers an election envelope addressed to this node.
  Envelope Handle(const Envelope& request);

  void Start();
  void Stop();

  NodeState state() const;
  bool is_leader() const;
  std::optional<std::string> leader() const;

 private:
  double Now() const;
  void Loop();
  void Apply(const ElectionEvent& event, std::vector<ElectionMessage>* replies_to_sender,
             const std::string& sender);
  void Send(const ElectionMessage& m);

  std::string node_id_;
  Transport& transport_;
  ElectionConfig config_;
  std::chrono::milliseconds call_timeout_;
  std::uint64_t seed_;
  std::chrono::steady_clock::time_point epoch_;

  mutable std::mutex mu_;
  std::condition_variable cv_;
  NodeState state_;
  std::deque<ElectionMessage> inbox_;
  bool running_ = false;
  std::thread loop_;
  std::mutex sends_mu_;
  std::vector<std::future<void>> sends_;
};

}  // namespace tickwatch::orchestrator
