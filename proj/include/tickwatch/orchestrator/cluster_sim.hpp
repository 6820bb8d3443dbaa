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
#include <functional>
#include <map>
#include <optional>
#include <queue>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "tickwatch/orchestrator/election.hpp"

namespace tickwatch::orchestrator {

struct SimConfig {
  int nodes = 3;
  ElectionConfig election;
  double min_delay = 0.1;  // message delay drawn uniformly from [min, max]
  double max_delay = 0.9;
  double loss = 0.0;       // independent per-message drop probability
  std::uint64_t seed = 1;
};

// Discrete-event simulation of a cluster running ElectionStep over an
// in-process message bus. Everything random (delays, loss, timeouts) flows
// from `seed`, so a run is reproducible. Chaos hooks: kill/restart, pause/
// resume, link cuts and random loss. Killed and paused nodes keep their
// term and vote, as a restarted process would from its persisted state.
class ClusterSim {
 public:
  explicit ClusterSim(SimConfig config);

  double now() const { return now_; }
  const std::vector<std::string>& node_ids() const { return ids_; }
  const NodeState& node(const std::string& id) const { return nodes_.at(id).state; }
  bool is_up(const std::string& id) const { return nodes_.at(id).up; }
  std::vector<std::string> live_nodes() const;

  // Processes events up to and including time t.
  void RunUntil(double t);
  // Runs until `done` holds (checked after every event) or `deadline`;
  // returns whether it held.
  bool RunUntil(const std::function<bool()>& done, double deadline);

  void Kill(const std::string& id);
  void Restart(const std::string& id);
  void Pause(const std::string& id) { Kill(id); }
  void Resume(const std::string& id) { Restart(id); }
  void CutLink(const std::string& a, const std::string& b);
  void HealLink(const std::string& a, const std::string& b);
  void SetLoss(double loss) { config_.loss = loss; }

  // Live node in the leader role with the highest term.
  std::optional<std::string> Leader() const;
  // Every (term -> nodes that became leader in it) observed so far.
  const std::map<std::uint64_t, std::set<std::string>>& leaders_by_term() const { return leaders_; }
  bool SafetyViolated() const;
  // Time the first leader of a term above `term` appeared, if any.
  std::optional<double> FirstLeaderAfterTerm(std::uint64_t term) const;

  std::uint64_t messages_sent() const { return sent_; }
  std::uint64_t messages_lost() const { return lost_; }

 private:
  struct SimNode {
    NodeState state;
    bool up = true;
  };
  struct Event {
    double at;
    std::uint64_t seq;
    std::string node;
    bool timer;
    ElectionMessage message;
    bool operator>(const Event& o) const { return at != o.at ? at > o.at : seq > o.seq; }
  };

  void Deliver(const Event& e);
  void Apply(const std::string& id, const ElectionEvent& ev);
  void ScheduleTimer(const std::string& id);
  void Send(const ElectionMessage& m);
  std::uint64_t NodeSeed(const std::string& id) const;

  SimConfig config_;
  std::vector<std::string> ids_;
  std::map<std::string, SimNode> nodes_;
  std::set<std::pair<std::string, std::string>> cut_;
  std::priority_queue<Event, std::vector<Event>, std::greater<>> queue_;
  std::mt19937_64 rng_;
  double now_ = 0.0;
  std::uint64_t seq_ = 0;
  std::uint64_t sent_ = 0;
  std::uint64_t lost_ = 0;
  std::map<std::uint64_t, std::set<std::string>> leaders_;
  std::map<std::uint64_t, double> first_leader_at_;
};

}  // namespace tickwatch::orchestrator
