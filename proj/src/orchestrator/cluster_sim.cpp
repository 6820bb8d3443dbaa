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

#include "tickwatch/orchestrator/cluster_sim.hpp"

#include "tickwatch/core/error.hpp"

namespace tickwatch::orchestrator {

ClusterSim::ClusterSim(SimConfig config) : config_(config), rng_(config.seed) {
  if (config_.nodes < 1) Fail(ErrorCode::kInvalidInput, "cluster needs at least one node");
  for (int i = 0; i < config_.nodes; ++i) ids_.push_back("node-" + std::to_string(i));
  for (const auto& id : ids_) {
    nodes_[id].state = InitialNodeState(id, ids_, 0.0, config_.election, NodeSeed(id));
    ScheduleTimer(id);
  }
}

std::uint64_t ClusterSim::NodeSeed(const std::string& id) const {
  return config_.seed * 0x9e3779b97f4a7c15ULL + std::hash<std::string>{}(id);
}

std::vector<std::string> ClusterSim::live_nodes() const {
  std::vector<std::string> out;
  for (const auto& id : ids_) {
    if (nodes_.at(id).up) out.push_back(id);
  }
  return out;
}

void ClusterSim::ScheduleTimer(const std::string& id) {
  const NodeState& s = nodes_.at(id).state;
  queue_.push(Event{std::max(s.next_wakeup(), now_), seq_++, id, true, {}});
}

void ClusterSim::Send(const ElectionMessage& m) {
  ++sent_;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double roll = unit(rng_);
  const double delay = config_.min_delay + (config_.max_delay - config_.min_delay) * unit(rng_);
  if (roll < config_.loss || cut_.count({m.from, m.to}) > 0) {
    ++lost_;
    return;
  }
  queue_.push(Event{now_ + delay, seq_++, m.to, false, m});
}

void ClusterSim::Apply(const std::string& id, const ElectionEvent& ev) {
  SimNode& n = nodes_.at(id);
  const Role before = n.state.role;
  const std::uint64_t term_before = n.state.current_term;
  StepResult r = ElectionStep(n.state, ev, config_.election, NodeSeed(id));
  const double wake_before = n.state.next_wakeup();
  n.state = std::move(r.state);
  if (n.state.role == Role::kLeader && (before != Role::kLeader || term_before != n.state.current_term)) {
    leaders_[n.state.current_term].insert(id);
    first_leader_at_.emplace(n.state.current_term, now_);
  }
  for (const auto& m : r.outbound) Send(m);
  if (n.state.next_wakeup() != wake_before || ev.kind == EventKind::kTimeout) ScheduleTimer(id);
}

void ClusterSim::Deliver(const Event& e) {
  SimNode& n = nodes_.at(e.node);
  if (!n.up) {
    if (!e.timer) ++lost_;
    return;
  }
  if (e.timer) {
    // Stale timers (superseded deadlines) are harmless; only act on time.
    if (e.at + 1e-12 < n.state.next_wakeup()) return;
    Apply(e.node, ElectionEvent{EventKind::kTimeout, now_, {}});
  } else {
    Apply(e.node, ElectionEvent{EventKind::kMessage, now_, e.message});
  }
}

void ClusterSim::RunUntil(double t) {
  RunUntil([] { return false; }, t);
}

bool ClusterSim::RunUntil(const std::function<bool()>& done, double deadline) {
  if (done()) return true;
  while (!queue_.empty() && queue_.top().at <= deadline) {
    const Event e = queue_.top();
    queue_.pop();
    now_ = e.at;
    Deliver(e);
    if (done()) return true;
  }
  now_ = std::max(now_, deadline);
  return done();
}

void ClusterSim::Kill(const std::string& id) {
  SimNode& n = nodes_.at(id);
  n.up = false;
}

void ClusterSim::Restart(const std::string& id) {
  SimNode& n = nodes_.at(id);
  if (n.up) return;
  n.up = true;
  // Volatile state is lost; term and vote survive.
  NodeState fresh = InitialNodeState(id, ids_, now_, config_.election, NodeSeed(id) ^ seq_);
  fresh.current_term = n.state.current_term;
  fresh.voted_for = n.state.voted_for;
  fresh.dropped_messages = n.state.dropped_messages;
  n.state = std::move(fresh);
  ScheduleTimer(id);
}

void ClusterSim::CutLink(const std::string& a, const std::string& b) {
  cut_.insert({a, b});
  cut_.insert({b, a});
}

void ClusterSim::HealLink(const std::string& a, const std::string& b) {
  cut_.erase({a, b});
  cut_.erase({b, a});
}

std::optional<std::string> ClusterSim::Leader() const {
  std::optional<std::string> best;
  std::uint64_t term = 0;
  for (const auto& id : ids_) {
    const SimNode& n = nodes_.at(id);
    if (n.up && n.state.role == Role::kLeader && (!best || n.state.current_term > term)) {
      best = id;
      term = n.state.current_term;
    }
  }
  return best;
}

bool ClusterSim::SafetyViolated() const {
  for (const auto& [term, who] : leaders_) {
    if (who.size() > 1) return true;
  }
  return false;
}

std::optional<double> ClusterSim::FirstLeaderAfterTerm(std::uint64_t term) const {
  const auto it = first_leader_at_.upper_bound(term);
  if (it == first_leader_at_.end()) return std::nullopt;
  return it->second;
}

}  // namespace tickwatch::orchestrator
