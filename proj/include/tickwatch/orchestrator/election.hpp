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
#include <set>
#include <string>
#include <vector>

namespace tickwatch::orchestrator {

enum class Role { kFollower, kCandidate, kLeader };
const char* RoleName(Role r);

enum class MessageType : std::uint8_t {
  kVoteRequest = 1,
  kVoteResponse = 2,
  kHeartbeat = 3,
  kHeartbeatReply = 4,
};

struct ElectionMessage {
  MessageType type = MessageType::kHeartbeat;
  std::uint64_t term = 0;
  std::string from;
  std::string to;
  bool granted = false;  // vote responses only
};

struct ElectionConfig {
  double timeout = 10.0;  // T; election timeouts are drawn from [T, 2T]
  double heartbeat_interval() const { return timeout / 3.0; }
};

struct NodeState {
  std::string node_id;
  Role role = Role::kFollower;
  std::uint64_t current_term = 0;
  std::optional<std::string> voted_for;
  std::vector<std::string> peers;  // excludes node_id
  std::optional<std::string> leader_id;
  double last_heartbeat_at = 0.0;
  double election_deadline = 0.0;
  double next_heartbeat_at = 0.0;
  std::set<std::string> votes;
  std::uint64_t dropped_messages = 0;

  std::size_t cluster_size() const { return peers.size() + 1; }
  // Next time the node needs a timer event.
  double next_wakeup() const { return role == Role::kLeader ? next_heartbeat_at : election_deadline; }
};

enum class EventKind { kTimeout, kMessage };

struct ElectionEvent {
  EventKind kind = EventKind::kTimeout;
  double now = 0.0;
  ElectionMessage message;  // kMessage only
};

struct StepResult {
  NodeState state;
  std::vector<ElectionMessage> outbound;
};

// Fresh follower whose first election deadline is drawn from [T, 2T].
NodeState InitialNodeState(std::string node_id, std::vector<std::string> peers, double now,
                           const ElectionConfig& config, std::uint64_t rng_seed);

// Leader election (no log replication). Timeouts fire only at or after the
// deadline; randomized deadlines come from a hash of (rng_seed, node, term,
// now), so equal inputs give equal outputs. Messages from unknown senders,
// addressed elsewhere, or with term 0 are dropped and counted.
StepResult ElectionStep(const NodeState& state, const ElectionEvent& event,
                        const ElectionConfig& config, std::uint64_t rng_seed);

}  // namespace tickwatch::orchestrator
