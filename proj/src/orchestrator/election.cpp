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

#include "tickwatch/orchestrator/election.hpp"

#include <algorithm>
#include <cstring>
#include <functional>

namespace tickwatch::orchestrator {
namespace {

std::uint64_t Mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double RandomTimeout(const std::string& node, std::uint64_t term, double now,
                     const ElectionConfig& config, std::uint64_t seed) {
  std::uint64_t bits = 0;
  std::memcpy(&bits, &now, sizeof(bits));
  const std::uint64_t h = Mix(seed ^ Mix(std::hash<std::string>{}(node)) ^ Mix(term * 0x100000001b3ULL) ^ bits);
  const double u = static_cast<double>(h >> 11) * 0x1.0p-53;
  return config.timeout * (1.0 + u);
}

void BecomeFollower(NodeState& s, std::uint64_t term) {
  s.role = Role::kFollower;
  s.current_term = term;
  s.voted_for.reset();
  s.votes.clear();
  s.leader_id.reset();
}

void Broadcast(const NodeState& s, MessageType type, std::vector<ElectionMessage>& out) {
  for (const auto& peer : s.peers) {
    out.push_back(ElectionMessage{type, s.current_term, s.node_id, peer, false});
  }
}

void BecomeLeader(NodeState& s, double now, const ElectionConfig& config,
                  std::vector<ElectionMessage>& out) {
  s.role = Role::kLeader;
  s.leader_id = s.node_id;
  s.next_heartbeat_at = now + config.heartbeat_interval();
  Broadcast(s, MessageType::kHeartbeat, out);
}

bool WellFormed(const NodeState& s, const ElectionMessage& m) {
  return m.term > 0 && m.to == s.node_id &&
         std::find(s.peers.begin(), s.peers.end(), m.from) != s.peers.end();
}

}  // namespace

const char* RoleName(Role r) {
  switch (r) {
    case Role::kFollower: return "follower";
    case Role::kCandidate: return "candidate";
    case Role::kLeader: return "leader";
  }
  return "follower";
}

NodeState InitialNodeState(std::string node_id, std::vector<std::string> peers, double now,
                           const ElectionConfig& config, std::uint64_t rng_seed) {
  NodeState s;
  s.node_id = std::move(node_id);
  s.peers = std::move(peers);
  std::erase(s.peers, s.node_id);
  s.last_heartbeat_at = now;
  s.election_deadline = now + RandomTimeout(s.node_id, 0, now, config, rng_seed);
  return s;
}

StepResult ElectionStep(const NodeState& state, const ElectionEvent& event,
                        const ElectionConfig& config, std::uint64_t rng_seed) {
  StepResult r{state, {}};
  NodeState& s = r.state;
  const double now = event.now;
  auto reset_deadline = [&] {
    s.election_deadline = now + RandomTimeout(s.node_id, s.current_term, now, config, rng_seed);
  };

  if (event.kind == EventKind::kTimeout) {
    if (s.role == Role::kLeader) {
      if (now >= s.next_heartbeat_at) {
        Broadcast(s, MessageType::kHeartbeat, r.outbound);
        s.next_heartbeat_at = now + config.heartbeat_interval();
      }
      return r;
    }
    if (now < s.election_deadline) return r;
    s.role = Role::kCandidate;
    ++s.current_term;
    s.voted_for = s.node_id;
    s.votes = {s.node_id};
    s.leader_id.reset();
    reset_deadline();
    if (s.votes.size() * 2 > s.cluster_size()) {
      BecomeLeader(s, now, config, r.outbound);
    } else {
      Broadcast(s, MessageType::kVoteRequest, r.outbound);
    }
    return r;
  }

  const ElectionMessage& m = event.message;
  if (!WellFormed(s, m)) {
    ++s.dropped_messages;
    return r;
  }
  if (m.term > s.current_term) {
    BecomeFollower(s, m.term);
    if (m.type != MessageType::kHeartbeat) reset_deadline();
  }

  switch (m.type) {
    case MessageType::kVoteRequest: {
      const bool grant = m.term == s.current_term && s.role == Role::kFollower &&
                         (!s.voted_for || *s.voted_for == m.from);
      if (grant) {
        s.voted_for = m.from;
        reset_deadline();
      }
      r.outbound.push_back(ElectionMessage{MessageType::kVoteResponse, s.current_term, s.node_id,
                                           m.from, grant});
      break;
    }
    case MessageType::kVoteResponse:
      if (s.role == Role::kCandidate && m.term == s.current_term && m.granted) {
        s.votes.insert(m.from);
        if (s.votes.size() * 2 > s.cluster_size()) BecomeLeader(s, now, config, r.outbound);
      }
      break;
    case MessageType::kHeartbeat:
      if (m.term < s.current_term) {
        r.outbound.push_back(
            ElectionMessage{MessageType::kHeartbeatReply, s.current_term, s.node_id, m.from, false});
        break;
      }
      if (s.role != Role::kFollower) {
        s.role = Role::kFollower;
        s.votes.clear();
      }
      s.leader_id = m.from;
      s.last_heartbeat_at = now;
      reset_deadline();
      break;
    case MessageType::kHeartbeatReply:
      break;  // a higher term was already handled above
  }
  return r;
}

}  // namespace tickwatch::orchestrator
