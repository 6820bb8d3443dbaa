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

#include "tickwatch/orchestrator/election_driver.hpp"

#include <algorithm>

#include "tickwatch/core/error.hpp"

namespace tickwatch::orchestrator {

ElectionDriver::ElectionDriver(std::string node_id, std::vector<std::string> peers,
                               Transport& transport, std::chrono::milliseconds timeout,
                               std::uint64_t seed)
    : node_id_(std::move(node_id)),
      transport_(transport),
      call_timeout_(std::max(std::chrono::milliseconds(50), timeout / 3)),
      seed_(seed),
      epoch_(std::chrono::steady_clock::now()) {
  config_.timeout = static_cast<double>(timeout.count()) / 1000.0;
  state_ = InitialNodeState(node_id_, std::move(peers), 0.0, config_, seed_);
}

ElectionDriver::~ElectionDriver() { Stop(); }

double ElectionDriver::Now() const {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - epoch_).count();
}

void ElectionDriver::Apply(const ElectionEvent& event, std::vector<ElectionMessage>* replies,
                           const std::string& sender) {
  StepResult r = ElectionStep(state_, event, config_, seed_);
  state_ = std::move(r.state);
  for (auto& m : r.outbound) {
    if (replies && m.to == sender &&
        (m.type == MessageType::kVoteResponse || m.type == MessageType::kHeartbeatReply)) {
      replies->push_back(std::move(m));
    } else {
      Send(m);
    }
  }
}

void ElectionDriver::Send(const ElectionMessage& m) {
  std::lock_guard lock(sends_mu_);
  sends_.erase(std::remove_if(sends_.begin(), sends_.end(),
                              [](std::future<void>& f) {
                                return f.wait_for(std::chrono::seconds(0)) == std::future_status::ready;
                              }),
               sends_.end());
  sends_.push_back(std::async(std::launch::async, [this, m] {
    try {
      const Envelope reply = transport_.Call(m.to, ElectionToEnvelope(m), call_timeout_);
      if (reply.type == EnvelopeType::kVoteResponse || reply.type == EnvelopeType::kHeartbeatReply) {
        {
          std::lock_guard lock(mu_);
          inbox_.push_back(ElectionFromEnvelope(reply));
        }
        cv_.notify_all();
      }
    } catch (const Error&) {
      // Unreachable peer: the election timers take care of it.
    }
  }));
}

Envelope ElectionDriver::Handle(const Envelope& request) {
  const ElectionMessage m = ElectionFromEnvelope(request);
  std::vector<ElectionMessage> replies;
  {
    std::lock_guard lock(mu_);
    ElectionEvent ev;
    ev.kind = EventKind::kMessage;
    ev.now = Now();
    ev.message = m;
    Apply(ev, &replies, m.from);
  }
  cv_.notify_all();
  if (replies.empty()) {
    Envelope ack;
    ack.type = EnvelopeType::kAck;
    ack.sender = node_id_;
    return ack;
  }
  return ElectionToEnvelope(replies.front());
}

void ElectionDriver::Loop() {
  std::unique_lock lock(mu_);
  while (running_) {
    if (!inbox_.empty()) {
      ElectionEvent ev;
      ev.kind = EventKind::kMessage;
      ev.now = Now();
      ev.message = std::move(inbox_.front());
      inbox_.pop_front();
      Apply(ev, nullptr, {});
      continue;
    }
    const double wake = state_.next_wakeup();
    const double now = Now();
    if (now >= wake) {
      ElectionEvent ev;
      ev.kind = EventKind::kTimeout;
      ev.now = now;
      Apply(ev, nullptr, {});
      continue;
    }
    cv_.wait_for(lock, std::chrono::duration<double>(wake - now));
  }
}

void ElectionDriver::Start() {
  std::lock_guard lock(mu_);
  if (running_) return;
  running_ = true;
  loop_ = std::thread([this] { Loop(); });
}

void ElectionDriver::Stop() {
  {
    std::lock_guard lock(mu_);
    if (!running_) return;
    running_ = false;
  }
  cv_.notify_all();
  if (loop_.joinable()) loop_.join();
  std::lock_guard lock(sends_mu_);
  for (auto& f : sends_) f.wait();
  sends_.clear();
}

NodeState ElectionDriver::state() const {
  std::lock_guard lock(mu_);
  return state_;
}

bool ElectionDriver::is_leader() const {
  std::lock_guard lock(mu_);
  return state_.role == Role::kLeader;
}

std::optional<std::string> ElectionDriver::leader() const {
  std::lock_guard lock(mu_);
  if (state_.role == Role::kLeader) return node_id_;
  return state_.leader_id;
}

}  // namespace tickwatch::orchestrator
