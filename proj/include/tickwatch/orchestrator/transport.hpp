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
#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <memory>
#include <mutex>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "tickwatch/orchestrator/election.hpp"

namespace tickwatch::orchestrator {

inline constexpr std::uint8_t kEnvelopeVersion = 1;

enum class EnvelopeType : std::uint8_t {
  kVoteRequest = 1,
  kVoteResponse = 2,
  kHeartbeat = 3,
  kHeartbeatReply = 4,
  kScoreRequest = 16,
  kScoreResponse = 17,
  kAck = 30,
  kError = 31,
};

// Inter-node message. Byte layout (all integers big-endian):
//   0   2  magic "TW"
//   2   1  version (1)
//   3   1  msg_type
//   4   8  term
//   12  2  sender length S
//   14  S  sender (UTF-8)
//   .   4  payload length P
//   .   P  payload
// Over TCP each envelope is preceded by its u32 big-endian byte length.
struct Envelope {
  std::uint8_t version = kEnvelopeVersion;
  EnvelopeType type = EnvelopeType::kAck;
  std::uint64_t term = 0;
  std::string sender;
  std::string payload;

  friend bool operator==(const Envelope&, const Envelope&) = default;
};

std::string EncodeEnvelope(const Envelope& e);
// Throws InvalidInput on truncation, bad magic, unknown version or type, or
// trailing bytes.
Envelope DecodeEnvelope(std::string_view bytes);

// Election messages travel with payload = u16 length + `to`, u8 granted.
Envelope ElectionToEnvelope(const ElectionMessage& m);
ElectionMessage ElectionFromEnvelope(const Envelope& e);

using Handler = std::function<Envelope(const Envelope&)>;

// Request/response contract shared by the in-process bus and TCP. Call
// throws SourceUnavailable when the peer cannot be reached or does not
// answer within the timeout.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual void Listen(const std::string& node_id, Handler handler) = 0;
  virtual Envelope Call(const std::string& to, const Envelope& request,
                        std::chrono::milliseconds timeout) = 0;
};

// Synchronous in-memory delivery. Envelopes are encoded and decoded on the
// way through so the byte format is exercised. Chaos hooks: node down/up,
// cut links, seeded message loss.
class InProcessBus final : public Transport {
 public:
  explicit InProcessBus(std::uint64_t seed = 1) : rng_(seed) {}

  void Listen(const std::string& node_id, Handler handler) override;
  Envelope Call(const std::string& to, const Envelope& request,
                std::chrono::milliseconds timeout) override;

  void SetDown(const std::string& node_id, bool down);
  void CutLink(const std::string& a, const std::string& b);
  void HealLinks();
  void SetLoss(double probability);
  std::uint64_t delivered() const { return delivered_.load(); }
  std::uint64_t dropped() const { return dropped_.load(); }

 private:
  std::mutex mu_;
  std::map<std::string, Handler> handlers_;
  std::set<std::string> down_;
  std::set<std::pair<std::string, std::string>> cut_;
  double loss_ = 0.0;
  std::mt19937_64 rng_;
  std::atomic<std::uint64_t> delivered_{0};
  std::atomic<std::uint64_t> dropped_{0};
};

// One connection per call; the server runs a thread per accepted
// connection and answers each frame with one frame.
class TcpTransport final : public Transport {
 public:
  // node id -> "host:port"
  explicit TcpTransport(std::map<std::string, std::string> addresses);
  ~TcpTransport() override;

  void Listen(const std::string& node_id, Handler handler) override;
  Envelope Call(const std::string& to, const Envelope& request,
                std::chrono::milliseconds timeout) override;
  void Stop();
  // Port actually bound (useful with port 0).
  int bound_port() const { return bound_port_; }

 private:
  void Serve(int fd);

  std::map<std::string, std::string> addresses_;
  Handler handler_;
  int listen_fd_ = -1;
  int bound_port_ = 0;
  std::atomic<bool> stopping_{false};
  std::thread acceptor_;
  std::mutex conn_mu_;
  std::vector<std::thread> connections_;
};

}  // namespace tickwatch::orchestrator
