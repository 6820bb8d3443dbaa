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

#include "tickwatch/orchestrator/transport.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "tickwatch/core/error.hpp"

namespace tickwatch::orchestrator {
namespace {

constexpr std::size_t kMaxFrame = 64u << 20;

void PutU16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v >> 8));
  out.push_back(static_cast<char>(v & 0xff));
}

void PutU32(std::string& out, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<char>((v >> shift) & 0xff));
}

void PutU64(std::string& out, std::uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8) out.push_back(static_cast<char>((v >> shift) & 0xff));
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  std::uint64_t Uint(int width) {
    Need(static_cast<std::size_t>(width));
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i) v = (v << 8) | static_cast<unsigned char>(bytes_[pos_++]);
    return v;
  }
  std::string Bytes(std::size_t n) {
    Need(n);
    std::string out(bytes_.substr(pos_, n));
    pos_ += n;
    return out;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void Need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) Fail(ErrorCode::kInvalidInput, "truncated envelope");
  }
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

bool KnownType(std::uint8_t t) {
  switch (static_cast<EnvelopeType>(t)) {
    case EnvelopeType::kVoteRequest:
    case EnvelopeType::kVoteResponse:
    case EnvelopeType::kHeartbeat:
    case EnvelopeType::kHeartbeatReply:
    case EnvelopeType::kScoreRequest:
    case EnvelopeType::kScoreResponse:
    case EnvelopeType::kAck:
    case EnvelopeType::kError:
      return true;
  }
  return false;
}

[[noreturn]] void Unreachable(const std::string& to, const std::string& why) {
  Fail(ErrorCode::kSourceUnavailable, "node " + to + " unreachable: " + why);
}

bool WriteAll(int fd, const std::string& data) {
  std::size_t off = 0;
  while (off < data.size()) {
    const ssize_t n = ::send(fd, data.data() + off, data.size() - off, MSG_NOSIGNAL);
    if (n <= 0) {
      if (n < 0 && errno == EINTR) continue;
      return false;
    }
    off += static_cast<std::size_t>(n);
  }
  return true;
}

bool ReadExact(int fd, std::string& out, std::size_t n) {
  out.resize(n);
  std::size_t off = 0;
  while (off < n) {
    const ssize_t got = ::recv(fd, out.data() + off, n - off, 0);
    if (got <= 0) {
      if (got < 0 && errno == EINTR) continue;
      return false;
    }
    off += static_cast<std::size_t>(got);
  }
  return true;
}

bool WriteFrame(int fd, const Envelope& e) {
  const std::string body = EncodeEnvelope(e);
  std::string frame;
  PutU32(frame, static_cast<std::uint32_t>(body.size()));
  frame += body;
  return WriteAll(fd, frame);
}

// nullopt on EOF or socket error; throws InvalidInput on a bad frame.
std::optional<Envelope> ReadFrame(int fd) {
  std::string header;
  if (!ReadExact(fd, header, 4)) return std::nullopt;
  const auto len = static_cast<std::size_t>(Reader(header).Uint(4));
  if (len > kMaxFrame) Fail(ErrorCode::kInvalidInput, "frame too large");
  std::string body;
  if (!ReadExact(fd, body, len)) return std::nullopt;
  return DecodeEnvelope(body);
}

void SetTimeouts(int fd, std::chrono::milliseconds timeout) {
  timeval tv{};
  tv.tv_sec = static_cast<time_t>(timeout.count() / 1000);
  tv.tv_usec = static_cast<suseconds_t>((timeout.count() % 1000) * 1000);
  ::setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
  ::setsockopt(fd, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof tv);
}

std::pair<std::string, std::string> SplitHostPort(const std::string& address) {
  const auto colon = address.rfind(':');
  if (colon == std::string::npos) Fail(ErrorCode::kInvalidInput, "address needs host:port: " + address);
  return {address.substr(0, colon), address.substr(colon + 1)};
}

}  // namespace

std::string EncodeEnvelope(const Envelope& e) {
  if (e.sender.size() > 0xffff) Fail(ErrorCode::kInvalidInput, "sender id too long");
  if (e.payload.size() > kMaxFrame) Fail(ErrorCode::kInvalidInput, "payload too large");
  std::string out = "TW";
  out.push_back(static_cast<char>(e.version));
  out.push_back(static_cast<char>(e.type));
  PutU64(out, e.term);
  PutU16(out, static_cast<std::uint16_t>(e.sender.size()));
  out += e.sender;
  PutU32(out, static_cast<std::uint32_t>(e.payload.size()));
  out += e.payload;
  return out;
}

Envelope DecodeEnvelope(std::string_view bytes) {
  Reader r(bytes);
  if (r.Bytes(2) != "TW") Fail(ErrorCode::kInvalidInput, "bad envelope magic");
  Envelope e;
  e.version = static_cast<std::uint8_t>(r.Uint(1));
  if (e.version != kEnvelopeVersion) {
    Fail(ErrorCode::kInvalidInput, "unsupported envelope version " + std::to_string(e.version));
  }
  const auto type = static_cast<std::uint8_t>(r.Uint(1));
  if (!KnownType(type)) Fail(ErrorCode::kInvalidInput, "unknown message type " + std::to_string(type));
  e.type = static_cast<EnvelopeType>(type);
  e.term = r.Uint(8);
  e.sender = r.Bytes(static_cast<std::size_t>(r.Uint(2)));
  e.payload = r.Bytes(static_cast<std::size_t>(r.Uint(4)));
  if (!r.done()) Fail(ErrorCode::kInvalidInput, "trailing bytes after envelope");
  return e;
}

Envelope ElectionToEnvelope(const ElectionMessage& m) {
  Envelope e;
  e.type = static_cast<EnvelopeType>(m.type);
  e.term = m.term;
  e.sender = m.from;
  PutU16(e.payload, static_cast<std::uint16_t>(m.to.size()));
  e.payload += m.to;
  e.payload.push_back(m.granted ? 1 : 0);
  return e;
}

ElectionMessage ElectionFromEnvelope(const Envelope& e) {
  const auto t = static_cast<std::uint8_t>(e.type);
  if (t < 1 || t > 4) Fail(ErrorCode::kInvalidInput, "not an election message");
  Reader r(e.payload);
  ElectionMessage m;
  m.type = static_cast<MessageType>(t);
  m.term = e.term;
  m.from = e.sender;
  m.to = r.Bytes(static_cast<std::size_t>(r.Uint(2)));
  m.granted = r.Uint(1) != 0;
  if (!r.done()) Fail(ErrorCode::kInvalidInput, "trailing bytes in election payload");
  return m;
}

void InProcessBus::Listen(const std::string& node_id, Handler handler) {
  std::lock_guard lock(mu_);
  handlers_[node_id] = std::move(handler);
}

Envelope InProcessBus::Call(const std::string& to, const Envelope& request,
                            std::chrono::milliseconds) {
  Handler handler;
  {
    std::lock_guard lock(mu_);
    auto it = handlers_.find(to);
    const bool lost = loss_ > 0.0 && std::uniform_real_distribution<double>(0, 1)(rng_) < loss_;
    if (it == handlers_.end() || down_.count(to) || down_.count(request.sender) ||
        cut_.count({request.sender, to}) || lost) {
      ++dropped_;
      Unreachable(to, it == handlers_.end() ? "no listener" : "dropped");
    }
    handler = it->second;
  }
  const Envelope reply = handler(DecodeEnvelope(EncodeEnvelope(request)));
  ++delivered_;
  return DecodeEnvelope(EncodeEnvelope(reply));
}

void InProcessBus::SetDown(const std::string& node_id, bool down) {
  std::lock_guard lock(mu_);
  if (down) {
    down_.insert(node_id);
  } else {
    down_.erase(node_id);
  }
}

void InProcessBus::CutLink(const std::string& a, const std::string& b) {
  std::lock_guard lock(mu_);
  cut_.insert({a, b});
  cut_.insert({b, a});
}

void InProcessBus::HealLinks() {
  std::lock_guard lock(mu_);
  cut_.clear();
}

void InProcessBus::SetLoss(double probability) {
  std::lock_guard lock(mu_);
  loss_ = probability;
}

TcpTransport::TcpTransport(std::map<std::string, std::string> addresses)
    : addresses_(std::move(addresses)) {}

TcpTransport::~TcpTransport() { Stop(); }

void TcpTransport::Listen(const std::string& node_id, Handler handler) {
  auto it = addresses_.find(node_id);
  if (it == addresses_.end()) Fail(ErrorCode::kInvalidInput, "no address for " + node_id);
  const auto [host, port] = SplitHostPort(it->second);
  handler_ = std::move(handler);

  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) Fail(ErrorCode::kInternal, std::string("socket: ") + std::strerror(errno));
  const int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(std::stoi(port)));
  if (::inet_pton(AF_INET, host == "localhost" ? "127.0.0.1" : host.c_str(), &addr.sin_addr) != 1) {
    Fail(ErrorCode::kInvalidInput, "bad listen host " + host);
  }
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 ||
      ::listen(listen_fd_, 64) != 0) {
    const std::string why = std::strerror(errno);
    ::close(listen_fd_);
    listen_fd_ = -1;
    Fail(ErrorCode::kInternal, "listen on " + it->second + ": " + why);
  }
  socklen_t len = sizeof addr;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  bound_port_ = ntohs(addr.sin_port);
  addresses_[node_id] = host + ":" + std::to_string(bound_port_);

  acceptor_ = std::thread([this] {
    while (!stopping_) {
      const int fd = ::accept(listen_fd_, nullptr, nullptr);
      if (fd < 0) {
        if (stopping_) break;
        continue;
      }
      std::lock_guard lock(conn_mu_);
      connections_.emplace_back([this, fd] { Serve(fd); });
    }
  });
}

void TcpTransport::Serve(int fd) {
  const int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  SetTimeouts(fd, std::chrono::milliseconds(5000));
  while (!stopping_) {
    pollfd pfd{fd, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, 200);
    if (ready == 0) continue;
    if (ready < 0 && errno == EINTR) continue;
    if (ready < 0) break;
    std::optional<Envelope> request;
    try {
      request = ReadFrame(fd);
    } catch (const Error&) {
      break;  // malformed frame: drop the connection
    }
    if (!request) break;
    Envelope reply;
    try {
      reply = handler_(*request);
    } catch (const std::exception& e) {
      reply.type = EnvelopeType::kError;
      reply.payload = e.what();
    }
    if (!WriteFrame(fd, reply)) break;
  }
  ::close(fd);
}

Envelope TcpTransport::Call(const std::string& to, const Envelope& request,
                            std::chrono::milliseconds timeout) {
  auto it = addresses_.find(to);
  if (it == addresses_.end()) Unreachable(to, "no address");
  const auto [host, port] = SplitHostPort(it->second);
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (::getaddrinfo(host.c_str(), port.c_str(), &hints, &res) != 0 || res == nullptr) {
    Unreachable(to, "cannot resolve " + host);
  }
  const int fd = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
  if (fd < 0) {
    ::freeaddrinfo(res);
    Unreachable(to, "socket failed");
  }
  SetTimeouts(fd, timeout);
  const int rc = ::connect(fd, res->ai_addr, res->ai_addrlen);
  ::freeaddrinfo(res);
  if (rc != 0) {
    ::close(fd);
    Unreachable(to, std::strerror(errno));
  }
  const int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  std::optional<Envelope> reply;
  if (WriteFrame(fd, request)) {
    try {
      reply = ReadFrame(fd);
    } catch (const Error&) {
      ::close(fd);
      throw;
    }
  }
  ::close(fd);
  if (!reply) Unreachable(to, "no reply within " + std::to_string(timeout.count()) + " ms");
  return *reply;
}

void TcpTransport::Stop() {
  if (stopping_.exchange(true)) return;
  if (listen_fd_ >= 0) {
    ::shutdown(listen_fd_, SHUT_RDWR);
    ::close(listen_fd_);
  }
  if (acceptor_.joinable()) acceptor_.join();
  std::lock_guard lock(conn_mu_);
  for (auto& t : connections_) {
    if (t.joinable()) t.join();
  }
}

}  // namespace tickwatch::orchestrator
