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

#include "tickwatch/api/http_server.hpp"

#include <algorithm>
#include <cctype>
#include <thread>

#include "httplib.h"
#include "tickwatch/core/error.hpp"

namespace tickwatch::api {

struct HttpServer::Impl {
  explicit Impl(ApiService& s) : service(s) {}
  ApiService& service;
  httplib::Server server;
  std::thread thread;
};

namespace {

std::string Lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

}  // namespace

HttpServer::HttpServer(ApiService& service) : impl_(std::make_unique<Impl>(service)) {
  auto handler = [this](const httplib::Request& req, httplib::Response& res) {
    ApiRequest r;
    r.method = req.method;
    r.path = req.path;
    r.body = req.body;
    for (const auto& [k, v] : req.params) r.query[k] = v;
    for (const auto& [k, v] : req.headers) r.headers[Lower(k)] = v;
    const ApiResponse out = impl_->service.Handle(r);
    res.status = out.status;
    res.set_content(out.body, out.content_type);
  };
  impl_->server.Get(".*", handler);
  impl_->server.Post(".*", handler);
  impl_->server.Patch(".*", handler);
  impl_->server.Put(".*", handler);
  impl_->server.Delete(".*", handler);
}

HttpServer::~HttpServer() { Stop(); }

int HttpServer::Bind(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
  } else if (!impl_->server.bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound <= 0) Fail(ErrorCode::kSourceUnavailable, "cannot bind " + host + ":" + std::to_string(port));
  return bound;
}

void HttpServer::Serve() { impl_->server.listen_after_bind(); }

void HttpServer::ServeInBackground() {
  impl_->thread = std::thread([this] { Serve(); });
  impl_->server.wait_until_ready();
}

int HttpServer::Start(const std::string& host, int port) {
  const int bound = Bind(host, port);
  ServeInBackground();
  return bound;
}

void HttpServer::Stop() {
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace tickwatch::api
