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

#include <memory>
#include <string>

#include "tickwatch/api/service.hpp"

namespace tickwatch::api {

// Serves an ApiService over HTTP/1.1. Port 0 binds an ephemeral port.
class HttpServer {
 public:
  explicit HttpServer(ApiService& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Binds and returns the port; Serve() then blocks until Stop().
  int Bind(const std::string& host, int port);
  void Serve();
  // Serve() on a background thread of a bound server.
  void ServeInBackground();
  // Bind plus Serve on a background thread.
  int Start(const std::string& host, int port);
  void Stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace tickwatch::api
