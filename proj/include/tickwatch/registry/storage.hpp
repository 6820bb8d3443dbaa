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
#include <cstdio>
#include <filesystem>
#include <map>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace tickwatch::registry {

// Append-only log of JSON objects, one per line. Readers stop at the first
// line that does not parse, which is how a torn tail from a crash shows up;
// everything before it is a committed prefix. An empty path keeps nothing
// (in-memory registries).
class JsonlLog {
 public:
  explicit JsonlLog(std::filesystem::path path);
  ~JsonlLog();
  JsonlLog(const JsonlLog&) = delete;
  JsonlLog& operator=(const JsonlLog&) = delete;

  std::vector<nlohmann::json> ReadAll() const;
  void Append(const nlohmann::json& record);
  // Atomically replaces the log (write to a temp file, then rename).
  void Rewrite(const std::vector<nlohmann::json>& records);

  bool persistent() const { return !path_.empty(); }
  const std::filesystem::path& path() const { return path_; }

 private:
  void Open();

  std::filesystem::path path_;
  std::FILE* file_ = nullptr;
};

// Content-addressed blobs. A ref is "sha256:<64 hex>" of the bytes, so equal
// artifacts share storage and a ref can be verified on load.
class ArtifactStore {
 public:
  explicit ArtifactStore(std::filesystem::path dir);

  std::string Save(std::string_view bytes);
  // NotFound when absent; ModelUnavailable when the stored bytes no longer
  // hash to the ref.
  std::string Load(const std::string& ref) const;
  bool Contains(const std::string& ref) const;
  std::size_t reads() const { return reads_.load(); }

 private:
  std::filesystem::path PathFor(const std::string& ref) const;

  std::filesystem::path dir_;
  mutable std::mutex mu_;
  std::map<std::string, std::string> memory_;
  mutable std::atomic<std::size_t> reads_{0};
};

std::string Sha256Hex(std::string_view bytes);

// Writes `bytes` to `path` via a temp file and rename.
void WriteFileAtomic(const std::filesystem::path& path, std::string_view bytes);
std::string ReadFile(const std::filesystem::path& path);

}  // namespace tickwatch::registry
