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

#include <condition_variable>
#include <cstdint>
#include <functional>
#include <list>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <utility>

#include "tickwatch/models/model.hpp"

namespace tickwatch::orchestrator {

struct CacheStats {
  std::uint64_t hits = 0;
  std::uint64_t misses = 0;
  std::uint64_t evictions = 0;
  std::uint64_t loads = 0;  // loader invocations (one per miss, single-flight)
  double hit_ratio() const {
    const auto total = hits + misses;
    return total == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(total);
  }
};

// Strict-LRU cache of deserialized models keyed by (model_id, version).
// Concurrent misses on one key trigger a single load; the other callers
// wait for it. Loader failures are not cached and surface as
// ModelUnavailable.
class ModelCache {
 public:
  using Loader = std::function<models::ModelPtr(const std::string& model_id, int version)>;

  ModelCache(std::size_t capacity, Loader loader);

  models::ModelPtr Get(const std::string& model_id, int version);
  // Same, loading a miss with `loader` instead of the default.
  models::ModelPtr Get(const std::string& model_id, int version, const Loader& loader);
  bool Contains(const std::string& model_id, int version) const;
  std::size_t size() const;
  std::size_t capacity() const { return capacity_; }
  CacheStats stats() const;
  void ResetStats();

 private:
  using Key = std::pair<std::string, int>;
  struct Slot {
    models::ModelPtr model;
    std::list<Key>::iterator lru;
    std::uint64_t last_used = 0;
  };
  struct InFlight {
    bool done = false;
    models::ModelPtr model;
    std::exception_ptr error;
  };

  void Touch(Slot& slot, const Key& key);

  const std::size_t capacity_;
  Loader loader_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::map<Key, Slot> slots_;
  std::list<Key> order_;  // front = most recent
  std::map<Key, std::shared_ptr<InFlight>> inflight_;
  std::uint64_t clock_ = 0;
  CacheStats stats_;
};

}  // namespace tickwatch::orchestrator
