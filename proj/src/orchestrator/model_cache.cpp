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

#include "tickwatch/orchestrator/model_cache.hpp"

#include "tickwatch/core/error.hpp"

namespace tickwatch::orchestrator {

ModelCache::ModelCache(std::size_t capacity, Loader loader)
    : capacity_(capacity), loader_(std::move(loader)) {
  if (capacity_ == 0) Fail(ErrorCode::kInvalidInput, "cache capacity must be positive");
}

void ModelCache::Touch(Slot& slot, const Key& key) {
  order_.erase(slot.lru);
  order_.push_front(key);
  slot.lru = order_.begin();
  slot.last_used = ++clock_;
}

models::ModelPtr ModelCache::Get(const std::string& model_id, int version) {
  return Get(model_id, version, loader_);
}

models::ModelPtr ModelCache::Get(const std::string& model_id, int version, const Loader& loader) {
  const Key key{model_id, version};
  std::unique_lock lock(mu_);
  if (auto it = slots_.find(key); it != slots_.end()) {
    ++stats_.hits;
    Touch(it->second, key);
    return it->second.model;
  }
  ++stats_.misses;
  if (auto it = inflight_.find(key); it != inflight_.end()) {
    const auto flight = it->second;
    cv_.wait(lock, [&] { return flight->done; });
    if (flight->error) std::rethrow_exception(flight->error);
    return flight->model;
  }
  auto flight = std::make_shared<InFlight>();
  inflight_[key] = flight;
  ++stats_.loads;
  lock.unlock();

  models::ModelPtr model;
  std::exception_ptr error;
  try {
    model = loader(model_id, version);
    if (!model) Fail(ErrorCode::kModelUnavailable, "loader returned no model");
  } catch (const Error& e) {
    error = std::make_exception_ptr(
        e.code() == ErrorCode::kModelUnavailable
            ? e
            : Error(ErrorCode::kModelUnavailable, model_id + " v" + std::to_string(version) + ": " + e.what()));
  } catch (const std::exception& e) {
    error = std::make_exception_ptr(Error(ErrorCode::kModelUnavailable, e.what()));
  }

  lock.lock();
  flight->done = true;
  flight->model = model;
  flight->error = error;
  inflight_.erase(key);
  if (!error) {
    if (slots_.size() >= capacity_) {
      const Key victim = order_.back();
      order_.pop_back();
      slots_.erase(victim);
      ++stats_.evictions;
    }
    order_.push_front(key);
    slots_[key] = Slot{model, order_.begin(), ++clock_};
  }
  cv_.notify_all();
  if (error) std::rethrow_exception(error);
  return model;
}

bool ModelCache::Contains(const std::string& model_id, int version) const {
  std::lock_guard lock(mu_);
  return slots_.count({model_id, version}) > 0;
}

std::size_t ModelCache::size() const {
  std::lock_guard lock(mu_);
  return slots_.size();
}

CacheStats ModelCache::stats() const {
  std::lock_guard lock(mu_);
  return stats_;
}

void ModelCache::ResetStats() {
  std::lock_guard lock(mu_);
  stats_ = CacheStats{};
}

}  // namespace tickwatch::orchestrator
