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
#include <map>
#include <string>
#include <vector>

namespace tickwatch::orchestrator {

struct Assignment {
  std::uint64_t tick_id = 0;
  std::uint64_t term = 0;
  std::map<std::string, std::vector<std::string>> shards;  // worker -> model ids

  friend bool operator==(const Assignment&, const Assignment&) = default;
};

// Rendezvous (highest random weight) score of a model on a worker.
std::uint64_t RendezvousWeight(const std::string& model_id, const std::string& worker);

// Assigns each model to the worker with the highest rendezvous weight. The
// leader gets no shard while any worker is live; with none it becomes the
// sole worker. Shard contents keep the input model order.
Assignment PartitionModels(const std::vector<std::string>& model_ids,
                           const std::vector<std::string>& live_workers,
                           const std::string& leader_id, std::uint64_t tick_id = 0,
                           std::uint64_t term = 0);

}  // namespace tickwatch::orchestrator
