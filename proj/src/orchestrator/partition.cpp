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

#include "tickwatch/orchestrator/partition.hpp"

#include <algorithm>

namespace tickwatch::orchestrator {
namespace {

std::uint64_t Fnv1a(const std::string& s, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t Finalize(std::uint64_t x) {
  x ^= x >> 33;
  x *= 0xff51afd7ed558ccdULL;
  x ^= x >> 33;
  x *= 0xc4ceb9fe1a85ec53ULL;
  return x ^ (x >> 33);
}

}  // namespace

std::uint64_t RendezvousWeight(const std::string& model_id, const std::string& worker) {
  return Finalize(Fnv1a(worker, Fnv1a(model_id) ^ 0x5bd1e995ULL));
}

Assignment PartitionModels(const std::vector<std::string>& model_ids,
                           const std::vector<std::string>& live_workers,
                           const std::string& leader_id, std::uint64_t tick_id,
                           std::uint64_t term) {
  Assignment a;
  a.tick_id = tick_id;
  a.term = term;
  std::vector<std::string> workers;
  for (const auto& w : live_workers) {
    if (w != leader_id) workers.push_back(w);
  }
  std::sort(workers.begin(), workers.end());
  workers.erase(std::unique(workers.begin(), workers.end()), workers.end());
  if (workers.empty()) workers.push_back(leader_id);
  if (model_ids.empty()) return a;
  for (const auto& w : workers) a.shards[w];
  for (const auto& m : model_ids) {
    const std::string* best = &workers.front();
    std::uint64_t best_w = RendezvousWeight(m, *best);
    for (std::size_t i = 1; i < workers.size(); ++i) {
      const std::uint64_t w = RendezvousWeight(m, workers[i]);
      if (w > best_w || (w == best_w && workers[i] < *best)) {
        best = &workers[i];
        best_w = w;
      }
    }
    a.shards[*best].push_back(m);
  }
  return a;
}

}  // namespace tickwatch::orchestrator
