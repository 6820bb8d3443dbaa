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

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <set>
#include <thread>

#include <gtest/gtest.h>

#include "scripted_model.hpp"
#include "tickwatch/core/error.hpp"
#include "tickwatch/orchestrator/metric_store.hpp"
#include "tickwatch/orchestrator/model_cache.hpp"
#include "tickwatch/orchestrator/partition.hpp"

namespace tickwatch::orchestrator {
namespace {

std::vector<std::string> Ids(const char* prefix, int n) {
  std::vector<std::string> out;
  for (int i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

std::map<std::string, std::string> OwnerMap(const Assignment& a) {
  std::map<std::string, std::string> owner;
  for (const auto& [w, models] : a.shards) {
    for (const auto& m : models) owner[m] = w;
  }
  return owner;
}

TEST(Partition, ShardsAreDisjointAndCoverEveryModel) {
  const auto models = Ids("mdl-", 10);
  const auto a = PartitionModels(models, {"node-1", "node-2"}, "node-0");
  std::multiset<std::string> seen;
  for (const auto& [w, ms] : a.shards) seen.insert(ms.begin(), ms.end());
  EXPECT_EQ(seen.size(), 10u);
  EXPECT_EQ(std::set<std::string>(seen.begin(), seen.end()).size(), 10u);
  EXPECT_EQ(a.shards.count("node-0"), 0u);
  EXPECT_EQ(a, PartitionModels(models, {"node-1", "node-2"}, "node-0"));
}

TEST(Partition, EmptyModelListAndDegradedMode) {
  EXPECT_TRUE(PartitionModels({}, {"node-1"}, "node-0").shards.empty());
  const auto a = PartitionModels(Ids("m", 5), {"node-0"}, "node-0");
  ASSERT_EQ(a.shards.size(), 1u);
  EXPECT_EQ(a.shards.at("node-0").size(), 5u);
  EXPECT_EQ(PartitionModels(Ids("m", 5), {}, "node-0").shards.at("node-0").size(), 5u);
}

TEST(Partition, MatchesBruteForceArgmax) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const int w = 1 + static_cast<int>(rng() % 6);
    const auto workers = Ids("w", w);
    const auto models = Ids("model-", 1 + static_cast<int>(rng() % 60));
    const auto owner = OwnerMap(PartitionModels(models, workers, "leader"));
    for (const auto& m : models) {
      std::string best;
      std::uint64_t best_w = 0;
      for (const auto& wk : workers) {
        const auto score = RendezvousWeight(m, wk);
        if (best.empty() || score > best_w) {
          best = wk;
          best_w = score;
        }
      }
      ASSERT_EQ(owner.at(m), best);
    }
  }
}

TEST(Partition, RemovingAWorkerMovesOnlyItsModels) {
  const auto models = Ids("mdl-", 500);
  for (int dead = 0; dead < 3; ++dead) {
    const std::vector<std::string> all{"w0", "w1", "w2"};
    std::vector<std::string> alive;
    for (int i = 0; i < 3; ++i) {
      if (i != dead) alive.push_back(all[i]);
    }
    const auto before = OwnerMap(PartitionModels(models, all, "leader"));
    const auto after = OwnerMap(PartitionModels(models, alive, "leader"));
    for (const auto& m : models) {
      if (before.at(m) != all[dead]) EXPECT_EQ(before.at(m), after.at(m)) << m;
    }
  }
}

TEST(Partition, AddingAWorkerHasBoundedChurn) {
  const int n = 1000;
  const auto models = Ids("mdl-", n);
  for (int w = 1; w <= 8; ++w) {
    const auto before = OwnerMap(PartitionModels(models, Ids("w", w), "leader"));
    const auto after = OwnerMap(PartitionModels(models, Ids("w", w + 1), "leader"));
    int moved = 0;
    for (const auto& m : models) {
      if (before.at(m) != after.at(m)) {
        ++moved;
        EXPECT_EQ(after.at(m), "w" + std::to_string(w));  // only onto the newcomer
      }
    }
    const double expected = static_cast<double>(n) / (w + 1);
    EXPECT_LE(moved, std::ceil(expected) + 4 * std::sqrt(expected)) << "w=" << w;
  }
}

models::ModelPtr Dummy() {
  return std::make_shared<testing::ScriptedModel>(1, Boundary{-1, 1});
}

TEST(ModelCache, LruTraceEvictsLeastRecent) {
  std::vector<std::string> loads;
  ModelCache cache(2, [&](const std::string& id, int v) {
    loads.push_back(id + std::to_string(v));
    return Dummy();
  });
  cache.Get("A", 1);
  cache.Get("B", 1);
  cache.Get("A", 1);
  cache.Get("C", 1);
  EXPECT_TRUE(cache.Contains("A", 1));
  EXPECT_FALSE(cache.Contains("B", 1));
  EXPECT_TRUE(cache.Contains("C", 1));
  EXPECT_EQ(cache.stats().evictions, 1u);
  EXPECT_EQ(loads, (std::vector<std::string>{"A1", "B1", "C1"}));
}

TEST(ModelCache, HitsDoNotReload) {
  int loads = 0;
  ModelCache cache(4, [&](const std::string&, int) {
    ++loads;
    return Dummy();
  });
  const auto first = cache.Get("A", 1);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(cache.Get("A", 1), first);
  EXPECT_EQ(loads, 1);
  EXPECT_EQ(cache.stats().hits, 10u);
}

TEST(ModelCache, VersionIsPartOfTheKey) {
  int loads = 0;
  ModelCache cache(4, [&](const std::string&, int) {
    ++loads;
    return Dummy();
  });
  cache.Get("A", 1);
  cache.Get("A", 2);
  EXPECT_EQ(loads, 2);
  EXPECT_TRUE(cache.Contains("A", 1));
  EXPECT_TRUE(cache.Contains("A", 2));
}

TEST(ModelCache, LoaderFailureIsModelUnavailableAndNotCached) {
  int loads = 0;
  ModelCache cache(2, [&](const std::string&, int) -> models::ModelPtr {
    ++loads;
    Fail(ErrorCode::kNotFound, "artifact missing");
  });
  for (int i = 0; i < 2; ++i) {
    try {
      cache.Get("A", 1);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kModelUnavailable);
    }
  }
  EXPECT_EQ(loads, 2);
  EXPECT_EQ(cache.size(), 0u);
}

TEST(ModelCache, ConcurrentMissesLoadOnce) {
  std::atomic<int> loads{0};
  ModelCache cache(8, [&](const std::string&, int) {
    ++loads;
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
    return Dummy();
  });
  std::vector<std::thread> threads;
  std::vector<models::ModelPtr> got(8);
  for (int i = 0; i < 8; ++i) {
    threads.emplace_back([&, i] { got[i] = cache.Get("hot", 3); });
  }
  for (auto& t : threads) t.join();
  EXPECT_EQ(loads.load(), 1);
  for (const auto& m : got) EXPECT_EQ(m, got[0]);
}

TEST(ModelCache, NeverExceedsCapacityAndStaysLru) {
  std::mt19937_64 rng(11);
  ModelCache cache(16, [](const std::string&, int) { return Dummy(); });
  std::vector<std::string> oracle;  // front = most recent
  for (int i = 0; i < 5000; ++i) {
    const std::string id = "m" + std::to_string(rng() % 40);
    cache.Get(id, 1);
    oracle.erase(std::remove(oracle.begin(), oracle.end(), id), oracle.end());
    oracle.insert(oracle.begin(), id);
    if (oracle.size() > 16) oracle.pop_back();
    ASSERT_LE(cache.size(), 16u);
  }
  for (const auto& id : oracle) EXPECT_TRUE(cache.Contains(id, 1)) << id;
}

TEST(ModelCache, ZipfTraceWithinCapacityHitsAtLeast99Percent) {
  const int keys = 500;
  std::vector<double> weights(keys);
  for (int i = 0; i < keys; ++i) weights[i] = 1.0 / (i + 1);
  std::discrete_distribution<int> zipf(weights.begin(), weights.end());
  std::mt19937_64 rng(3);
  ModelCache cache(1024, [](const std::string&, int) { return Dummy(); });
  for (int i = 0; i < 100'000; ++i) cache.Get("m" + std::to_string(zipf(rng)), 1);
  EXPECT_GE(cache.stats().hit_ratio(), 0.99);
}

TEST(MetricStore, RangeReturnsEachSampleOnce) {
  MetricStore store;
  store.Append({"cpu", {{"host", "a"}}, 1000, 1.5});
  store.Append({"cpu", {{"host", "a"}}, 2000, 2.5});
  auto r = store.QueryRange("cpu{host=\"a\"}", 0, 5000);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].points, (std::vector<TimePoint>{{1000, 1.5}, {2000, 2.5}}));
  r = store.QueryRange("cpu", 3000, 4000);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_TRUE(r[0].points.empty());
}

TEST(MetricStore, StepKeepsLastValueInBucket) {
  MetricStore store;
  for (int t = 1; t <= 10; ++t) store.Append({"x", {}, t * 100, static_cast<double>(t)});
  const auto r = store.QueryRange("x", 100, 1000, 300);
  ASSERT_EQ(r.size(), 1u);
  // buckets [100,400) [400,700) [700,1000) [1000,...)
  EXPECT_EQ(r[0].points, (std::vector<TimePoint>{{300, 3}, {600, 6}, {900, 9}, {1000, 10}}));
}

TEST(MetricStore, RejectsOutOfOrderAndBadQueries) {
  MetricStore store;
  store.Append({"x", {}, 10, 1});
  EXPECT_THROW(store.Append({"x", {}, 10, 2}), Error);
  EXPECT_THROW(store.Append({"x", {}, 5, 2}), Error);
  try {
    store.QueryRange("x{", 0, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidQuery);
  }
  EXPECT_THROW(store.QueryRange("x", 2, 1), Error);
}

TEST(MetricStore, ExpositionSortedAndStalenessFiltered) {
  MetricStore store;
  store.Append({"b", {}, 1000, 1});
  store.Append({"a", {{"z", "2"}}, 1000, 0.5});
  store.Append({"a", {{"z", "1"}}, 1000, 0.25});
  store.Append({"old", {}, 1, 9});
  EXPECT_EQ(store.RenderExposition(1000 + kStalenessMs),
            "a{z=\"1\"} 0.25 1000\na{z=\"2\"} 0.5 1000\nb 1 1000\n");
}

TEST(MetricStore, FetchSeriesNeedsExactlyOneMatch) {
  MetricStore store;
  store.Append({"cpu", {{"host", "a"}}, 10, 1});
  store.Append({"cpu", {{"host", "b"}}, 10, 2});
  EXPECT_EQ(store.FetchSeries(registry::ParseSelector("cpu{host=\"b\"}"), 0, 100).size(), 1u);
  try {
    store.FetchSeries(registry::ParseSelector("cpu"), 0, 100);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidQuery);
  }
  EXPECT_THROW(store.FetchSeries(registry::ParseSelector("mem"), 0, 100), Error);
}

TEST(MetricStore, RetentionTrimsOldSamples) {
  MetricStore store(1000);
  for (int t = 1; t <= 50; ++t) store.Append({"x", {}, t * 100, 1});
  EXPECT_EQ(store.sample_count(), 11u);
  EXPECT_EQ(store.appended("x", {}), 50u);
}

}  // namespace
}  // namespace tickwatch::orchestrator
