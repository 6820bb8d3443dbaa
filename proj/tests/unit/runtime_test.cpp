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

#include <gtest/gtest.h>

#include <chrono>
#include <map>
#include <memory>
#include <sstream>
#include <thread>

#include "fixtures.hpp"
#include "tickwatch/orchestrator/election_driver.hpp"
#include "tickwatch/runtime/harness.hpp"

namespace tickwatch::runtime {
namespace {

using namespace std::chrono_literals;
using orchestrator::ElectionDriver;
using testing::CodeOf;
using testing::kEpoch;
using testing::kMinute;

// 8 days of a daily wave; the last day carries planted 4-row spikes.
std::string LabeledCsv(std::size_t* planted = nullptr) {
  const std::size_t n = 8 * 1440;
  const auto points = testing::SeasonalSeries(kEpoch, n, 42);
  std::vector<int> labels(n, 0);
  std::vector<double> values;
  for (const auto& p : points) values.push_back(p.value);
  std::size_t count = 0;
  for (std::size_t i = 7 * 1440 + 100; i + 4 < n; i += 150) {
    for (std::size_t j = 0; j < 4; ++j) {
      values[i + j] += 8.0;
      labels[i + j] = 1;
    }
    ++count;
  }
  if (planted) *planted = count;
  std::ostringstream out;
  out << "ts_ms,cpu,label\n";
  for (std::size_t i = 0; i < n; ++i) out << points[i].ts << ',' << values[i] << ',' << labels[i] << '\n';
  return out.str();
}

TEST(Replay, BalancedAccuracyMatchesIndependentOracle) {
  std::size_t planted = 0;
  const std::string csv = LabeledCsv(&planted);
  ReplayOptions options;
  options.train_rows = 7 * 1440;
  options.params = {{"order", {{"p", 1}, {"d", 0}, {"q", 0}}}, {"seasonality_period", 1440}};
  options.spec.seasonality_period = 1440;
  options.spec.hold_window = 3;
  options.spec.hold_tolerance = 1;
  std::size_t observed = 0;
  const auto result = RunReplay(csv, options, [&](const orchestrator::TickReport& report, const ReplayRow&) {
    ++observed;
    EXPECT_EQ(report.models_total, 1u);
  });
  ASSERT_EQ(result.rows.size(), 1440u);
  EXPECT_EQ(observed, 1440u);
  EXPECT_EQ(result.skipped_ticks, 0u);
  EXPECT_EQ(result.failed_ticks, 0u);
  ASSERT_TRUE(result.confusion.has_value());

  double tp = 0, fp = 0, tn = 0, fn = 0;
  for (const auto& row : result.rows) {
    ASSERT_TRUE(row.label.has_value());
    if (row.predicted && *row.label) ++tp;
    if (row.predicted && !*row.label) ++fp;
    if (!row.predicted && !*row.label) ++tn;
    if (!row.predicted && *row.label) ++fn;
  }
  const double oracle_ba = 0.5 * (tp / (tp + fn) + tn / (tn + fp));
  EXPECT_DOUBLE_EQ(result.confusion->balanced_accuracy(), oracle_ba);
  const auto j = ReplayResultToJson(result);
  EXPECT_DOUBLE_EQ(j.at("balanced_accuracy").get<double>(), oracle_ba);
  EXPECT_EQ(j.at("anomalies").get<double>(), tp + fp);
  EXPECT_EQ(tp + fn, 4.0 * static_cast<double>(planted));
  // With the daily profile removed the spikes stand far outside the boundary.
  EXPECT_GT(oracle_ba, 0.8);
}

TEST(Replay, RejectsBadInput) {
  EXPECT_EQ(CodeOf([] { RunReplay("ts_ms,cpu,label\n1,2,3\n2,2,0\n", {}); }), ErrorCode::kInvalidInput);
  EXPECT_EQ(CodeOf([] { RunReplay("1,2\n2,3\n3,4\n", {}); }), ErrorCode::kInsufficientData);
}

TEST(Bench, WarmCacheServesEveryModel) {
  BenchOptions options;
  options.models = 40;
  options.signals = 4;
  options.workers = 2;
  options.ticks = 2;
  const auto r = RunBench(options);
  ASSERT_EQ(r.tick_ms.size(), 2u);
  for (auto c : r.completed) EXPECT_EQ(c, 40u);
  EXPECT_EQ(r.cache.misses, 0u);
  EXPECT_EQ(r.cache.hits, 80u);
  EXPECT_DOUBLE_EQ(r.cache.hit_ratio(), 1.0);
  EXPECT_EQ(BenchResultToJson(r).at("cache").at("hit_ratio"), 1.0);
}

TEST(Chaos, SeededRunsFailOverCleanly) {
  ChaosFixture fixture(4);
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    ChaosOptions options;
    options.seed = seed;
    options.nodes = 3 + static_cast<int>(seed % 3);
    options.loss = 0.05 * static_cast<double>(seed % 3);
    const auto r = RunChaos(options, fixture);
    EXPECT_TRUE(r.safety_ok) << seed;
    EXPECT_TRUE(r.reelected_in_bound()) << seed << " " << r.reelection_s;
    EXPECT_NE(r.new_leader, r.old_leader) << seed;
    EXPECT_GT(r.new_term, r.old_term) << seed;
    EXPECT_EQ(r.published_once, 4u) << seed;
    EXPECT_TRUE(r.passed()) << ChaosResultToJson(r).dump();
  }
}

TEST(Chaos, SameSeedSameOutcome) {
  ChaosFixture a(2), b(2);
  ChaosOptions options;
  options.seed = 99;
  options.nodes = 5;
  options.loss = 0.1;
  const auto ra = RunChaos(options, a);
  const auto rb = RunChaos(options, b);
  EXPECT_EQ(ra.old_leader, rb.old_leader);
  EXPECT_EQ(ra.new_leader, rb.new_leader);
  EXPECT_DOUBLE_EQ(ra.reelection_s, rb.reelection_s);
}

// Three drivers on the in-process bus with a 150 ms timeout.
struct LiveCluster {
  orchestrator::InProcessBus bus{5};
  std::map<std::string, std::unique_ptr<ElectionDriver>> nodes;

  LiveCluster() {
    const std::vector<std::string> ids{"a", "b", "c"};
    for (const auto& id : ids) {
      std::vector<std::string> peers;
      for (const auto& p : ids) {
        if (p != id) peers.push_back(p);
      }
      nodes[id] = std::make_unique<ElectionDriver>(id, peers, bus, 150ms, 11);
      auto* driver = nodes[id].get();
      bus.Listen(id, [driver](const orchestrator::Envelope& e) { return driver->Handle(e); });
    }
    for (auto& [id, n] : nodes) n->Start();
  }

  std::vector<std::string> Leaders() const {
    std::vector<std::string> out;
    for (const auto& [id, n] : nodes) {
      if (n->is_leader()) out.push_back(id);
    }
    return out;
  }

  std::optional<std::string> WaitForLeader(std::chrono::milliseconds limit, const std::string& exclude = {}) {
    const auto deadline = std::chrono::steady_clock::now() + limit;
    while (std::chrono::steady_clock::now() < deadline) {
      for (const auto& id : Leaders()) {
        if (id != exclude) return id;
      }
      std::this_thread::sleep_for(5ms);
    }
    return std::nullopt;
  }
};

TEST(ElectionDriver, ElectsAndFailsOverOnWallClock) {
  LiveCluster cluster;
  const auto first = cluster.WaitForLeader(3s);
  ASSERT_TRUE(first.has_value());
  std::this_thread::sleep_for(300ms);
  EXPECT_EQ(cluster.Leaders().size(), 1u);
  for (const auto& [id, n] : cluster.nodes) {
    if (id != *first) EXPECT_EQ(n->leader(), first);
  }

  const auto killed_at = std::chrono::steady_clock::now();
  cluster.nodes.at(*first)->Stop();
  cluster.bus.SetDown(*first, true);
  const auto second = cluster.WaitForLeader(1500ms, *first);  // 10 T
  ASSERT_TRUE(second.has_value());
  EXPECT_LT(std::chrono::steady_clock::now() - killed_at, 1500ms);
  EXPECT_GT(cluster.nodes.at(*second)->state().current_term, cluster.nodes.at(*first)->state().current_term);
  for (auto& [id, n] : cluster.nodes) n->Stop();
}

}  // namespace
}  // namespace tickwatch::runtime
