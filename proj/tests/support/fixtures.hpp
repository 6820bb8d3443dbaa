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

#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "tickwatch/core/error.hpp"
#include "tickwatch/orchestrator/metric_store.hpp"
#include "tickwatch/orchestrator/train.hpp"
#include "tickwatch/registry/registry.hpp"

namespace tickwatch::testing {

inline constexpr std::int64_t kMinute = 60'000;
inline constexpr std::int64_t kDay = 86'400'000;
inline constexpr std::int64_t kEpoch = 1'700'000'000'000 / kDay * kDay;  // UTC midnight

inline ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kInternal;
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag = "tickwatch_test") {
    static int n = 0;
    path_ = std::filesystem::temp_directory_path() /
            (tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(n++));
    std::filesystem::remove_all(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

// Level + daily sine + N(0, noise) on a minutely grid.
inline std::vector<TimePoint> SeasonalSeries(std::int64_t start, std::size_t n, std::uint64_t seed,
                                             double level = 10.0, double amplitude = 3.0,
                                             double noise = 0.3) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> eps(0.0, noise);
  std::vector<TimePoint> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::int64_t ts = start + static_cast<std::int64_t>(i) * kMinute;
    const double phase = 2.0 * M_PI * static_cast<double>((ts / kMinute) % 1440) / 1440.0;
    out.push_back({ts, level + amplitude * std::sin(phase) + eps(rng)});
  }
  return out;
}

// Registry + metric store pair with signals backed by synthetic history.
struct Sandbox {
  registry::Registry registry;
  orchestrator::MetricStore metrics;
  std::int64_t now = kEpoch + 21 * kDay;

  explicit Sandbox(std::filesystem::path root = {}) : registry(std::move(root)) {}

  // Registers `name` with selector name{src="test"}, appends `points` to the
  // store and snapshots it.
  std::string AddSignal(const std::string& name, const std::vector<TimePoint>& points) {
    const std::string query = name + "{src=\"test\"}";
    metrics.AppendSeries(name, {{"src", "test"}}, points);
    const auto signal = registry.RegisterSignal(name, query, now);
    registry.SnapshotSignal(signal.signal_id, metrics, now);
    return signal.signal_id;
  }

  registry::ModelRecord TrainArima(const std::string& signal_id,
                                   detection::DetectorSpec spec = {},
                                   nlohmann::json params = {{"order", {{"p", 1}, {"d", 0}, {"q", 0}}}}) {
    orchestrator::TrainRequest req;
    req.model_type = "arima_uv";
    req.signal_ids = {signal_id};
    req.spec = spec;
    req.params = std::move(params);
    req.register_model = true;
    return *orchestrator::RunTrainJob(registry, req, now).record;
  }
};

}  // namespace tickwatch::testing
