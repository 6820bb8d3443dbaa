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
#include <string>
#include <vector>

#include "tickwatch/core/feature_window.hpp"

namespace tickwatch::eval {

// A synthetic series with point-wise ground truth. Rows [0, train_rows) are
// the training span and carry no positive labels; the rest is scored.
struct LabeledDataset {
  std::string name;
  FeatureWindow window;
  std::vector<int> labels;
  std::size_t train_rows = 0;
};

inline constexpr std::int64_t kBenchmarkStart = 1'699'920'000'000;  // a UTC midnight
inline constexpr std::int64_t kBenchmarkStep = 60'000;

// 21 days, one sample per minute. Daily shape: a morning and an evening
// peak plus a five-minute batch surge at the top of every hour, N(0, 1)
// noise. 40 point anomalies of magnitude 4..10 with random sign are placed
// in the last 7 days, at least 30 minutes apart. Training: first 14 days.
LabeledDataset SeasonalPointBenchmark(std::uint64_t seed);

inline constexpr int kBurstVariants = 4;

// Multivariate series (3 + variant signals, 8 days, minutely) driven by a
// shared daily factor. Training covers the first 3 days and is clean. The
// scored 5 days hold 8 sustained anomalies of 60 to 180 rows, each shifting
// a subset of signals past their normal range (labeled 1), and transient
// bursts of one or two rows on random subsets (labeled 0), at least 5 rows
// apart.
LabeledDataset BurstBenchmark(int variant, std::uint64_t seed);

// Dataset CSV: header `ts_ms,<signal>...[,label]`, one row per timestamp.
std::string DatasetToCsv(const LabeledDataset& dataset);

}  // namespace tickwatch::eval
