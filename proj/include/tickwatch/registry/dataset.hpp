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
#include <string_view>
#include <vector>

#include "tickwatch/core/timeseries.hpp"

namespace tickwatch::registry {

inline constexpr std::int64_t kSnapshotHorizonMs = 21LL * 86'400'000;

// Signal dataset file:
//   {"signal_id":"...","start_ts":<ms>,"step_ms":<ms>}
//   <ts_ms>,<value>
//   ...
// The header is one line of compact JSON with sorted keys; rows ascend by
// timestamp and values use the shortest round-trip decimal form, so the
// same points always produce the same bytes.
struct Dataset {
  std::string signal_id;
  std::int64_t step_ms = 60'000;
  std::int64_t start_ts = 0;
  std::vector<TimePoint> points;

  std::int64_t span_ms() const {
    return points.empty() ? 0 : points.back().ts - points.front().ts;
  }
  // Shorter than the full snapshot horizon.
  bool is_short() const { return span_ms() < kSnapshotHorizonMs; }
  SeriesWindow ToWindow() const { return SeriesWindow(signal_id, points, step_ms); }
};

std::string WriteDataset(const Dataset& d);
// Throws InvalidInput naming the offending line.
Dataset ParseDataset(std::string_view text);

// CSV ingestion: `ts_ms,value` or `ts_ms,f1,...,fk` with an optional header
// row. Returns one column per feature.
struct CsvTable {
  std::vector<std::string> columns;  // feature names (from header or f1..fk)
  std::vector<std::int64_t> ts;
  std::vector<std::vector<double>> values;  // values[c][row]
};
CsvTable ParseCsv(std::string_view text);

// Shortest decimal text that parses back to exactly `v`.
std::string FormatDouble(double v);

}  // namespace tickwatch::registry
