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
#include <shared_mutex>
#include <string>
#include <vector>

#include "tickwatch/core/timeseries.hpp"
#include "tickwatch/registry/registry.hpp"
#include "tickwatch/registry/selector.hpp"

namespace tickwatch::orchestrator {

struct MetricSample {
  std::string metric_name;
  std::map<std::string, std::string> labels;
  std::int64_t ts = 0;
  double value = 0.0;
};

struct RangeSeries {
  std::string metric_name;
  std::map<std::string, std::string> labels;
  std::vector<TimePoint> points;
};

// Exposition skips series whose newest sample is older than this.
inline constexpr std::int64_t kStalenessMs = 15 * 60'000;

// Embedded in-memory time series store. Each series keeps its samples in
// strictly increasing timestamp order; appends out of order are rejected
// with InvalidInput. Optional retention drops samples older than
// newest - retention_ms per series.
class MetricStore : public registry::MetricSource {
 public:
  explicit MetricStore(std::int64_t retention_ms = 0) : retention_ms_(retention_ms) {}

  void Append(const MetricSample& sample);
  void AppendSeries(const std::string& metric_name,
                    const std::map<std::string, std::string>& labels,
                    const std::vector<TimePoint>& points);

  // Per matching series, samples in [start, end] bucketed by `step` from
  // start; each bucket keeps its last sample. step == 0 returns raw samples.
  std::vector<RangeSeries> QueryRange(const std::string& selector, std::int64_t start,
                                      std::int64_t end, std::int64_t step = 0) const;
  std::vector<RangeSeries> QueryRange(const registry::Selector& selector, std::int64_t start,
                                      std::int64_t end, std::int64_t step = 0) const;

  // Latest sample of every live series, `name{k="v",...} value ts` per line,
  // sorted by name then labels.
  std::string RenderExposition(std::int64_t now) const;

  // MetricSource: exactly one series must match.
  std::vector<TimePoint> FetchSeries(const registry::Selector& selector, std::int64_t start,
                                     std::int64_t end) const override;

  std::size_t series_count() const;
  std::size_t sample_count() const;
  // Total samples ever appended for the series, retention aside.
  std::size_t appended(const std::string& metric_name,
                       const std::map<std::string, std::string>& labels) const;

 private:
  struct Series {
    std::string name;
    std::map<std::string, std::string> labels;
    std::vector<TimePoint> points;
    std::size_t appended = 0;
  };

  void AppendLocked(Series& s, std::int64_t ts, double value);
  Series& SeriesFor(const std::string& name, const std::map<std::string, std::string>& labels);

  const std::int64_t retention_ms_;
  mutable std::shared_mutex mu_;
  std::map<std::string, Series> series_;  // key: canonical series key
};

}  // namespace tickwatch::orchestrator
