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

#include "tickwatch/orchestrator/metric_store.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include "tickwatch/core/error.hpp"
#include "tickwatch/registry/dataset.hpp"

namespace tickwatch::orchestrator {

MetricStore::Series& MetricStore::SeriesFor(const std::string& name,
                                            const std::map<std::string, std::string>& labels) {
  if (name.empty()) Fail(ErrorCode::kInvalidInput, "metric name is empty");
  const std::string key = registry::FormatSeriesKey(name, labels);
  auto [it, inserted] = series_.try_emplace(key);
  if (inserted) {
    it->second.name = name;
    it->second.labels = labels;
  }
  return it->second;
}

void MetricStore::AppendLocked(Series& s, std::int64_t ts, double value) {
  if (!std::isfinite(value)) Fail(ErrorCode::kInvalidInput, "non-finite sample value");
  if (!s.points.empty() && ts <= s.points.back().ts) {
    Fail(ErrorCode::kInvalidInput, "sample ts " + std::to_string(ts) +
                                       " not after " + std::to_string(s.points.back().ts));
  }
  s.points.push_back({ts, value});
  ++s.appended;
  if (retention_ms_ > 0) {
    const std::int64_t cutoff = ts - retention_ms_;
    if (s.points.front().ts < cutoff) {
      auto first = std::lower_bound(s.points.begin(), s.points.end(), cutoff,
                                    [](const TimePoint& p, std::int64_t t) { return p.ts < t; });
      s.points.erase(s.points.begin(), first);
    }
  }
}

void MetricStore::Append(const MetricSample& sample) {
  std::unique_lock lock(mu_);
  AppendLocked(SeriesFor(sample.metric_name, sample.labels), sample.ts, sample.value);
}

void MetricStore::AppendSeries(const std::string& metric_name,
                               const std::map<std::string, std::string>& labels,
                               const std::vector<TimePoint>& points) {
  std::unique_lock lock(mu_);
  Series& s = SeriesFor(metric_name, labels);
  for (const TimePoint& p : points) AppendLocked(s, p.ts, p.value);
}

std::vector<RangeSeries> MetricStore::QueryRange(const std::string& selector, std::int64_t start,
                                                 std::int64_t end, std::int64_t step) const {
  return QueryRange(registry::ParseSelector(selector), start, end, step);
}

std::vector<RangeSeries> MetricStore::QueryRange(const registry::Selector& selector,
                                                 std::int64_t start, std::int64_t end,
                                                 std::int64_t step) const {
  if (start > end) Fail(ErrorCode::kInvalidQuery, "range start after end");
  if (step < 0) Fail(ErrorCode::kInvalidQuery, "negative step");
  std::shared_lock lock(mu_);
  std::vector<RangeSeries> out;
  for (const auto& [key, s] : series_) {
    if (!selector.Matches(s.name, s.labels)) continue;
    RangeSeries r{s.name, s.labels, {}};
    auto lo = std::lower_bound(s.points.begin(), s.points.end(), start,
                               [](const TimePoint& p, std::int64_t t) { return p.ts < t; });
    for (auto it = lo; it != s.points.end() && it->ts <= end; ++it) {
      if (step > 0 && !r.points.empty() &&
          (r.points.back().ts - start) / step == (it->ts - start) / step) {
        r.points.back() = *it;
      } else {
        r.points.push_back(*it);
      }
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::string MetricStore::RenderExposition(std::int64_t now) const {
  std::shared_lock lock(mu_);
  std::vector<const Series*> live;
  for (const auto& [key, s] : series_) {
    if (!s.points.empty() && s.points.back().ts >= now - kStalenessMs) live.push_back(&s);
  }
  std::sort(live.begin(), live.end(), [](const Series* a, const Series* b) {
    return a->name != b->name ? a->name < b->name : a->labels < b->labels;
  });
  std::string out;
  for (const Series* s : live) {
    out += registry::FormatSeriesKey(s->name, s->labels);
    out += ' ';
    out += registry::FormatDouble(s->points.back().value);
    out += ' ';
    out += std::to_string(s->points.back().ts);
    out += '\n';
  }
  return out;
}

std::vector<TimePoint> MetricStore::FetchSeries(const registry::Selector& selector,
                                                std::int64_t start, std::int64_t end) const {
  auto matches = QueryRange(selector, start, end, 0);
  if (matches.empty()) {
    Fail(ErrorCode::kSourceUnavailable, "no series matches " + selector.ToString());
  }
  if (matches.size() > 1) {
    Fail(ErrorCode::kInvalidQuery, std::to_string(matches.size()) + " series match " +
                                       selector.ToString() + "; add label matchers");
  }
  return std::move(matches.front().points);
}

std::size_t MetricStore::series_count() const {
  std::shared_lock lock(mu_);
  return series_.size();
}

std::size_t MetricStore::sample_count() const {
  std::shared_lock lock(mu_);
  std::size_t n = 0;
  for (const auto& [key, s] : series_) n += s.points.size();
  return n;
}

std::size_t MetricStore::appended(const std::string& metric_name,
                                  const std::map<std::string, std::string>& labels) const {
  std::shared_lock lock(mu_);
  auto it = series_.find(registry::FormatSeriesKey(metric_name, labels));
  return it == series_.end() ? 0 : it->second.appended;
}

}  // namespace tickwatch::orchestrator
