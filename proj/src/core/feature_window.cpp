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

#include "tickwatch/core/feature_window.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "tickwatch/core/error.hpp"

namespace tickwatch {

std::vector<double> Matrix::column(std::size_t c) const {
  std::vector<double> out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
  return out;
}

void Matrix::AppendRow(std::span<const double> values) {
  if (rows_ == 0 && cols_ == 0) cols_ = values.size();
  if (values.size() != cols_) Fail(ErrorCode::kInvalidInput, "row width mismatch");
  data_.insert(data_.end(), values.begin(), values.end());
  ++rows_;
}

FeatureWindow::FeatureWindow(std::vector<std::string> signal_ids,
                             std::vector<std::int64_t> ts, Matrix values,
                             std::int64_t step_ms)
    : signal_ids_(std::move(signal_ids)),
      ts_(std::move(ts)),
      values_(std::move(values)),
      step_ms_(step_ms) {
  if (ts_.empty()) Fail(ErrorCode::kInvalidInput, "empty feature window");
  if (values_.rows() != ts_.size() || values_.cols() != signal_ids_.size()) {
    Fail(ErrorCode::kInvalidInput, "feature window shape mismatch");
  }
  if (signal_ids_.empty()) Fail(ErrorCode::kInvalidInput, "feature window without signals");
  if (step_ms_ <= 0) Fail(ErrorCode::kInvalidInput, "step_ms must be positive");
  for (std::size_t i = 1; i < ts_.size(); ++i) {
    if (ts_[i] <= ts_[i - 1]) {
      Fail(ErrorCode::kInvalidInput, "timestamps must be strictly increasing");
    }
  }
  for (double v : values_.data()) {
    if (!std::isfinite(v)) Fail(ErrorCode::kInvalidInput, "non-finite feature value");
  }
}

FeatureWindow FeatureWindow::FromSeries(const SeriesWindow& series) {
  std::vector<std::int64_t> ts;
  Matrix values(series.size(), 1);
  ts.reserve(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) {
    ts.push_back(series.points()[i].ts);
    values(i, 0) = series.points()[i].value;
  }
  return FeatureWindow({series.signal_id()}, std::move(ts), std::move(values),
                       series.step_ms());
}

FeatureWindow FeatureWindow::Align(std::span<const SeriesWindow> series) {
  if (series.empty()) Fail(ErrorCode::kInvalidInput, "no series to align");
  if (series.size() == 1) return FromSeries(series[0]);
  std::map<std::int64_t, std::vector<double>> joined;
  for (const TimePoint& p : series[0].points()) joined[p.ts] = {p.value};
  for (std::size_t s = 1; s < series.size(); ++s) {
    std::map<std::int64_t, double> lookup;
    for (const TimePoint& p : series[s].points()) lookup[p.ts] = p.value;
    for (auto it = joined.begin(); it != joined.end();) {
      auto found = lookup.find(it->first);
      if (found == lookup.end()) {
        it = joined.erase(it);
      } else {
        it->second.push_back(found->second);
        ++it;
      }
    }
  }
  if (joined.empty()) {
    Fail(ErrorCode::kInsufficientData, "signals share no common timestamps");
  }
  std::vector<std::string> ids;
  for (const SeriesWindow& s : series) ids.push_back(s.signal_id());
  std::vector<std::int64_t> ts;
  Matrix values;
  for (const auto& [t, row] : joined) {
    ts.push_back(t);
    values.AppendRow(row);
  }
  return FeatureWindow(std::move(ids), std::move(ts), std::move(values),
                       series[0].step_ms());
}

SeriesWindow FeatureWindow::Column(std::size_t c) const {
  std::vector<TimePoint> points;
  points.reserve(ts_.size());
  for (std::size_t i = 0; i < ts_.size(); ++i) points.push_back({ts_[i], values_(i, c)});
  return SeriesWindow(signal_ids_.at(c), std::move(points), step_ms_);
}

FeatureWindow FeatureWindow::Tail(std::size_t count) const {
  if (count >= ts_.size()) return *this;
  const std::size_t start = ts_.size() - count;
  Matrix values;
  for (std::size_t r = start; r < ts_.size(); ++r) values.AppendRow(values_.row(r));
  return FeatureWindow(signal_ids_,
                       std::vector<std::int64_t>(ts_.begin() + static_cast<std::ptrdiff_t>(start),
                                                 ts_.end()),
                       std::move(values), step_ms_);
}

}  // namespace tickwatch
