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
#include <span>
#include <string>
#include <vector>

#include "tickwatch/core/timeseries.hpp"

namespace tickwatch {

// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::vector<double> column(std::size_t c) const;
  void AppendRow(std::span<const double> values);
  const std::vector<double>& data() const { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Several signals sampled on a shared timestamp grid; one row per timestamp,
// one column per signal. The univariate case is a single column.
class FeatureWindow {
 public:
  FeatureWindow(std::vector<std::string> signal_ids, std::vector<std::int64_t> ts,
                Matrix values, std::int64_t step_ms);

  static FeatureWindow FromSeries(const SeriesWindow& series);
  // Inner join on timestamps; throws InsufficientData when no timestamp is
  // shared by every input.
  static FeatureWindow Align(std::span<const SeriesWindow> series);

  const std::vector<std::string>& signal_ids() const { return signal_ids_; }
  const std::vector<std::int64_t>& ts() const { return ts_; }
  const Matrix& values() const { return values_; }
  std::int64_t step_ms() const { return step_ms_; }
  std::size_t size() const { return ts_.size(); }
  std::size_t feature_count() const { return values_.cols(); }

  SeriesWindow Column(std::size_t c) const;
  FeatureWindow Tail(std::size_t count) const;

 private:
  std::vector<std::string> signal_ids_;
  std::vector<std::int64_t> ts_;
  Matrix values_;
  std::int64_t step_ms_;
};

}  // namespace tickwatch
