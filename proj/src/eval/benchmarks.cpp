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

#include "tickwatch/eval/benchmarks.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "tickwatch/core/error.hpp"

namespace tickwatch::eval {
namespace {

constexpr std::size_t kDayRows = 1440;

double Bump(double minute, double center, double width) {
  const double z = (minute - center) / width;
  return std::exp(-0.5 * z * z);
}

double DailyShape(std::size_t row) {
  const double m = static_cast<double>(row % kDayRows);
  double v = 12.0 * Bump(m, 9 * 60, 90) + 16.0 * Bump(m, 19 * 60, 120);
  if (row % 60 < 5) v += 8.0;
  return v;
}

std::vector<std::int64_t> Grid(std::size_t n) {
  std::vector<std::int64_t> ts(n);
  for (std::size_t i = 0; i < n; ++i) {
    ts[i] = kBenchmarkStart + static_cast<std::int64_t>(i) * kBenchmarkStep;
  }
  return ts;
}

// Draws `count` positions in [lo, hi) whose pairwise distance is at least
// `gap`, also keeping `gap` clear of already taken positions.
std::vector<std::size_t> SpacedPositions(std::mt19937_64& rng, std::size_t lo, std::size_t hi,
                                         std::size_t count, std::size_t gap,
                                         std::set<std::size_t>& taken) {
  std::uniform_int_distribution<std::size_t> pick(lo, hi - 1);
  std::vector<std::size_t> out;
  for (int guard = 0; out.size() < count; ++guard) {
    if (guard > 1'000'000) Fail(ErrorCode::kInternal, "cannot place benchmark events");
    const std::size_t p = pick(rng);
    auto it = taken.lower_bound(p >= gap ? p - gap : 0);
    if (it != taken.end() && *it <= p + gap) continue;
    taken.insert(p);
    out.push_back(p);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

LabeledDataset SeasonalPointBenchmark(std::uint64_t seed) {
  const std::size_t n = 21 * kDayRows;
  const std::size_t train = 14 * kDayRows;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  Matrix values(n, 1);
  for (std::size_t i = 0; i < n; ++i) values(i, 0) = 50.0 + DailyShape(i) + noise(rng);

  std::vector<int> labels(n, 0);
  std::set<std::size_t> taken;
  std::uniform_real_distribution<double> magnitude(4.0, 10.0);
  std::bernoulli_distribution up(0.5);
  for (std::size_t p : SpacedPositions(rng, train, n, 40, 30, taken)) {
    values(p, 0) += (up(rng) ? 1.0 : -1.0) * magnitude(rng);
    labels[p] = 1;
  }
  return LabeledDataset{"seasonal_point", FeatureWindow({"load"}, Grid(n), std::move(values), kBenchmarkStep),
                        std::move(labels), train};
}

LabeledDataset BurstBenchmark(int variant, std::uint64_t seed) {
  if (variant < 0 || variant >= kBurstVariants) {
    Fail(ErrorCode::kInvalidInput, "burst benchmark variant must be in [0, 4)");
  }
  const std::size_t k = 3 + static_cast<std::size_t>(variant);
  const std::size_t n = 8 * kDayRows;
  const std::size_t train = 3 * kDayRows;
  std::mt19937_64 rng(seed * 31 + static_cast<std::uint64_t>(variant));
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::vector<double> loading(k), offset(k), sigma(k);
  std::uniform_real_distribution<double> u(0.5, 1.5);
  for (std::size_t j = 0; j < k; ++j) {
    loading[j] = 1.5 * u(rng);
    offset[j] = 10.0 * u(rng);
    sigma[j] = 0.5 * u(rng);
  }
  // Half-width of a signal's normal range.
  std::vector<double> span(k);
  for (std::size_t j = 0; j < k; ++j) span[j] = 1.2 * loading[j] + 3.0 * sigma[j];
  Matrix values(n, k);
  for (std::size_t i = 0; i < n; ++i) {
    const double phase = 2.0 * M_PI * static_cast<double>(i % kDayRows) / kDayRows;
    const double factor = std::sin(phase) + 0.2 * gauss(rng);
    for (std::size_t j = 0; j < k; ++j) {
      values(i, j) = offset[j] + loading[j] * factor + sigma[j] * gauss(rng);
    }
  }

  std::vector<int> labels(n, 0);
  std::set<std::size_t> taken;
  std::uniform_int_distribution<std::size_t> feature(0, k - 1);
  std::uniform_real_distribution<double> burst_size(2.0, 3.0);
  std::bernoulli_distribution up(0.5);

  // Sustained anomalies first, so bursts never land inside them.
  const double strength = 1.6 - 0.1 * variant;
  std::uniform_int_distribution<std::size_t> length(60, 180);
  const std::size_t touched = std::max<std::size_t>(2, k / 2);
  auto pick_features = [&] {
    std::vector<std::size_t> all(k);
    for (std::size_t j = 0; j < k; ++j) all[j] = j;
    std::shuffle(all.begin(), all.end(), rng);
    all.resize(touched);
    return all;
  };
  for (std::size_t start : SpacedPositions(rng, train, n - 200, 8, 240, taken)) {
    const std::size_t len = length(rng);
    std::vector<std::pair<std::size_t, double>> shift;
    for (std::size_t f : pick_features()) shift.emplace_back(f, up(rng) ? 1.0 : -1.0);
    for (std::size_t i = start; i < start + len; ++i) {
      for (const auto& [f, sign] : shift) values(i, f) += sign * strength * span[f];
      labels[i] = 1;
      taken.insert(i);
    }
  }

  const std::size_t singles = 180 + 10 * static_cast<std::size_t>(variant);
  const std::size_t doubles = 100 + 10 * static_cast<std::size_t>(variant);
  auto burst = [&](std::size_t row) {
    for (std::size_t f : pick_features()) {
      values(row, f) += (up(rng) ? 1.0 : -1.0) * burst_size(rng) * span[f];
    }
  };
  for (std::size_t p : SpacedPositions(rng, train, n - 2, singles, 4, taken)) burst(p);
  for (std::size_t p : SpacedPositions(rng, train, n - 2, doubles, 4, taken)) {
    burst(p);
    burst(p + 1);
  }

  std::vector<std::string> ids;
  for (std::size_t j = 0; j < k; ++j) ids.push_back("f" + std::to_string(j + 1));
  return LabeledDataset{"burst_" + std::to_string(variant),
                        FeatureWindow(std::move(ids), Grid(n), std::move(values), kBenchmarkStep),
                        std::move(labels), train};
}

std::string DatasetToCsv(const LabeledDataset& dataset) {
  std::ostringstream out;
  out.precision(17);
  out << "ts_ms";
  for (const auto& id : dataset.window.signal_ids()) out << ',' << id;
  out << ",label\n";
  const auto& ts = dataset.window.ts();
  const auto& v = dataset.window.values();
  for (std::size_t i = 0; i < ts.size(); ++i) {
    out << ts[i];
    for (std::size_t j = 0; j < v.cols(); ++j) out << ',' << v(i, j);
    out << ',' << dataset.labels[i] << '\n';
  }
  return out.str();
}

}  // namespace tickwatch::eval
