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

namespace tickwatch {

struct TimePoint {
  std::int64_t ts = 0;  // epoch milliseconds
  double value = 0.0;

  friend bool operator==(const TimePoint&, const TimePoint&) = default;
};

// A timestamp-ordered slice of one signal. Construction validates the
// ordering and finiteness invariants, so a SeriesWindow in hand is always
// well formed.
class SeriesWindow {
 public:
  SeriesWindow(std::string signal_id, std::vector<TimePoint> points,
               std::int64_t step_ms);

  const std::string& signal_id() const { return signal_id_; }
  const std::vector<TimePoint>& points() const { return points_; }
  std::int64_t step_ms() const { return step_ms_; }
  std::size_t size() const { return points_.size(); }
  std::vector<double> values() const;

  // Trailing `count` points (or all, when shorter).
  SeriesWindow Tail(std::size_t count) const;

 private:
  std::string signal_id_;
  std::vector<TimePoint> points_;
  std::int64_t step_ms_;
};

// Builds a window from bare values on a regular grid starting at start_ts.
SeriesWindow MakeRegularWindow(std::string signal_id,
                               std::span<const double> values,
                               std::int64_t start_ts, std::int64_t step_ms);

struct SeasonalProfile {
  int period = 1;
  std::vector<double> phase_values;
  double level = 0.0;
  // Phase 0 is the sample at anchor_ts; later timestamps map onto phases by
  // whole steps so the profile can be applied to windows taken elsewhere.
  std::int64_t anchor_ts = 0;
  std::int64_t step_ms = 1;

  double PhaseValueAt(std::int64_t ts) const;
};

enum class BoundaryMethod { kIqr, kQuantile };

struct Boundary {
  double lower = 0.0;
  double upper = 0.0;
  BoundaryMethod method = BoundaryMethod::kIqr;
  // kIqr: {multiplier, unused}; kQuantile: {q_low, q_high}.
  double param_a = 0.0;
  double param_b = 0.0;

  bool Contains(double x) const { return x >= lower && x <= upper; }
  friend bool operator==(const Boundary&, const Boundary&) = default;
};

// Linear-interpolation quantile on the sorted sample (h = q * (n - 1)).
double EmpiricalQuantile(std::span<const double> data, double q);

// Median with the mean-of-central-pair rule for even sizes.
double Median(std::span<const double> data);

// s_0 = x_0, s_t = alpha * x_t + (1 - alpha) * s_{t-1}.
std::vector<double> ExpSmooth(std::span<const double> series, double alpha);

// Centered moving median; near the edges the window is truncated to the
// available samples.
std::vector<double> MovingMedian(std::span<const double> series, int window);

struct MediffResult {
  SeasonalProfile profile;
  std::vector<double> residuals;
};

// Median-based seasonal decomposition. residual[i] = value[i] - level -
// phase_values[i mod period]. Requires at least two full periods.
MediffResult MediffExtract(const SeriesWindow& series, int period);

Boundary IqrBoundary(std::span<const double> residuals, double multiplier);
Boundary QuantileBoundary(std::span<const double> residuals, double q_low,
                          double q_high);

// Adds N(0, (eta * std(series))^2) noise drawn from a generator seeded with
// `seed`. Training-time augmentation only.
std::vector<double> InjectNoise(std::span<const double> series, double eta,
                                std::uint64_t seed);

inline constexpr double kDefaultNoiseEta = 0.05;

}  // namespace tickwatch
