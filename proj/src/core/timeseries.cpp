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

#include "tickwatch/core/timeseries.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "tickwatch/core/error.hpp"
#include "tickwatch/kernels/kernels.hpp"

namespace tickwatch {

SeriesWindow::SeriesWindow(std::string signal_id, std::vector<TimePoint> points,
                           std::int64_t step_ms)
    : signal_id_(std::move(signal_id)),
      points_(std::move(points)),
      step_ms_(step_ms) {
  if (points_.empty()) Fail(ErrorCode::kInvalidInput, "empty series window");
  if (step_ms_ <= 0) Fail(ErrorCode::kInvalidInput, "step_ms must be positive");
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const TimePoint& p = points_[i];
    if (!std::isfinite(p.value)) {
      Fail(ErrorCode::kInvalidInput,
           "non-finite value at ts " + std::to_string(p.ts));
    }
    if (p.ts <= 0) Fail(ErrorCode::kInvalidInput, "timestamps must be positive");
    if (i > 0 && p.ts <= points_[i - 1].ts) {
      Fail(ErrorCode::kInvalidInput, "timestamps must be strictly increasing");
    }
  }
}

std::vector<double> SeriesWindow::values() const {
  std::vector<double> out;
  out.reserve(points_.size());
  for (const TimePoint& p : points_) out.push_back(p.value);
  return out;
}

SeriesWindow SeriesWindow::Tail(std::size_t count) const {
  if (count >= points_.size()) return *this;
  return SeriesWindow(signal_id_,
                      std::vector<TimePoint>(points_.end() - static_cast<std::ptrdiff_t>(count),
                                             points_.end()),
                      step_ms_);
}

SeriesWindow MakeRegularWindow(std::string signal_id,
                               std::span<const double> values,
                               std::int64_t start_ts, std::int64_t step_ms) {
  std::vector<TimePoint> points;
  points.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    points.push_back({start_ts + static_cast<std::int64_t>(i) * step_ms, values[i]});
  }
  return SeriesWindow(std::move(signal_id), std::move(points), step_ms);
}

double SeasonalProfile::PhaseValueAt(std::int64_t ts) const {
  const std::int64_t steps = (ts - anchor_ts) / step_ms;
  std::int64_t phase = steps % period;
  if (phase < 0) phase += period;
  return phase_values[static_cast<std::size_t>(phase)];
}

namespace {

void RequireFinite(std::span<const double> data, const char* what) {
  for (double x : data) {
    if (!std::isfinite(x)) {
      Fail(ErrorCode::kInvalidInput, std::string(what) + ": non-finite input");
    }
  }
}

double SortedQuantile(const std::vector<double>& sorted, double q) {
  const double h = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = static_cast<std::size_t>(std::ceil(h));
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

// Median of buf[0..n) using selection; reorders buf.
double MedianInPlace(double* buf, std::size_t n) {
  const std::size_t mid = n / 2;
  std::nth_element(buf, buf + mid, buf + n);
  const double upper = buf[mid];
  if (n % 2 == 1) return upper;
  const double lower = *std::max_element(buf, buf + mid);
  return 0.5 * (lower + upper);
}

}  // namespace

double EmpiricalQuantile(std::span<const double> data, double q) {
  if (data.empty()) Fail(ErrorCode::kInvalidInput, "quantile of empty data");
  if (!(q >= 0.0 && q <= 1.0)) {
    Fail(ErrorCode::kInvalidInput, "quantile level outside [0, 1]");
  }
  RequireFinite(data, "quantile");
  std::vector<double> sorted(data.begin(), data.end());
  std::sort(sorted.begin(), sorted.end());
  return SortedQuantile(sorted, q);
}

double Median(std::span<const double> data) {
  if (data.empty()) Fail(ErrorCode::kInvalidInput, "median of empty data");
  std::vector<double> buf(data.begin(), data.end());
  return MedianInPlace(buf.data(), buf.size());
}

std::vector<double> ExpSmooth(std::span<const double> series, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    Fail(ErrorCode::kInvalidInput, "smoothing alpha must lie in (0, 1]");
  }
  if (series.empty()) Fail(ErrorCode::kInvalidInput, "smoothing empty series");
  std::vector<double> out(series.size());
  out[0] = series[0];
  for (std::size_t t = 1; t < series.size(); ++t) {
    out[t] = alpha * series[t] + (1.0 - alpha) * out[t - 1];
  }
  return out;
}

std::vector<double> MovingMedian(std::span<const double> series, int window) {
  if (window <= 0 || window % 2 == 0) {
    Fail(ErrorCode::kInvalidInput, "moving median window must be odd and positive");
  }
  if (static_cast<std::size_t>(window) > series.size()) {
    Fail(ErrorCode::kInvalidInput, "moving median window longer than series");
  }
  const std::size_t n = series.size();
  const std::size_t half = static_cast<std::size_t>(window / 2);
  std::vector<double> out(n);
  std::vector<double> buf(static_cast<std::size_t>(window));
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= half ? i - half : 0;
    const std::size_t hi = std::min(n - 1, i + half);
    const std::size_t len = hi - lo + 1;
    std::copy(series.begin() + static_cast<std::ptrdiff_t>(lo),
              series.begin() + static_cast<std::ptrdiff_t>(hi + 1), buf.begin());
    out[i] = MedianInPlace(buf.data(), len);
  }
  return out;
}

MediffResult MediffExtract(const SeriesWindow& series, int period) {
  if (period <= 0) Fail(ErrorCode::kInvalidInput, "period must be positive");
  const std::vector<double> x = series.values();
  const std::size_t n = x.size();
  const auto p = static_cast<std::size_t>(period);
  if (n < 2 * p) {
    Fail(ErrorCode::kInsufficientData,
         "seasonal extraction needs at least two periods (" +
             std::to_string(2 * p) + " samples), got " + std::to_string(n));
  }

  auto phase_medians = [&](const std::vector<double>& detrended) {
    std::vector<double> phases(p);
    std::vector<double> buf;
    buf.reserve(n / p + 1);
    for (std::size_t ph = 0; ph < p; ++ph) {
      buf.clear();
      for (std::size_t i = ph; i < n; i += p) buf.push_back(detrended[i]);
      phases[ph] = MedianInPlace(buf.data(), buf.size());
    }
    return phases;
  };

  // Pass 1: rough per-phase medians of the raw series. Pass 2: moving median
  // of the deseasonalized series gives a trend that is insensitive to the
  // seasonal shape. Pass 3: per-phase medians of the detrended series.
  const std::vector<double> rough = phase_medians(x);
  std::vector<double> deseasonalized(n);
  for (std::size_t i = 0; i < n; ++i) deseasonalized[i] = x[i] - rough[i % p];
  const int trend_window = period % 2 == 1 ? period : period + 1;
  const std::vector<double> trend = MovingMedian(deseasonalized, trend_window);

  std::vector<double> detrended(n);
  for (std::size_t i = 0; i < n; ++i) detrended[i] = x[i] - trend[i];
  std::vector<double> phases = phase_medians(detrended);
  const double center = Median(phases);
  for (double& v : phases) v -= center;

  MediffResult result;
  result.profile.period = period;
  result.profile.level = Median(trend) + center;
  result.profile.phase_values = std::move(phases);
  result.profile.anchor_ts = series.points().front().ts;
  result.profile.step_ms = series.step_ms();
  result.residuals.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    result.residuals[i] =
        x[i] - (result.profile.level + result.profile.phase_values[i % p]);
  }
  return result;
}

Boundary IqrBoundary(std::span<const double> residuals, double multiplier) {
  if (!(multiplier > 0.0)) Fail(ErrorCode::kInvalidInput, "IQR multiplier must be positive");
  if (residuals.size() < 4) {
    Fail(ErrorCode::kInsufficientData, "IQR boundary needs at least 4 residuals");
  }
  RequireFinite(residuals, "iqr_boundary");
  std::vector<double> sorted(residuals.begin(), residuals.end());
  std::sort(sorted.begin(), sorted.end());
  const double q1 = SortedQuantile(sorted, 0.25);
  const double q3 = SortedQuantile(sorted, 0.75);
  const double iqr = q3 - q1;
  return Boundary{q1 - multiplier * iqr, q3 + multiplier * iqr,
                  BoundaryMethod::kIqr, multiplier, 0.0};
}

Boundary QuantileBoundary(std::span<const double> residuals, double q_low,
                          double q_high) {
  if (!(q_low >= 0.0 && q_low < q_high && q_high <= 1.0)) {
    Fail(ErrorCode::kInvalidInput, "quantile boundary needs 0 <= q_low < q_high <= 1");
  }
  if (residuals.empty()) Fail(ErrorCode::kInvalidInput, "quantile boundary of empty data");
  RequireFinite(residuals, "quantile_boundary");
  std::vector<double> sorted(residuals.begin(), residuals.end());
  std::sort(sorted.begin(), sorted.end());
  return Boundary{SortedQuantile(sorted, q_low), SortedQuantile(sorted, q_high),
                  BoundaryMethod::kQuantile, q_low, q_high};
}

std::vector<double> InjectNoise(std::span<const double> series, double eta,
                                std::uint64_t seed) {
  std::vector<double> out(series.begin(), series.end());
  if (series.empty() || eta < 0.0) {
    if (eta < 0.0) Fail(ErrorCode::kInvalidInput, "noise eta must be non-negative");
    return out;
  }
  const bool constant = std::all_of(series.begin(), series.end(),
                                    [&](double v) { return v == series[0]; });
  const double sigma = constant ? 0.0 : eta * kernels::ComputeMoments(series).std;
  if (sigma == 0.0) return out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  for (double& v : out) v += noise(rng);
  return out;
}

}  // namespace tickwatch
