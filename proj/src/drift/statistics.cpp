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

#include "tickwatch/drift/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tickwatch/core/error.hpp"
#include "tickwatch/kernels/kernels.hpp"

namespace tickwatch::drift {
namespace {

void RequireNonEmpty(std::span<const double> x, const char* what) {
  if (x.empty()) Fail(ErrorCode::kInvalidInput, std::string(what) + ": empty sample");
}

void RequireSameLength(std::span<const double> p, std::span<const double> q, const char* what) {
  if (p.size() != q.size() || p.empty()) {
    Fail(ErrorCode::kInvalidInput, std::string(what) + ": bin count mismatch (" +
                                       std::to_string(p.size()) + " vs " +
                                       std::to_string(q.size()) + ")");
  }
}

std::vector<double> Sorted(std::span<const double> x) {
  std::vector<double> out(x.begin(), x.end());
  std::sort(out.begin(), out.end());
  return out;
}

// Linear-interpolation quantile of an already sorted sample, matching
// EmpiricalQuantile without re-sorting.
double SortedQuantile(const std::vector<double>& sorted, double q) {
  const double h = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = static_cast<std::size_t>(std::ceil(h));
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double KlFloored(const std::vector<double>& p, const std::vector<double>& q) {
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) total += p[i] * std::log(p[i] / q[i]);
  return std::max(0.0, total);
}

}  // namespace

nlohmann::json SummaryToJson(const DistributionSummary& s) {
  return {{"bin_edges", s.bin_edges}, {"bin_probs", s.bin_probs},
          {"sample_count", s.sample_count}, {"mean", s.mean}, {"std", s.std},
          {"quantile_sketch", s.quantile_sketch}};
}

DistributionSummary SummaryFromJson(const nlohmann::json& j) {
  DistributionSummary s;
  try {
    s.bin_edges = j.at("bin_edges").get<std::vector<double>>();
    s.bin_probs = j.at("bin_probs").get<std::vector<double>>();
    s.sample_count = j.at("sample_count").get<long long>();
    s.mean = j.at("mean").get<double>();
    s.std = j.at("std").get<double>();
    s.quantile_sketch = j.value("quantile_sketch", std::vector<double>{});
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kInvalidInput, std::string("malformed distribution summary: ") + e.what());
  }
  if (s.bin_edges.size() != s.bin_probs.size() + 1 || s.bin_probs.empty()) {
    Fail(ErrorCode::kInvalidInput, "summary edges and probabilities disagree");
  }
  return s;
}

DistributionSummary Summarize(std::span<const double> data, int k_bins) {
  if (k_bins < 1) Fail(ErrorCode::kInvalidInput, "k_bins must be positive");
  if (data.size() < static_cast<std::size_t>(k_bins)) {
    Fail(ErrorCode::kInsufficientData, "summary needs at least k_bins samples");
  }
  const std::vector<double> sorted = Sorted(data);
  if (!std::isfinite(sorted.front()) || !std::isfinite(sorted.back())) {
    Fail(ErrorCode::kInvalidInput, "summary of non-finite data");
  }
  if (sorted.front() == sorted.back()) {
    Fail(ErrorCode::kDegenerateDistribution, "fewer than two distinct values");
  }
  DistributionSummary s;
  for (int i = 0; i <= k_bins; ++i) {
    const double e = SortedQuantile(sorted, static_cast<double>(i) / k_bins);
    if (s.bin_edges.empty() || e > s.bin_edges.back()) s.bin_edges.push_back(e);
  }
  s.bin_probs.assign(s.bin_edges.size() - 1, 0.0);
  s.sample_count = static_cast<long long>(data.size());
  const kernels::Moments m = kernels::ComputeMoments(data);
  s.mean = m.mean;
  s.std = m.std;
  s.bin_probs = BinProbabilities(s, data);
  s.quantile_sketch.reserve(kSketchSize);
  for (int i = 0; i < kSketchSize; ++i) {
    s.quantile_sketch.push_back(SortedQuantile(sorted, (i + 0.5) / kSketchSize));
  }
  return s;
}

std::vector<double> BinProbabilities(const DistributionSummary& summary,
                                     std::span<const double> data) {
  RequireNonEmpty(data, "bin_probabilities");
  const auto& e = summary.bin_edges;
  const std::size_t k = e.size() - 1;
  std::vector<double> counts(k, 0.0);
  for (double x : data) {
    // Interior edges only: values below e[1] land in bin 0, values at or
    // above e[k-1] in bin k-1.
    const auto it = std::upper_bound(e.begin() + 1, e.end() - 1, x);
    counts[static_cast<std::size_t>(it - (e.begin() + 1))] += 1.0;
  }
  for (double& c : counts) c /= static_cast<double>(data.size());
  return FloorProbabilities(counts);
}

std::vector<double> FloorProbabilities(std::span<const double> probs) {
  std::vector<double> out(probs.begin(), probs.end());
  double total = 0.0;
  for (double& p : out) {
    if (!(p >= 0.0)) Fail(ErrorCode::kInvalidInput, "negative or NaN probability");
    p = std::max(p, kProbabilityFloor);
    total += p;
  }
  for (double& p : out) p /= total;
  return out;
}

double KsStatistic(std::span<const double> a, std::span<const double> b) {
  RequireNonEmpty(a, "ks");
  RequireNonEmpty(b, "ks");
  const std::vector<double> sa = Sorted(a);
  const std::vector<double> sb = Sorted(b);
  const double na = static_cast<double>(sa.size());
  const double nb = static_cast<double>(sb.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double best = 0.0;
  while (i < sa.size() || j < sb.size()) {
    double z;
    if (j == sb.size() || (i < sa.size() && sa[i] <= sb[j])) {
      z = sa[i];
    } else {
      z = sb[j];
    }
    while (i < sa.size() && sa[i] == z) ++i;
    while (j < sb.size() && sb[j] == z) ++j;
    best = std::max(best, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return best;
}

double Psi(const DistributionSummary& p, std::span<const double> q_probs) {
  return PsiProbs(p.bin_probs, q_probs);
}

double PsiProbs(std::span<const double> p, std::span<const double> q) {
  RequireSameLength(p, q, "psi");
  const std::vector<double> fp = FloorProbabilities(p);
  const std::vector<double> fq = FloorProbabilities(q);
  double total = 0.0;
  for (std::size_t i = 0; i < fp.size(); ++i) total += (fq[i] - fp[i]) * std::log(fq[i] / fp[i]);
  return std::max(0.0, total);
}

double Kl(std::span<const double> p, std::span<const double> q) {
  RequireSameLength(p, q, "kl");
  return KlFloored(FloorProbabilities(p), FloorProbabilities(q));
}

double Js(std::span<const double> p, std::span<const double> q) {
  RequireSameLength(p, q, "js");
  const std::vector<double> fp = FloorProbabilities(p);
  const std::vector<double> fq = FloorProbabilities(q);
  std::vector<double> m(fp.size());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = 0.5 * (fp[i] + fq[i]);
  return std::min(std::log(2.0), 0.5 * KlFloored(fp, m) + 0.5 * KlFloored(fq, m));
}

double Wasserstein1(std::span<const double> a, std::span<const double> b) {
  RequireNonEmpty(a, "wasserstein1");
  RequireNonEmpty(b, "wasserstein1");
  const std::vector<double> sa = Sorted(a);
  const std::vector<double> sb = Sorted(b);
  const double na = static_cast<double>(sa.size());
  const double nb = static_cast<double>(sb.size());
  // Walk the merged breakpoints; between consecutive breakpoints both CDFs
  // are constant, so the integral is a weighted sum of CDF gaps.
  std::vector<double> fa, fb, width;
  std::size_t i = 0;
  std::size_t j = 0;
  double prev = std::min(sa.front(), sb.front());
  while (i < sa.size() || j < sb.size()) {
    double z;
    if (j == sb.size() || (i < sa.size() && sa[i] <= sb[j])) {
      z = sa[i];
    } else {
      z = sb[j];
    }
    if (z > prev) {
      fa.push_back(static_cast<double>(i) / na);
      fb.push_back(static_cast<double>(j) / nb);
      width.push_back(z - prev);
    }
    while (i < sa.size() && sa[i] == z) ++i;
    while (j < sb.size() && sb[j] == z) ++j;
    prev = z;
  }
  if (width.empty()) return 0.0;
  return kernels::WeightedAbsDiff(fa, fb, width);
}

}  // namespace tickwatch::drift
