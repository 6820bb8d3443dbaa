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

#include <span>
#include <vector>

#include "json.hpp"

namespace tickwatch::drift {

inline constexpr double kProbabilityFloor = 1e-6;
inline constexpr int kDefaultBins = 10;
inline constexpr int kSketchSize = 200;

// Binned view of the training distribution. Edges are training quantiles and
// stay frozen, so later samples are binned against the same grid. The outer
// bins are open-ended when other data is binned against them.
struct DistributionSummary {
  std::vector<double> bin_edges;  // k + 1, strictly increasing
  std::vector<double> bin_probs;  // k, floored and renormalized
  long long sample_count = 0;
  double mean = 0.0;
  double std = 0.0;
  // Training quantiles at (i + 0.5) / kSketchSize, standing in for the
  // training sample in KS and Wasserstein comparisons.
  std::vector<double> quantile_sketch;

  friend bool operator==(const DistributionSummary&, const DistributionSummary&) = default;
};

nlohmann::json SummaryToJson(const DistributionSummary& s);
DistributionSummary SummaryFromJson(const nlohmann::json& j);

DistributionSummary Summarize(std::span<const double> data, int k_bins = kDefaultBins);

// Probabilities of `data` over the summary's bins, floored and renormalized.
std::vector<double> BinProbabilities(const DistributionSummary& summary,
                                     std::span<const double> data);

// max(p_i, floor) then renormalized to sum 1.
std::vector<double> FloorProbabilities(std::span<const double> probs);

double KsStatistic(std::span<const double> a, std::span<const double> b);
double Psi(const DistributionSummary& p, std::span<const double> q_probs);
double PsiProbs(std::span<const double> p, std::span<const double> q);
double Kl(std::span<const double> p, std::span<const double> q);
double Js(std::span<const double> p, std::span<const double> q);
double Wasserstein1(std::span<const double> a, std::span<const double> b);

}  // namespace tickwatch::drift
