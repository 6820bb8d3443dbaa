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
#include <memory>
#include <span>
#include <vector>

#include "tickwatch/core/feature_window.hpp"
#include "tickwatch/models/model.hpp"

namespace tickwatch::models {

// Average unsuccessful-search path length in a binary search tree of n
// points: c(n) = 2 H(n - 1) - 2 (n - 1) / n with H(i) = ln(i) + gamma.
double CFactor(int n);

struct IsolationTree {
  struct Node {
    int feature = -1;  // -1 marks an external node
    double split = 0.0;
    int left = -1;
    int right = -1;
    int size = 0;  // training rows that reached an external node

    friend bool operator==(const Node&, const Node&) = default;
  };
  std::vector<Node> nodes;  // nodes[0] is the root

  double PathLength(std::span<const double> point) const;
  int Depth() const;

  friend bool operator==(const IsolationTree&, const IsolationTree&) = default;
};

struct IsolationForestOptions {
  int num_trees = 100;
  int subsample_n = 256;
  double contamination = 0.01;
};

class IsolationForestModel final : public DetectorModel {
 public:
  IsolationForestModel(std::vector<IsolationTree> trees, int subsample_n,
                       std::size_t feature_count, Boundary score_boundary,
                       std::vector<double> train_medians,
                       std::vector<double> feature_min, std::vector<double> feature_max);

  static std::shared_ptr<const IsolationForestModel> FromPayload(const nlohmann::json& payload);

  const std::vector<IsolationTree>& trees() const { return trees_; }
  int subsample_n() const { return subsample_n_; }
  int num_trees() const { return static_cast<int>(trees_.size()); }
  const Boundary& score_boundary() const { return score_boundary_; }
  const std::vector<double>& train_medians() const { return train_medians_; }
  const std::vector<double>& feature_min() const { return feature_min_; }
  const std::vector<double>& feature_max() const { return feature_max_; }

  // Mean path length over the trees.
  double ExpectedPathLength(std::span<const double> point) const;
  // 2^(-E[h(x)] / c(subsample_n)), in (0, 1); higher is more anomalous.
  double Score(std::span<const double> point) const;

  std::string_view type_name() const override { return "iforest_mv"; }
  std::size_t feature_count() const override { return feature_count_; }
  std::size_t min_history() const override { return 0; }
  WindowScores ScoreWindow(const FeatureWindow& window) const override;
  nlohmann::json Payload() const override;
  std::optional<AttributionReport> Explain(std::span<const double> row, int permutations,
                                           std::uint64_t seed) const override;

 private:
  void CheckDimension(std::span<const double> point) const;

  std::vector<IsolationTree> trees_;
  int subsample_n_;
  std::size_t feature_count_;
  Boundary score_boundary_;
  std::vector<double> train_medians_;
  std::vector<double> feature_min_;
  std::vector<double> feature_max_;
};

std::shared_ptr<const IsolationForestModel> IsolationForestFit(
    const Matrix& data, const IsolationForestOptions& options, std::uint64_t seed);

// Sampled-permutation Shapley attribution of the forest score. The value of
// a coalition S is the score of the hybrid point taking features in S from
// `point` and the rest from the training medians. When `permutations` is at
// least f!, every ordering is enumerated once and the result is exact.
AttributionReport Attribute(const IsolationForestModel& model, std::span<const double> point,
                            int permutations, std::uint64_t seed);

inline constexpr int kDefaultAttributionPermutations = 64;

}  // namespace tickwatch::models
