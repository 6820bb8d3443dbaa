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

#include "tickwatch/models/iforest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "tickwatch/core/error.hpp"
#include "tickwatch/core/timeseries.hpp"
#include "tickwatch/models/json_io.hpp"

namespace tickwatch::models {
namespace {

constexpr double kEulerGamma = 0.5772156649;

// c(n) extended with c(0) = c(1) = 0 for external-node adjustment.
double PathAdjustment(int size) { return size <= 1 ? 0.0 : CFactor(size); }

int HeightLimit(int subsample_n) {
  return static_cast<int>(std::ceil(std::log2(static_cast<double>(subsample_n))));
}

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& data, int height_limit, std::mt19937_64& rng)
      : data_(data), height_limit_(height_limit), rng_(rng) {}

  IsolationTree Build(std::vector<std::size_t> rows) {
    tree_.nodes.clear();
    Grow(rows, 0);
    return std::move(tree_);
  }

 private:
  int Grow(std::vector<std::size_t>& rows, int depth) {
    const int index = static_cast<int>(tree_.nodes.size());
    tree_.nodes.push_back({});
    tree_.nodes[static_cast<std::size_t>(index)].size = static_cast<int>(rows.size());
    if (depth >= height_limit_ || rows.size() <= 1) return index;

    const std::size_t f = data_.cols();
    std::vector<std::size_t> splittable;
    std::vector<double> lo(f), hi(f);
    for (std::size_t c = 0; c < f; ++c) {
      lo[c] = hi[c] = data_(rows[0], c);
      for (std::size_t r : rows) {
        lo[c] = std::min(lo[c], data_(r, c));
        hi[c] = std::max(hi[c], data_(r, c));
      }
      if (hi[c] > lo[c]) splittable.push_back(c);
    }
    if (splittable.empty()) return index;

    std::uniform_int_distribution<std::size_t> pick(0, splittable.size() - 1);
    const std::size_t feature = splittable[pick(rng_)];
    std::uniform_real_distribution<double> uniform(lo[feature], hi[feature]);
    double split = uniform(rng_);
    while (!(split > lo[feature])) split = uniform(rng_);

    std::vector<std::size_t> left, right;
    for (std::size_t r : rows) (data_(r, feature) < split ? left : right).push_back(r);
    rows.clear();
    rows.shrink_to_fit();

    const int l = Grow(left, depth + 1);
    const int rr = Grow(right, depth + 1);
    auto& node = tree_.nodes[static_cast<std::size_t>(index)];
    node.feature = static_cast<int>(feature);
    node.split = split;
    node.left = l;
    node.right = rr;
    return index;
  }

  const Matrix& data_;
  int height_limit_;
  std::mt19937_64& rng_;
  IsolationTree tree_;
};

}  // namespace

double CFactor(int n) {
  if (n < 2) Fail(ErrorCode::kInvalidInput, "c(n) requires n >= 2");
  const double nd = static_cast<double>(n);
  const double harmonic = std::log(nd - 1.0) + kEulerGamma;
  return 2.0 * harmonic - 2.0 * (nd - 1.0) / nd;
}

double IsolationTree::PathLength(std::span<const double> point) const {
  int index = 0;
  int depth = 0;
  while (true) {
    const Node& node = nodes[static_cast<std::size_t>(index)];
    if (node.feature < 0) return depth + PathAdjustment(node.size);
    index = point[static_cast<std::size_t>(node.feature)] < node.split ? node.left : node.right;
    ++depth;
  }
}

int IsolationTree::Depth() const {
  std::vector<int> depth(nodes.size(), 0);
  int deepest = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const Node& n = nodes[i];
    deepest = std::max(deepest, depth[i]);
    if (n.feature >= 0) {
      depth[static_cast<std::size_t>(n.left)] = depth[i] + 1;
      depth[static_cast<std::size_t>(n.right)] = depth[i] + 1;
    }
  }
  return deepest;
}

IsolationForestModel::IsolationForestModel(std::vector<IsolationTree> trees, int subsample_n,
                                           std::size_t feature_count, Boundary score_boundary,
                                           std::vector<double> train_medians,
                                           std::vector<double> feature_min,
                                           std::vector<double> feature_max)
    : trees_(std::move(trees)),
      subsample_n_(subsample_n),
      feature_count_(feature_count),
      score_boundary_(score_boundary),
      train_medians_(std::move(train_medians)),
      feature_min_(std::move(feature_min)),
      feature_max_(std::move(feature_max)) {
  if (trees_.empty() || subsample_n_ < 2 || feature_count_ == 0 ||
      train_medians_.size() != feature_count_ || feature_min_.size() != feature_count_ ||
      feature_max_.size() != feature_count_) {
    Fail(ErrorCode::kInvalidInput, "malformed isolation forest");
  }
  for (const IsolationTree& tree : trees_) {
    if (tree.nodes.empty()) Fail(ErrorCode::kInvalidInput, "empty isolation tree");
    for (const auto& node : tree.nodes) {
      if (node.feature >= static_cast<int>(feature_count_)) {
        Fail(ErrorCode::kInvalidInput, "isolation tree split on unknown feature");
      }
      if (node.feature >= 0) {
        const auto limit = static_cast<int>(tree.nodes.size());
        if (node.left <= 0 || node.right <= 0 || node.left >= limit || node.right >= limit) {
          Fail(ErrorCode::kInvalidInput, "isolation tree child index out of range");
        }
      }
    }
  }
}

void IsolationForestModel::CheckDimension(std::span<const double> point) const {
  if (point.size() != feature_count_) {
    Fail(ErrorCode::kInvalidInput, "point has " + std::to_string(point.size()) +
                                       " features, model expects " +
                                       std::to_string(feature_count_));
  }
}

double IsolationForestModel::ExpectedPathLength(std::span<const double> point) const {
  CheckDimension(point);
  double total = 0.0;
  for (const IsolationTree& tree : trees_) total += tree.PathLength(point);
  return total / static_cast<double>(trees_.size());
}

double IsolationForestModel::Score(std::span<const double> point) const {
  return std::exp2(-ExpectedPathLength(point) / CFactor(subsample_n_));
}

WindowScores IsolationForestModel::ScoreWindow(const FeatureWindow& window) const {
  if (window.feature_count() != feature_count_) {
    Fail(ErrorCode::kInvalidInput, "window has " + std::to_string(window.feature_count()) +
                                       " signals, model expects " +
                                       std::to_string(feature_count_));
  }
  WindowScores out;
  out.boundary = score_boundary_;
  out.scores.resize(window.size());
  out.valid.assign(window.size(), true);
  out.predicted.assign(window.size(), std::nan(""));
  for (std::size_t r = 0; r < window.size(); ++r) out.scores[r] = Score(window.values().row(r));
  return out;
}

std::optional<AttributionReport> IsolationForestModel::Explain(std::span<const double> row,
                                                               int permutations,
                                                               std::uint64_t seed) const {
  return Attribute(*this, row, permutations, seed);
}

nlohmann::json IsolationForestModel::Payload() const {
  nlohmann::json trees = nlohmann::json::array();
  for (const IsolationTree& tree : trees_) {
    std::vector<int> feature, left, right, size;
    std::vector<double> split;
    for (const auto& n : tree.nodes) {
      feature.push_back(n.feature);
      split.push_back(n.split);
      left.push_back(n.left);
      right.push_back(n.right);
      size.push_back(n.size);
    }
    trees.push_back({{"feature", feature},
                     {"split", split},
                     {"left", left},
                     {"right", right},
                     {"size", size}});
  }
  return {{"subsample_n", subsample_n_},
          {"feature_count", feature_count_},
          {"score_boundary", BoundaryToJson(score_boundary_)},
          {"train_medians", train_medians_},
          {"feature_min", feature_min_},
          {"feature_max", feature_max_},
          {"trees", trees}};
}

std::shared_ptr<const IsolationForestModel> IsolationForestModel::FromPayload(
    const nlohmann::json& j) {
  std::vector<IsolationTree> trees;
  for (const auto& t : j.at("trees")) {
    const auto feature = t.at("feature").get<std::vector<int>>();
    const auto split = t.at("split").get<std::vector<double>>();
    const auto left = t.at("left").get<std::vector<int>>();
    const auto right = t.at("right").get<std::vector<int>>();
    const auto size = t.at("size").get<std::vector<int>>();
    if (split.size() != feature.size() || left.size() != feature.size() ||
        right.size() != feature.size() || size.size() != feature.size()) {
      Fail(ErrorCode::kInvalidInput, "malformed isolation tree arrays");
    }
    IsolationTree tree;
    for (std::size_t i = 0; i < feature.size(); ++i) {
      tree.nodes.push_back({feature[i], split[i], left[i], right[i], size[i]});
    }
    trees.push_back(std::move(tree));
  }
  return std::make_shared<IsolationForestModel>(
      std::move(trees), j.at("subsample_n").get<int>(), j.at("feature_count").get<std::size_t>(),
      BoundaryFromJson(j.at("score_boundary")), j.at("train_medians").get<std::vector<double>>(),
      j.at("feature_min").get<std::vector<double>>(),
      j.at("feature_max").get<std::vector<double>>());
}

std::shared_ptr<const IsolationForestModel> IsolationForestFit(
    const Matrix& data, const IsolationForestOptions& options, std::uint64_t seed) {
  const std::size_t n = data.rows();
  const std::size_t f = data.cols();
  if (f == 0) Fail(ErrorCode::kInvalidInput, "isolation forest needs at least one feature");
  if (options.subsample_n < 2 || n < static_cast<std::size_t>(options.subsample_n)) {
    Fail(ErrorCode::kInsufficientData,
         "isolation forest needs n >= subsample_n >= 2 (n=" + std::to_string(n) +
             ", subsample_n=" + std::to_string(options.subsample_n) + ")");
  }
  if (options.num_trees < 1) Fail(ErrorCode::kInvalidInput, "num_trees must be positive");
  if (!(options.contamination >= 0.0 && options.contamination < 1.0)) {
    Fail(ErrorCode::kInvalidInput, "contamination must lie in [0, 1)");
  }
  for (double v : data.data()) {
    if (!std::isfinite(v)) Fail(ErrorCode::kInvalidInput, "non-finite training value");
  }

  std::vector<double> fmin(f), fmax(f), medians(f);
  bool degenerate = true;
  for (std::size_t c = 0; c < f; ++c) {
    const std::vector<double> col = data.column(c);
    const auto [mn, mx] = std::minmax_element(col.begin(), col.end());
    fmin[c] = *mn;
    fmax[c] = *mx;
    degenerate = degenerate && fmin[c] == fmax[c];
    medians[c] = Median(col);
  }
  if (degenerate) Fail(ErrorCode::kFitFailure, "isolation forest: all training rows identical");

  std::mt19937_64 rng(seed);
  const int height = HeightLimit(options.subsample_n);
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  std::vector<IsolationTree> trees;
  trees.reserve(static_cast<std::size_t>(options.num_trees));
  for (int t = 0; t < options.num_trees; ++t) {
    // Partial Fisher-Yates draws subsample_n rows without replacement.
    const auto m = static_cast<std::size_t>(options.subsample_n);
    for (std::size_t i = 0; i < m; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, n - 1);
      std::swap(all[i], all[pick(rng)]);
    }
    std::vector<std::size_t> rows(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(m));
    TreeBuilder builder(data, height, rng);
    trees.push_back(builder.Build(std::move(rows)));
  }

  IsolationForestModel provisional(trees, options.subsample_n, f, Boundary{}, medians, fmin, fmax);
  std::vector<double> scores(n);
  for (std::size_t r = 0; r < n; ++r) scores[r] = provisional.Score(data.row(r));
  const Boundary boundary = QuantileBoundary(scores, 0.0, 1.0 - options.contamination);
  return std::make_shared<IsolationForestModel>(std::move(trees), options.subsample_n, f, boundary,
                                                std::move(medians), std::move(fmin),
                                                std::move(fmax));
}

AttributionReport Attribute(const IsolationForestModel& model, std::span<const double> point,
                            int permutations, std::uint64_t seed) {
  if (permutations < 1) Fail(ErrorCode::kInvalidInput, "permutations must be >= 1");
  const std::size_t f = model.feature_count();
  if (point.size() != f) Fail(ErrorCode::kInvalidInput, "attribution dimension mismatch");

  const std::vector<double>& base = model.train_medians();
  AttributionReport report;
  report.feature_contributions.assign(f, 0.0);
  report.baseline_score = model.Score(base);
  report.point_score = model.Score(point);

  std::vector<std::size_t> order(f);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> hybrid(f);
  auto accumulate = [&](const std::vector<std::size_t>& perm) {
    hybrid = base;
    double previous = report.baseline_score;
    for (std::size_t k = 0; k < f; ++k) {
      const std::size_t feature = perm[k];
      hybrid[feature] = point[feature];
      const double current = k + 1 == f ? report.point_score : model.Score(hybrid);
      report.feature_contributions[feature] += current - previous;
      previous = current;
    }
  };

  // Enumerate every ordering when that is no more work than sampling.
  double factorial = 1.0;
  for (std::size_t k = 2; k <= f; ++k) factorial *= static_cast<double>(k);
  int used = 0;
  if (factorial <= static_cast<double>(permutations)) {
    do {
      accumulate(order);
      ++used;
    } while (std::next_permutation(order.begin(), order.end()));
  } else {
    std::mt19937_64 rng(seed);
    for (; used < permutations; ++used) {
      std::shuffle(order.begin(), order.end(), rng);
      accumulate(order);
    }
  }
  for (double& c : report.feature_contributions) c /= static_cast<double>(used);
  report.permutations_used = used;
  return report;
}

}  // namespace tickwatch::models
