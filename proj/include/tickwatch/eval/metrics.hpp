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

#include "json.hpp"

namespace tickwatch::eval {

// Point-wise confusion counts. Label 1 is anomalous.
struct Confusion {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t tn = 0;
  std::int64_t fn = 0;

  void Add(bool predicted, bool actual);
  std::int64_t total() const { return tp + fp + tn + fn; }
  // Empty denominators give 0.
  double precision() const;
  double recall() const;
  double specificity() const;
  // Mean of the per-class recalls.
  double balanced_accuracy() const;
};

// Throws InvalidInput when the lengths differ.
Confusion Confuse(std::span<const int> predicted, std::span<const int> actual);

nlohmann::json ConfusionToJson(const Confusion& c);

}  // namespace tickwatch::eval
