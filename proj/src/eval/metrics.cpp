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

#include "tickwatch/eval/metrics.hpp"

#include <string>

#include "tickwatch/core/error.hpp"

namespace tickwatch::eval {
namespace {

double Ratio(std::int64_t num, std::int64_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

void Confusion::Add(bool predicted, bool actual) {
  if (actual) {
    predicted ? ++tp : ++fn;
  } else {
    predicted ? ++fp : ++tn;
  }
}

double Confusion::precision() const { return Ratio(tp, tp + fp); }
double Confusion::recall() const { return Ratio(tp, tp + fn); }
double Confusion::specificity() const { return Ratio(tn, tn + fp); }
double Confusion::balanced_accuracy() const { return 0.5 * (recall() + specificity()); }

Confusion Confuse(std::span<const int> predicted, std::span<const int> actual) {
  if (predicted.size() != actual.size()) {
    Fail(ErrorCode::kInvalidInput, "prediction and label lengths differ (" +
                                       std::to_string(predicted.size()) + " vs " +
                                       std::to_string(actual.size()) + ")");
  }
  Confusion c;
  for (std::size_t i = 0; i < predicted.size(); ++i) c.Add(predicted[i] != 0, actual[i] != 0);
  return c;
}

nlohmann::json ConfusionToJson(const Confusion& c) {
  return {{"tp", c.tp},
          {"fp", c.fp},
          {"tn", c.tn},
          {"fn", c.fn},
          {"precision", c.precision()},
          {"recall", c.recall()},
          {"specificity", c.specificity()},
          {"balanced_accuracy", c.balanced_accuracy()}};
}

}  // namespace tickwatch::eval
