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
#include <string>
#include <vector>

#include "json.hpp"
#include "tickwatch/detection/detector.hpp"
#include "tickwatch/eval/benchmarks.hpp"
#include "tickwatch/eval/metrics.hpp"

namespace tickwatch::eval {

// One configuration under comparison: a model type with fit parameters and
// the detector settings applied on top.
struct Arm {
  std::string name;
  std::string model_type;
  nlohmann::json params = nlohmann::json::object();
  detection::DetectorSpec spec;
};

struct ArmResult {
  std::string name;
  Confusion confusion;
  std::vector<int> predicted;  // evaluation rows only
  double fit_ms = 0.0;
  double score_ms = 0.0;
};

// Fits on the training span, runs the detection flow over the whole window
// and compares the verdicts of the evaluation rows with the labels.
ArmResult RunArm(const LabeledDataset& dataset, const Arm& arm, std::uint64_t seed);

// ARIMA(2,0,0) with and without the daily seasonal profile; single-row
// verdicts (L = 1, k = 0, no smoothing), IQR multiplier 3.
std::vector<Arm> SeasonalArms();

// Isolation forest (contamination 0.01) alone, with hold (L = 3, k = 1)
// and with hold plus smoothing (alpha = 0.45).
std::vector<Arm> EnrichmentArms();

nlohmann::json ArmResultToJson(const ArmResult& r);

}  // namespace tickwatch::eval
