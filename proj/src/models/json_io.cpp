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

#include "tickwatch/models/json_io.hpp"

#include "tickwatch/core/error.hpp"

namespace tickwatch {

nlohmann::json BoundaryToJson(const Boundary& b) {
  return {{"lower", b.lower},
          {"upper", b.upper},
          {"method", b.method == BoundaryMethod::kIqr ? "iqr" : "quantile"},
          {"param_a", b.param_a},
          {"param_b", b.param_b}};
}

Boundary BoundaryFromJson(const nlohmann::json& j) {
  Boundary b;
  b.lower = j.at("lower").get<double>();
  b.upper = j.at("upper").get<double>();
  const std::string method = j.at("method").get<std::string>();
  if (method == "iqr") {
    b.method = BoundaryMethod::kIqr;
  } else if (method == "quantile") {
    b.method = BoundaryMethod::kQuantile;
  } else {
    Fail(ErrorCode::kInvalidInput, "unknown boundary method '" + method + "'");
  }
  b.param_a = j.at("param_a").get<double>();
  b.param_b = j.at("param_b").get<double>();
  if (b.lower > b.upper) Fail(ErrorCode::kInvalidInput, "boundary lower > upper");
  return b;
}

nlohmann::json ProfileToJson(const SeasonalProfile& p) {
  return {{"period", p.period},
          {"phase_values", p.phase_values},
          {"level", p.level},
          {"anchor_ts", p.anchor_ts},
          {"step_ms", p.step_ms}};
}

SeasonalProfile ProfileFromJson(const nlohmann::json& j) {
  SeasonalProfile p;
  p.period = j.at("period").get<int>();
  p.phase_values = j.at("phase_values").get<std::vector<double>>();
  p.level = j.at("level").get<double>();
  p.anchor_ts = j.at("anchor_ts").get<std::int64_t>();
  p.step_ms = j.at("step_ms").get<std::int64_t>();
  if (p.period <= 0 || p.phase_values.size() != static_cast<std::size_t>(p.period) ||
      p.step_ms <= 0) {
    Fail(ErrorCode::kInvalidInput, "malformed seasonal profile");
  }
  return p;
}

}  // namespace tickwatch
