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
#include <optional>
#include <string>
#include <vector>

#include "tickwatch/drift/monitor.hpp"
#include "tickwatch/registry/registry.hpp"

namespace tickwatch::orchestrator {

struct DriftJobConfig {
  drift::DriftThresholds thresholds;
  std::int64_t recent_span_ms = drift::kDayMs;
  std::uint64_t seed = 1;
};

struct DriftJobReport {
  std::vector<drift::DriftReport> reports;
  std::vector<std::string> proposal_ids;
  std::vector<std::string> skipped;  // "model_id: reason"
};

nlohmann::json DriftJobReportToJson(const DriftJobReport& r);

// Daily self-healing pass over every active model: compare the trailing
// day of the first signal with its training summary, combine with the
// last seven days of alert counts, persist the report, and for a drifted,
// quiet or noisy model without a pending proposal, refresh its snapshot
// and propose a refined retrain.
DriftJobReport RunDriftJob(registry::Registry& registry, const registry::MetricSource& source,
                           std::int64_t now, const DriftJobConfig& config = {});

// Advances a proposal with an optional operator decision. An applied
// proposal writes its artifact and activates a new model version.
drift::ApplyOutcome ApplyProposal(registry::Registry& registry, const std::string& proposal_id,
                                  std::optional<drift::Decision> decision, std::int64_t now);

// Auto-applies every pending proposal past its deadline; returns their ids.
std::vector<std::string> SweepExpiredProposals(registry::Registry& registry, std::int64_t now);

}  // namespace tickwatch::orchestrator
