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

#include "tickwatch/orchestrator/lifecycle.hpp"

#include <algorithm>

#include "tickwatch/core/error.hpp"
#include "tickwatch/drift/statistics.hpp"
#include "tickwatch/models/artifact.hpp"
#include "tickwatch/orchestrator/train.hpp"

namespace tickwatch::orchestrator {
namespace {

constexpr int kAlertDays = 7;

bool HasPendingProposal(const registry::Registry& registry, const std::string& model_id) {
  for (const auto& p : registry.ListProposals(drift::ProposalStatus::kPending)) {
    if (p.model_id == model_id) return true;
  }
  return false;
}

}  // namespace

nlohmann::json DriftJobReportToJson(const DriftJobReport& r) {
  nlohmann::json reports = nlohmann::json::array();
  for (const auto& rep : r.reports) reports.push_back(drift::ReportToJson(rep));
  return {{"reports", reports}, {"proposal_ids", r.proposal_ids}, {"skipped", r.skipped}};
}

DriftJobReport RunDriftJob(registry::Registry& registry, const registry::MetricSource& source,
                           std::int64_t now, const DriftJobConfig& config) {
  DriftJobReport out;
  for (const auto& model : registry.GetActiveModels()) {
    try {
      const auto& summary = model.train_summary;
      if (!summary.is_object() || summary.value("distribution", nlohmann::json()).is_null()) {
        Fail(ErrorCode::kInvalidState, "no training distribution");
      }
      const auto train = drift::SummaryFromJson(summary.at("distribution"));
      const auto signal = registry.GetSignal(model.signal_ids.front());
      std::vector<double> recent;
      for (const auto& p : source.FetchSeries(registry::ParseSelector(signal.query_expr),
                                              now - config.recent_span_ms, now)) {
        recent.push_back(p.value);
      }
      const std::int64_t age = now - model.created_at;
      const int days = static_cast<int>(std::clamp<std::int64_t>(age / drift::kDayMs + 1, 1, kAlertDays));
      const auto counts = registry.DailyAlertCounts(model.model_id, now, days);
      const auto report = drift::EvaluateDrift(model.model_id, train, recent, counts, age, now,
                                               config.thresholds);
      registry.SaveDriftReport(report);
      out.reports.push_back(report);
      if (report.verdict == drift::DriftVerdict::kHealthy || HasPendingProposal(registry, model.model_id)) {
        continue;
      }

      std::vector<SeriesWindow> series;
      for (const auto& sid : model.signal_ids) {
        series.push_back(registry.SnapshotSignal(sid, source, now, true).dataset.ToWindow());
      }
      drift::RetrainInput input;
      input.model_id = model.model_id;
      input.model_type = model.model_type;
      input.current_version = model.version;
      input.next_version = registry.LatestVersion(model.model_id) + 1;
      input.spec = model.spec;
      input.params = model.params;
      input.current = models::DeserializeArtifact(registry.LoadArtifact(model.artifact_ref)).model;
      input.feedback = registry.FeedbackFor(model.model_id, now - kAlertDays * drift::kDayMs);
      const auto proposal = drift::ProposeRetrain(report, input, FeatureWindow::Align(series), now,
                                                  config.seed);
      registry.SaveProposal(proposal);
      out.proposal_ids.push_back(proposal.proposal_id);
    } catch (const Error& e) {
      out.skipped.push_back(model.model_id + ": " + e.what());
    }
  }
  return out;
}

drift::ApplyOutcome ApplyProposal(registry::Registry& registry, const std::string& proposal_id,
                                  std::optional<drift::Decision> decision, std::int64_t now) {
  auto proposal = registry.GetProposal(proposal_id);
  const auto outcome = drift::ApplyOrTimeout(proposal, decision, now);
  if (outcome == drift::ApplyOutcome::kPending) return outcome;
  if (outcome == drift::ApplyOutcome::kApplied) {
    const auto current = registry.GetModel(proposal.model_id);
    const auto artifact = models::DeserializeArtifact(proposal.candidate_artifact);
    registry::ModelRecord draft;
    draft.model_id = proposal.model_id;
    draft.model_type = proposal.model_type;
    draft.signal_ids = current.signal_ids;
    draft.spec = proposal.candidate_spec;
    draft.params = proposal.candidate_params;
    draft.channel_ref = current.channel_ref;
    draft.artifact_ref = registry.SaveArtifact(proposal.candidate_artifact);
    std::vector<SeriesWindow> series;
    for (const auto& sid : current.signal_ids) series.push_back(registry.LoadDataset(sid).ToWindow());
    draft.train_summary = BuildTrainSummary(*artifact.model, draft.spec, draft.model_type,
                                            FeatureWindow::Align(series), now);
    const auto record = registry.RegisterModel(draft, now, true);
    proposal.candidate_version = record.version;
  }
  registry.SaveProposal(proposal);
  return outcome;
}

std::vector<std::string> SweepExpiredProposals(registry::Registry& registry, std::int64_t now) {
  std::vector<std::string> applied;
  for (const auto& p : registry.ListProposals(drift::ProposalStatus::kPending)) {
    if (now >= p.expires_at &&
        ApplyProposal(registry, p.proposal_id, std::nullopt, now) == drift::ApplyOutcome::kApplied) {
      applied.push_back(p.proposal_id);
    }
  }
  return applied;
}

}  // namespace tickwatch::orchestrator
