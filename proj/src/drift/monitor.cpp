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

#include "tickwatch/drift/monitor.hpp"

#include <algorithm>
#include <cmath>

#include "tickwatch/core/error.hpp"
#include "tickwatch/core/timeseries.hpp"
#include "tickwatch/models/artifact.hpp"
#include "tickwatch/models/json_io.hpp"

namespace tickwatch::drift {
namespace {

constexpr double kWiden = 1.25;
constexpr double kTighten = 0.8;

DriftVerdict VerdictFromName(const std::string& name) {
  for (DriftVerdict v : {DriftVerdict::kHealthy, DriftVerdict::kDrifted, DriftVerdict::kQuiet,
                         DriftVerdict::kNoisy}) {
    if (name == DriftVerdictName(v)) return v;
  }
  Fail(ErrorCode::kInvalidInput, "unknown drift verdict '" + name + "'");
}

ProposalStatus StatusFromName(const std::string& name) {
  for (ProposalStatus s : {ProposalStatus::kPending, ProposalStatus::kApproved,
                           ProposalStatus::kRejected, ProposalStatus::kAutoApplied}) {
    if (name == ProposalStatusName(s)) return s;
  }
  Fail(ErrorCode::kInvalidInput, "unknown proposal status '" + name + "'");
}

nlohmann::json NullableSeries(const std::vector<double>& v) {
  nlohmann::json out = nlohmann::json::array();
  for (double x : v) out.push_back(std::isnan(x) ? nlohmann::json(nullptr) : nlohmann::json(x));
  return out;
}

std::vector<double> SeriesFromJson(const nlohmann::json& j) {
  std::vector<double> out;
  for (const auto& x : j) out.push_back(x.is_null() ? std::nan("") : x.get<double>());
  return out;
}

void ScaleBoundary(const std::string& model_type, nlohmann::json& params, double factor) {
  if (model_type == "iforest_mv") {
    const double c = params.value("contamination", 0.01) / factor;
    params["contamination"] = std::clamp(c, 1e-4, 0.5);
  } else {
    params["iqr_multiplier"] = params.value("iqr_multiplier", 1.5) * factor;
  }
}

}  // namespace

const char* DriftVerdictName(DriftVerdict v) {
  switch (v) {
    case DriftVerdict::kHealthy: return "healthy";
    case DriftVerdict::kDrifted: return "drifted";
    case DriftVerdict::kQuiet: return "quiet";
    case DriftVerdict::kNoisy: return "noisy";
  }
  return "healthy";
}

const char* ProposalStatusName(ProposalStatus s) {
  switch (s) {
    case ProposalStatus::kPending: return "pending";
    case ProposalStatus::kApproved: return "approved";
    case ProposalStatus::kRejected: return "rejected";
    case ProposalStatus::kAutoApplied: return "auto_applied";
  }
  return "pending";
}

nlohmann::json ReportToJson(const DriftReport& r) {
  return {{"model_id", r.model_id},       {"ks", r.ks},
          {"psi", r.psi},                 {"kl", r.kl},
          {"js", r.js},                   {"wasserstein", r.wasserstein},
          {"drift_votes", r.drift_votes}, {"alert_counts", r.alert_counts},
          {"daily_alert_count", r.daily_alert_count},
          {"verdict", DriftVerdictName(r.verdict)},
          {"evaluated_at", r.evaluated_at}};
}

DriftReport ReportFromJson(const nlohmann::json& j) {
  DriftReport r;
  try {
    r.model_id = j.at("model_id").get<std::string>();
    r.ks = j.at("ks").get<double>();
    r.psi = j.at("psi").get<double>();
    r.kl = j.at("kl").get<double>();
    r.js = j.at("js").get<double>();
    r.wasserstein = j.at("wasserstein").get<double>();
    r.drift_votes = j.at("drift_votes").get<int>();
    r.alert_counts = j.at("alert_counts").get<std::vector<int>>();
    r.daily_alert_count = j.at("daily_alert_count").get<int>();
    r.verdict = VerdictFromName(j.at("verdict").get<std::string>());
    r.evaluated_at = j.at("evaluated_at").get<std::int64_t>();
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kInvalidInput, std::string("malformed drift report: ") + e.what());
  }
  return r;
}

DriftReport EvaluateDrift(const std::string& model_id, const DistributionSummary& train,
                          std::span<const double> recent, std::span<const int> alert_counts,
                          std::int64_t model_age_ms, std::int64_t now,
                          const DriftThresholds& thresholds) {
  if (recent.size() < kMinRecentSamples) {
    Fail(ErrorCode::kInsufficientData, "drift evaluation needs at least 100 recent samples, got " +
                                           std::to_string(recent.size()));
  }
  if (alert_counts.empty() || alert_counts.size() > 7) {
    Fail(ErrorCode::kInvalidInput, "alert_counts must cover 1 to 7 days");
  }

  DriftReport r;
  r.model_id = model_id;
  r.evaluated_at = now;
  r.alert_counts.assign(alert_counts.begin(), alert_counts.end());

  const std::vector<double> q = BinProbabilities(train, recent);
  r.psi = Psi(train, q);
  r.kl = Kl(train.bin_probs, q);
  r.js = Js(train.bin_probs, q);
  // KS and W1 need the training sample itself; the summary's quantile
  // sketch stands in for it as equally weighted points.
  const std::vector<double>& train_proxy = train.quantile_sketch;
  if (train_proxy.empty()) Fail(ErrorCode::kInvalidInput, "summary lacks a quantile sketch");
  r.ks = KsStatistic(train_proxy, recent);
  r.wasserstein = Wasserstein1(train_proxy, recent);

  r.drift_votes = static_cast<int>(r.ks > thresholds.ks) + static_cast<int>(r.psi > thresholds.psi) +
                  static_cast<int>(r.kl > thresholds.kl) + static_cast<int>(r.js > thresholds.js) +
                  static_cast<int>(r.wasserstein > thresholds.wasserstein_std * train.std);

  std::vector<double> counts(alert_counts.begin(), alert_counts.end());
  const double median_count = Median(counts);
  r.daily_alert_count = static_cast<int>(std::lround(median_count));
  const bool all_zero = std::all_of(alert_counts.begin(), alert_counts.end(),
                                    [](int c) { return c == 0; });
  if (r.drift_votes >= thresholds.votes_needed) {
    r.verdict = DriftVerdict::kDrifted;
  } else if (alert_counts.size() == 7 && all_zero && model_age_ms > thresholds.quiet_min_age_ms) {
    r.verdict = DriftVerdict::kQuiet;
  } else if (median_count > thresholds.noisy_daily_count) {
    r.verdict = DriftVerdict::kNoisy;
  } else {
    r.verdict = DriftVerdict::kHealthy;
  }
  return r;
}

Refinement RefineParameters(const std::string& model_type, const detection::DetectorSpec& spec,
                            const nlohmann::json& params, DriftVerdict verdict,
                            const FeedbackTally& feedback) {
  Refinement out{spec, params.is_object() ? params : nlohmann::json::object()};
  const int total = feedback.true_positives + feedback.false_positives;
  if (total > 0 && 2 * feedback.false_positives >= total) {
    out.spec.hold_tolerance = std::min(spec.hold_tolerance + 1, spec.hold_window - 1);
    ScaleBoundary(model_type, out.params, kWiden);
  }
  if (verdict == DriftVerdict::kQuiet) ScaleBoundary(model_type, out.params, kTighten);
  return out;
}

nlohmann::json PreviewToJson(const Preview& p) {
  return {{"ts", p.ts},
          {"actual", p.actual},
          {"old_score", NullableSeries(p.old_score)},
          {"new_score", NullableSeries(p.new_score)},
          {"old_predicted", NullableSeries(p.old_predicted)},
          {"new_predicted", NullableSeries(p.new_predicted)},
          {"old_flag", p.old_flag},
          {"new_flag", p.new_flag},
          {"old_boundary", p.old_boundary ? BoundaryToJson(*p.old_boundary)
                                          : nlohmann::json(nullptr)},
          {"new_boundary", BoundaryToJson(p.new_boundary)}};
}

namespace {

Preview PreviewFromJson(const nlohmann::json& j) {
  Preview p;
  p.ts = j.at("ts").get<std::vector<std::int64_t>>();
  p.actual = j.at("actual").get<std::vector<double>>();
  p.old_score = SeriesFromJson(j.at("old_score"));
  p.new_score = SeriesFromJson(j.at("new_score"));
  p.old_predicted = SeriesFromJson(j.at("old_predicted"));
  p.new_predicted = SeriesFromJson(j.at("new_predicted"));
  p.old_flag = j.at("old_flag").get<std::vector<int>>();
  p.new_flag = j.at("new_flag").get<std::vector<int>>();
  if (!j.at("old_boundary").is_null()) p.old_boundary = BoundaryFromJson(j.at("old_boundary"));
  p.new_boundary = BoundaryFromJson(j.at("new_boundary"));
  return p;
}

void FillSide(const models::WindowScores& s, std::vector<double>& score,
              std::vector<double>& predicted, std::vector<int>& flag) {
  for (std::size_t i = 0; i < s.scores.size(); ++i) {
    score.push_back(s.valid[i] ? s.scores[i] : std::nan(""));
    predicted.push_back(s.predicted[i]);
    flag.push_back(s.valid[i] && !s.boundary.Contains(s.scores[i]) ? 1 : 0);
  }
}

}  // namespace

Preview BuildPreview(const models::DetectorModel* old_model, const models::DetectorModel& candidate,
                     const FeatureWindow& window) {
  Preview p;
  p.ts = window.ts();
  p.actual = window.values().column(0);
  const models::WindowScores fresh = candidate.ScoreWindow(window);
  FillSide(fresh, p.new_score, p.new_predicted, p.new_flag);
  p.new_boundary = fresh.boundary;
  if (old_model != nullptr) {
    const models::WindowScores prior = old_model->ScoreWindow(window);
    FillSide(prior, p.old_score, p.old_predicted, p.old_flag);
    p.old_boundary = prior.boundary;
  } else {
    p.old_score.assign(p.ts.size(), std::nan(""));
    p.old_predicted.assign(p.ts.size(), std::nan(""));
    p.old_flag.assign(p.ts.size(), 0);
  }
  return p;
}

nlohmann::json ProposalToJson(const RetrainProposal& p, bool include_preview) {
  nlohmann::json j{{"proposal_id", p.proposal_id},
                   {"model_id", p.model_id},
                   {"old_version", p.old_version},
                   {"candidate_version", p.candidate_version},
                   {"model_type", p.model_type},
                   {"candidate_spec", detection::SpecToJson(p.candidate_spec)},
                   {"candidate_params", p.candidate_params},
                   {"reason", DriftVerdictName(p.reason)},
                   {"created_at", p.created_at},
                   {"expires_at", p.expires_at},
                   {"status", ProposalStatusName(p.status)}};
  if (include_preview) {
    j["preview"] = PreviewToJson(p.preview);
    j["candidate_artifact"] = p.candidate_artifact;
  }
  return j;
}

RetrainProposal ProposalFromJson(const nlohmann::json& j) {
  RetrainProposal p;
  try {
    p.proposal_id = j.at("proposal_id").get<std::string>();
    p.model_id = j.at("model_id").get<std::string>();
    p.old_version = j.at("old_version").get<int>();
    p.candidate_version = j.at("candidate_version").get<int>();
    p.model_type = j.at("model_type").get<std::string>();
    p.candidate_spec = detection::SpecFromJson(j.at("candidate_spec"));
    p.candidate_params = j.at("candidate_params");
    p.reason = VerdictFromName(j.at("reason").get<std::string>());
    p.created_at = j.at("created_at").get<std::int64_t>();
    p.expires_at = j.at("expires_at").get<std::int64_t>();
    p.status = StatusFromName(j.at("status").get<std::string>());
    if (j.contains("preview")) p.preview = PreviewFromJson(j.at("preview"));
    p.candidate_artifact = j.value("candidate_artifact", std::string());
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kInvalidInput, std::string("malformed proposal: ") + e.what());
  }
  return p;
}

RetrainProposal ProposeRetrain(const DriftReport& report, const RetrainInput& input,
                               const FeatureWindow& snapshot, std::int64_t now,
                               std::uint64_t seed) {
  if (report.verdict == DriftVerdict::kHealthy) {
    Fail(ErrorCode::kInvalidState, "healthy model needs no retraining proposal");
  }
  const Refinement refined = RefineParameters(input.model_type, input.spec, input.params,
                                              report.verdict, input.feedback);
  const models::ModelPlugin& plugin = models::FindModelPlugin(input.model_type);
  models::ModelArtifact artifact;
  artifact.model_type = input.model_type;
  artifact.created_ts = now;
  artifact.model = plugin.fit(snapshot, refined.params, seed);
  artifact.config = {{"params", refined.params},
                     {"spec", detection::SpecToJson(refined.spec)},
                     {"trained_rows", snapshot.size()}};

  const auto preview_rows = static_cast<std::size_t>(kPreviewSpanMs / snapshot.step_ms());
  RetrainProposal p;
  p.model_id = input.model_id;
  p.old_version = input.current_version;
  p.candidate_version = input.next_version;
  p.proposal_id = input.model_id + "-v" + std::to_string(input.next_version) + "-" +
                  std::to_string(now);
  p.model_type = input.model_type;
  p.candidate_spec = refined.spec;
  p.candidate_params = refined.params;
  p.candidate_artifact = models::SerializeArtifact(artifact);
  p.reason = report.verdict;
  p.preview = BuildPreview(input.current.get(), *artifact.model, snapshot.Tail(preview_rows));
  p.created_at = now;
  p.expires_at = now + kProposalTtlMs;
  return p;
}

ApplyOutcome ApplyOrTimeout(RetrainProposal& proposal, std::optional<Decision> decision,
                            std::int64_t now) {
  if (proposal.status != ProposalStatus::kPending) {
    Fail(ErrorCode::kInvalidState, std::string("proposal is ") +
                                       ProposalStatusName(proposal.status));
  }
  if (now >= proposal.expires_at) {
    proposal.status = ProposalStatus::kAutoApplied;
    return ApplyOutcome::kApplied;
  }
  if (!decision) return ApplyOutcome::kPending;
  if (*decision == Decision::kApprove) {
    proposal.status = ProposalStatus::kApproved;
    return ApplyOutcome::kApplied;
  }
  proposal.status = ProposalStatus::kRejected;
  return ApplyOutcome::kDiscarded;
}

}  // namespace tickwatch::drift
