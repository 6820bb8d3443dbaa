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
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "tickwatch/core/feature_window.hpp"
#include "tickwatch/detection/detector.hpp"
#include "tickwatch/drift/statistics.hpp"
#include "tickwatch/models/model.hpp"

namespace tickwatch::drift {

inline constexpr std::int64_t kDayMs = 86'400'000;
inline constexpr std::size_t kMinRecentSamples = 100;

struct DriftThresholds {
  double ks = 0.2;
  double psi = 0.2;
  double kl = 0.5;
  double js = 0.1;
  double wasserstein_std = 0.5;  // multiple of the training std
  int votes_needed = 2;
  int noisy_daily_count = 50;
  std::int64_t quiet_min_age_ms = 7 * kDayMs;
};

enum class DriftVerdict { kHealthy, kDrifted, kQuiet, kNoisy };
const char* DriftVerdictName(DriftVerdict v);

struct DriftReport {
  std::string model_id;
  double ks = 0.0;
  double psi = 0.0;
  double kl = 0.0;
  double js = 0.0;
  double wasserstein = 0.0;
  int drift_votes = 0;
  std::vector<int> alert_counts;  // oldest first
  int daily_alert_count = 0;      // median of alert_counts
  DriftVerdict verdict = DriftVerdict::kHealthy;
  std::int64_t evaluated_at = 0;

  friend bool operator==(const DriftReport&, const DriftReport&) = default;
};

nlohmann::json ReportToJson(const DriftReport& r);
DriftReport ReportFromJson(const nlohmann::json& j);

// Pure: the same inputs give the same report. Throws InsufficientData when
// fewer than 100 recent samples are available.
DriftReport EvaluateDrift(const std::string& model_id, const DistributionSummary& train,
                          std::span<const double> recent, std::span<const int> alert_counts,
                          std::int64_t model_age_ms, std::int64_t now,
                          const DriftThresholds& thresholds = {});

struct FeedbackTally {
  int true_positives = 0;
  int false_positives = 0;
};

// Detector parameters adjusted from the report and feedback. The boundary
// multiplier is iqr_multiplier for arima_uv; for iforest_mv the contamination
// is divided by the same factor.
struct Refinement {
  detection::DetectorSpec spec;
  nlohmann::json params;
};
Refinement RefineParameters(const std::string& model_type, const detection::DetectorSpec& spec,
                            const nlohmann::json& params, DriftVerdict verdict,
                            const FeedbackTally& feedback);

// Paired old/new model output over the preview span, for charting.
struct Preview {
  std::vector<std::int64_t> ts;
  std::vector<double> actual;  // first signal
  std::vector<double> old_score, new_score;
  std::vector<double> old_predicted, new_predicted;
  std::vector<int> old_flag, new_flag;
  std::optional<Boundary> old_boundary;
  Boundary new_boundary;
};

nlohmann::json PreviewToJson(const Preview& p);

// `old_model` may be null (first onboarding preview).
Preview BuildPreview(const models::DetectorModel* old_model, const models::DetectorModel& candidate,
                     const FeatureWindow& window);

enum class ProposalStatus { kPending, kApproved, kRejected, kAutoApplied };
const char* ProposalStatusName(ProposalStatus s);

struct RetrainProposal {
  std::string proposal_id;
  std::string model_id;
  int old_version = 0;
  int candidate_version = 0;
  std::string model_type;
  detection::DetectorSpec candidate_spec;
  nlohmann::json candidate_params;
  std::string candidate_artifact;  // serialized ModelArtifact
  DriftVerdict reason = DriftVerdict::kDrifted;
  Preview preview;
  std::int64_t created_at = 0;
  std::int64_t expires_at = 0;
  ProposalStatus status = ProposalStatus::kPending;
};

nlohmann::json ProposalToJson(const RetrainProposal& p, bool include_preview = true);
RetrainProposal ProposalFromJson(const nlohmann::json& j);

struct RetrainInput {
  std::string model_id;
  std::string model_type;
  int current_version = 0;
  int next_version = 0;
  detection::DetectorSpec spec;
  nlohmann::json params;
  models::ModelPtr current;
  FeedbackTally feedback;
};

inline constexpr std::int64_t kProposalTtlMs = kDayMs;
inline constexpr std::int64_t kPreviewSpanMs = 3 * kDayMs;

// Fits a candidate on `snapshot` with refined parameters and previews both
// models over the trailing three days. FitFailure propagates.
RetrainProposal ProposeRetrain(const DriftReport& report, const RetrainInput& input,
                               const FeatureWindow& snapshot, std::int64_t now,
                               std::uint64_t seed);

enum class Decision { kApprove, kReject };
enum class ApplyOutcome { kPending, kApplied, kDiscarded };

// Advances a pending proposal. Once now >= expires_at the timeout has
// already fired, so a late decision still yields auto_applied. Throws
// InvalidState unless the proposal is pending.
ApplyOutcome ApplyOrTimeout(RetrainProposal& proposal, std::optional<Decision> decision,
                            std::int64_t now);

}  // namespace tickwatch::drift
