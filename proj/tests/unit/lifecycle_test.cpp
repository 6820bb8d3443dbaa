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

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "tickwatch/orchestrator/lifecycle.hpp"

namespace tickwatch::orchestrator {
namespace {

using testing::CodeOf;
using testing::kDay;
using testing::kMinute;
using testing::Sandbox;
using testing::SeasonalSeries;

struct LifecycleFixture {
  Sandbox box;
  std::string signal_id;
  registry::ModelRecord model;

  LifecycleFixture() {
    box.now += kDay / 2;
    signal_id = box.AddSignal("cpu", SeasonalSeries(box.now - 8 * kDay + kMinute, 8 * 1440, 1));
    model = box.TrainArima(signal_id);
  }

  void MakeNoisy(int alerts) {
    for (int i = 0; i < alerts; ++i) {
      box.registry.RecordAlert(model.model_id, model.version, box.now - i * kMinute, "low", {});
    }
  }

  std::string ProposeOne() {
    const auto job = RunDriftJob(box.registry, box.metrics, box.now);
    EXPECT_EQ(job.proposal_ids.size(), 1u) << (job.skipped.empty() ? "" : job.skipped.front());
    return job.proposal_ids.empty() ? std::string() : job.proposal_ids.front();
  }
};

TEST(DriftJob, HealthyModelGetsReportButNoProposal) {
  LifecycleFixture fx;
  const auto job = RunDriftJob(fx.box.registry, fx.box.metrics, fx.box.now);
  ASSERT_EQ(job.reports.size(), 1u);
  EXPECT_EQ(job.reports[0].verdict, drift::DriftVerdict::kHealthy);
  EXPECT_TRUE(job.proposal_ids.empty());
  EXPECT_EQ(fx.box.registry.ListDriftReports(fx.model.model_id).size(), 1u);
}

TEST(DriftJob, ShiftedSignalIsDriftedAndProposed) {
  LifecycleFixture fx;
  const auto start = fx.box.now;
  for (int i = 1; i <= 1440; ++i) {
    fx.box.metrics.Append({"cpu", {{"src", "test"}}, start + i * kMinute, 40.0 + (i % 7)});
  }
  fx.box.now = start + 1440 * kMinute;
  const auto job = RunDriftJob(fx.box.registry, fx.box.metrics, fx.box.now);
  ASSERT_EQ(job.reports.size(), 1u);
  EXPECT_EQ(job.reports[0].verdict, drift::DriftVerdict::kDrifted);
  ASSERT_EQ(job.proposal_ids.size(), 1u);
  // A second run the same day does not stack another proposal.
  EXPECT_TRUE(RunDriftJob(fx.box.registry, fx.box.metrics, fx.box.now).proposal_ids.empty());
}

TEST(DriftJob, NoisyModelWithFalsePositivesWidensBoundary) {
  LifecycleFixture fx;
  fx.MakeNoisy(80);
  const auto alerts = fx.box.registry.ListAlerts(fx.model.model_id);
  for (int i = 0; i < 10; ++i) {
    fx.box.registry.RecordFeedback(alerts[static_cast<std::size_t>(i)].alert_id,
                                   i < 8 ? registry::FeedbackLabel::kFalsePositive
                                         : registry::FeedbackLabel::kTruePositive,
                                   "oncall", fx.box.now);
  }
  const auto id = fx.ProposeOne();
  const auto p = fx.box.registry.GetProposal(id);
  EXPECT_EQ(p.reason, drift::DriftVerdict::kNoisy);
  EXPECT_EQ(p.status, drift::ProposalStatus::kPending);
  EXPECT_EQ(p.candidate_version, 2);
  EXPECT_DOUBLE_EQ(p.candidate_params.at("iqr_multiplier").get<double>(), 1.25 * 1.5);
  EXPECT_EQ(p.candidate_spec.hold_tolerance, fx.model.spec.hold_tolerance + 1);
  EXPECT_EQ(fx.box.registry.GetModel(fx.model.model_id).active_version, 1);
}

TEST(ApplyProposal, ApproveActivatesCandidate) {
  LifecycleFixture fx;
  fx.MakeNoisy(80);
  const auto id = fx.ProposeOne();
  EXPECT_EQ(ApplyProposal(fx.box.registry, id, drift::Decision::kApprove, fx.box.now + kMinute),
            drift::ApplyOutcome::kApplied);
  const auto m = fx.box.registry.GetModel(fx.model.model_id);
  EXPECT_EQ(m.active_version, 2);
  EXPECT_TRUE(m.train_summary.at("distribution").is_object());
  EXPECT_EQ(fx.box.registry.GetProposal(id).status, drift::ProposalStatus::kApproved);
  EXPECT_EQ(CodeOf([&] { ApplyProposal(fx.box.registry, id, drift::Decision::kApprove, fx.box.now); }),
            ErrorCode::kInvalidState);
}

TEST(ApplyProposal, RejectLeavesRegistryUntouched) {
  LifecycleFixture fx;
  fx.MakeNoisy(80);
  const auto id = fx.ProposeOne();
  EXPECT_EQ(ApplyProposal(fx.box.registry, id, drift::Decision::kReject, fx.box.now + kMinute),
            drift::ApplyOutcome::kDiscarded);
  EXPECT_EQ(fx.box.registry.ListVersions(fx.model.model_id).size(), 1u);
  EXPECT_EQ(fx.box.registry.GetProposal(id).status, drift::ProposalStatus::kRejected);
}

TEST(ApplyProposal, TimeoutAutoApplies) {
  LifecycleFixture fx;
  fx.MakeNoisy(80);
  const auto id = fx.ProposeOne();
  EXPECT_TRUE(SweepExpiredProposals(fx.box.registry, fx.box.now + kDay - 1).empty());
  EXPECT_EQ(SweepExpiredProposals(fx.box.registry, fx.box.now + kDay), std::vector<std::string>{id});
  EXPECT_EQ(fx.box.registry.GetProposal(id).status, drift::ProposalStatus::kAutoApplied);
  EXPECT_EQ(fx.box.registry.GetModel(fx.model.model_id).active_version, 2);
}

}  // namespace
}  // namespace tickwatch::orchestrator
