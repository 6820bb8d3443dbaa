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
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "tickwatch/drift/monitor.hpp"
#include "tickwatch/registry/dataset.hpp"
#include "tickwatch/registry/records.hpp"
#include "tickwatch/registry/selector.hpp"
#include "tickwatch/registry/storage.hpp"

namespace tickwatch::registry {

// Where snapshots read raw signal history from.
class MetricSource {
 public:
  virtual ~MetricSource() = default;
  // Points of the single series matching `selector` with start <= ts <= end.
  // Throws SourceUnavailable when the source cannot answer.
  virtual std::vector<TimePoint> FetchSeries(const Selector& selector, std::int64_t start,
                                             std::int64_t end) const = 0;
};

struct SnapshotResult {
  Dataset dataset;
  bool reused = false;  // same-day snapshot already present
};

// Per-type limits and defaults. Lengths are in samples.
struct ModelConfig {
  std::string model_type;
  std::size_t min_training_length = 0;
  std::size_t min_preview_length = 0;
  std::size_t min_prediction_step = 0;
  nlohmann::json default_params;
};
const ModelConfig& ModelConfigFor(const std::string& model_type);

// System of record for signals, datasets, models, artifacts, alerts,
// feedback, drift reports, proposals, action tokens and idempotent
// responses. Each store is an append-only JSONL log under `root`
// (replayed on open); an empty root keeps everything in memory.
//
// Mutations are serialized; readers see the last committed state.
class Registry {
 public:
  explicit Registry(std::filesystem::path root = {});

  const std::filesystem::path& root() const { return root_; }

  // Signals.
  SignalRecord RegisterSignal(const std::string& name, const std::string& query_expr,
                              std::int64_t now);
  SignalRecord UpdateSignal(const std::string& signal_id, std::optional<std::string> name,
                            std::optional<std::string> query_expr);
  void DeleteSignal(const std::string& signal_id);
  SignalRecord GetSignal(const std::string& signal_id) const;
  std::vector<SignalRecord> ListSignals() const;
  // Drains the queue of signals awaiting their first snapshot.
  std::vector<std::string> TakeSnapshotTasks();

  // Datasets. A snapshot keeps [now - 21d, now]; a second run on the same
  // UTC day returns the stored dataset unless forced.
  SnapshotResult SnapshotSignal(const std::string& signal_id, const MetricSource& source,
                                std::int64_t now, bool force = false);
  void PutDataset(const Dataset& dataset, std::int64_t now);
  Dataset LoadDataset(const std::string& signal_id) const;
  std::string LoadDatasetBytes(const std::string& signal_id) const;

  // Artifacts.
  std::string SaveArtifact(std::string_view bytes);
  std::string LoadArtifact(const std::string& ref) const;
  std::size_t artifact_reads() const { return artifacts_.reads(); }

  // Models. RegisterModel assigns the next version; the first version of a
  // model is always active, later ones when `activate` is set.
  ModelRecord RegisterModel(ModelRecord draft, std::int64_t now, bool activate = true);
  ModelRecord GetModel(const std::string& model_id, std::optional<int> version = std::nullopt) const;
  std::vector<ModelRecord> ListModels(bool include_deleted = false) const;
  std::vector<ModelRecord> ListVersions(const std::string& model_id) const;
  // Active version of every model with status active, each exactly once.
  std::vector<ModelRecord> GetActiveModels() const;
  ModelRecord SetModelStatus(const std::string& model_id, ModelStatus status);
  ModelRecord ActivateVersion(const std::string& model_id, int version);
  int LatestVersion(const std::string& model_id) const;

  // Alerts and feedback.
  AlertRecord RecordAlert(const std::string& model_id, int version, std::int64_t fired_at,
                          const std::string& severity, const nlohmann::json& verdict);
  AlertRecord RecordFeedback(const std::string& alert_id, FeedbackLabel label,
                             const std::string& by, std::int64_t at);
  AlertRecord SnoozeAlert(const std::string& alert_id, std::int64_t until, std::int64_t now);
  AlertRecord DeleteAlert(const std::string& alert_id);
  AlertRecord RecordDelivery(const std::string& alert_id, DeliveryStatus status, int attempts,
                             const std::string& error);
  AlertRecord GetAlert(const std::string& alert_id) const;
  std::vector<AlertRecord> ListAlerts(std::optional<std::string> model_id = std::nullopt,
                                      bool include_deleted = false) const;
  // Alerts fired per UTC day over the `days` days ending with now's day,
  // oldest first.
  std::vector<int> DailyAlertCounts(const std::string& model_id, std::int64_t now, int days) const;
  drift::FeedbackTally FeedbackFor(const std::string& model_id, std::int64_t since) const;

  // Drift reports are keyed by (model, UTC day): re-running a day replaces.
  void SaveDriftReport(const drift::DriftReport& report);
  std::vector<drift::DriftReport> ListDriftReports(std::optional<std::string> model_id = std::nullopt) const;
  void SaveProposal(const drift::RetrainProposal& proposal);
  drift::RetrainProposal GetProposal(const std::string& proposal_id) const;
  std::vector<drift::RetrainProposal> ListProposals(std::optional<drift::ProposalStatus> status = std::nullopt) const;

  // Single-use alert action tokens.
  ActionToken IssueActionToken(const std::string& alert_id, AlertAction action, std::int64_t now);
  // Marks the token used. NotFound for unknown tokens, Conflict when spent.
  ActionToken ConsumeActionToken(const std::string& token);

  // Responses remembered per idempotency key.
  std::optional<StoredResponse> LookupIdempotent(const std::string& key) const;
  void RememberIdempotent(const std::string& key, const StoredResponse& response);

  // Rewrites every log with only the current state.
  void Compact();

  // Throws Internal describing the first violated invariant.
  void CheckInvariants() const;

 private:
  struct ModelEntry {
    ModelStatus status = ModelStatus::kActive;
    int active_version = 0;
    std::map<int, ModelRecord> versions;
  };

  void Replay();
  void ApplyModelLine(const nlohmann::json& line);
  ModelRecord View(const ModelEntry& entry, int version) const;
  const ModelEntry& Entry(const std::string& model_id) const;
  AlertRecord& MutableAlert(const std::string& alert_id);
  void PersistAlert(const AlertRecord& a);
  std::filesystem::path DatasetPath(const std::string& signal_id) const;
  std::string NextId(const char* prefix, int& counter);

  std::filesystem::path root_;
  mutable std::shared_mutex mu_;

  JsonlLog signal_log_;
  JsonlLog model_log_;
  JsonlLog alert_log_;
  JsonlLog drift_log_;
  JsonlLog proposal_log_;
  JsonlLog token_log_;
  JsonlLog idempotency_log_;
  ArtifactStore artifacts_;

  std::map<std::string, SignalRecord> signals_;
  std::map<std::string, std::string> dataset_bytes_;  // in-memory mode
  std::deque<std::string> snapshot_queue_;
  std::map<std::string, ModelEntry> models_;
  std::map<std::string, AlertRecord> alerts_;
  std::map<std::string, drift::DriftReport> drift_reports_;  // key: model@day
  std::map<std::string, drift::RetrainProposal> proposals_;
  std::map<std::string, ActionToken> tokens_;
  std::map<std::string, StoredResponse> idempotent_;
  int signal_counter_ = 0;
  int model_counter_ = 0;
  int alert_counter_ = 0;
};

}  // namespace tickwatch::registry
