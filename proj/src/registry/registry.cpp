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

#include "tickwatch/registry/registry.hpp"

#include <openssl/rand.h>

#include <algorithm>
#include <cstdio>
#include <mutex>

#include "tickwatch/core/error.hpp"
#include "tickwatch/core/timeseries.hpp"

namespace tickwatch::registry {

namespace fs = std::filesystem;

namespace {

constexpr std::int64_t kDayMs = 86'400'000;

std::int64_t DayOf(std::int64_t ts) { return ts >= 0 ? ts / kDayMs : (ts - kDayMs + 1) / kDayMs; }

fs::path Sub(const fs::path& root, const char* name) { return root.empty() ? fs::path() : root / name; }

int SuffixNumber(const std::string& id) {
  const auto dash = id.rfind('-');
  if (dash == std::string::npos) return 0;
  try {
    return std::stoi(id.substr(dash + 1));
  } catch (const std::exception&) {
    return 0;
  }
}

std::string RandomToken() {
  unsigned char raw[16];
  if (RAND_bytes(raw, sizeof(raw)) != 1) Fail(ErrorCode::kInternal, "random source failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned char c : raw) {
    out.push_back(kHex[c >> 4]);
    out.push_back(kHex[c & 15]);
  }
  return out;
}

std::string DriftKey(const drift::DriftReport& r) {
  return r.model_id + "@" + std::to_string(DayOf(r.evaluated_at));
}

}  // namespace

const ModelConfig& ModelConfigFor(const std::string& model_type) {
  static const ModelConfig kArima{"arima_uv", 7 * 1440, 1440, 60,
                                  {{"order", nullptr}, {"iqr_multiplier", 1.5},
                                   {"seasonality_period", nullptr}}};
  static const ModelConfig kIforest{"iforest_mv", 7 * 1440, 256, 1,
                                    {{"num_trees", 100}, {"subsample_n", 256},
                                     {"contamination", 0.01}}};
  if (model_type == kArima.model_type) return kArima;
  if (model_type == kIforest.model_type) return kIforest;
  Fail(ErrorCode::kInvalidInput, "unknown model_type '" + model_type + "'");
}

Registry::Registry(fs::path root)
    : root_(std::move(root)),
      signal_log_(Sub(root_, "signals.jsonl")),
      model_log_(Sub(root_, "models.jsonl")),
      alert_log_(Sub(root_, "alerts.jsonl")),
      drift_log_(Sub(root_, "drift.jsonl")),
      proposal_log_(Sub(root_, "proposals.jsonl")),
      token_log_(Sub(root_, "tokens.jsonl")),
      idempotency_log_(Sub(root_, "idempotency.jsonl")),
      artifacts_(Sub(root_, "artifacts")) {
  if (!root_.empty()) {
    fs::create_directories(root_ / "datasets");
    Replay();
  }
}

std::string Registry::NextId(const char* prefix, int& counter) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s-%06d", prefix, ++counter);
  return buf;
}

void Registry::Replay() {
  for (const auto& line : signal_log_.ReadAll()) {
    SignalRecord r = SignalFromJson(line);
    signal_counter_ = std::max(signal_counter_, SuffixNumber(r.signal_id));
    signals_[r.signal_id] = std::move(r);
  }
  for (const auto& [id, s] : signals_) {
    if (!s.deleted && s.last_snapshot_at == 0) snapshot_queue_.push_back(id);
  }
  for (const auto& line : model_log_.ReadAll()) ApplyModelLine(line);
  for (const auto& line : alert_log_.ReadAll()) {
    AlertRecord a = AlertFromJson(line);
    alert_counter_ = std::max(alert_counter_, SuffixNumber(a.alert_id));
    alerts_[a.alert_id] = std::move(a);
  }
  for (const auto& line : drift_log_.ReadAll()) {
    drift::DriftReport r = drift::ReportFromJson(line);
    drift_reports_[DriftKey(r)] = std::move(r);
  }
  for (const auto& line : proposal_log_.ReadAll()) {
    drift::RetrainProposal p = drift::ProposalFromJson(line);
    proposals_[p.proposal_id] = std::move(p);
  }
  for (const auto& line : token_log_.ReadAll()) {
    ActionToken t = TokenFromJson(line);
    tokens_[t.token] = std::move(t);
  }
  for (const auto& line : idempotency_log_.ReadAll()) {
    idempotent_[line.at("key").get<std::string>()] =
        StoredResponse{line.at("status").get<int>(), line.at("body").get<std::string>()};
  }
}

void Registry::ApplyModelLine(const nlohmann::json& line) {
  const std::string op = line.value("op", std::string());
  if (op == "version") {
    ModelRecord r = ModelFromJson(line.at("record"));
    // A version whose artifact never became durable is dropped on replay.
    if (!artifacts_.Contains(r.artifact_ref)) return;
    model_counter_ = std::max(model_counter_, SuffixNumber(r.model_id));
    ModelEntry& entry = models_[r.model_id];
    const int v = r.version;
    entry.versions[v] = std::move(r);
    if (entry.versions.size() == 1 || line.value("activate", false)) entry.active_version = v;
  } else if (op == "state") {
    const auto it = models_.find(line.at("model_id").get<std::string>());
    if (it == models_.end()) return;
    it->second.status = ModelStatusFromName(line.at("status").get<std::string>());
    const int v = line.at("active_version").get<int>();
    if (it->second.versions.count(v) > 0) it->second.active_version = v;
  }
}

// Signals ------------------------------------------------------------------

SignalRecord Registry::RegisterSignal(const std::string& name, const std::string& query_expr,
                                      std::int64_t now) {
  if (name.empty()) Fail(ErrorCode::kInvalidInput, "signal name is required");
  ParseSelector(query_expr);
  std::unique_lock lock(mu_);
  for (const auto& [id, s] : signals_) {
    if (!s.deleted && s.name == name) Fail(ErrorCode::kConflict, "signal '" + name + "' exists");
  }
  int counter = signal_counter_;
  SignalRecord r{NextId("sig", counter), name, query_expr, now, 0, false};
  signal_log_.Append(ToJson(r));
  signal_counter_ = counter;
  signals_[r.signal_id] = r;
  snapshot_queue_.push_back(r.signal_id);
  return r;
}

SignalRecord Registry::UpdateSignal(const std::string& signal_id, std::optional<std::string> name,
                                    std::optional<std::string> query_expr) {
  if (query_expr) ParseSelector(*query_expr);
  std::unique_lock lock(mu_);
  auto it = signals_.find(signal_id);
  if (it == signals_.end() || it->second.deleted) Fail(ErrorCode::kNotFound, "signal " + signal_id);
  SignalRecord r = it->second;
  if (name && *name != r.name) {
    for (const auto& [id, s] : signals_) {
      if (!s.deleted && s.name == *name) Fail(ErrorCode::kConflict, "signal '" + *name + "' exists");
    }
    r.name = *name;
  }
  if (query_expr) r.query_expr = *query_expr;
  signal_log_.Append(ToJson(r));
  it->second = r;
  return r;
}

void Registry::DeleteSignal(const std::string& signal_id) {
  std::unique_lock lock(mu_);
  auto it = signals_.find(signal_id);
  if (it == signals_.end() || it->second.deleted) Fail(ErrorCode::kNotFound, "signal " + signal_id);
  SignalRecord r = it->second;
  r.deleted = true;
  signal_log_.Append(ToJson(r));
  it->second = r;
}

SignalRecord Registry::GetSignal(const std::string& signal_id) const {
  std::shared_lock lock(mu_);
  const auto it = signals_.find(signal_id);
  if (it == signals_.end() || it->second.deleted) Fail(ErrorCode::kNotFound, "signal " + signal_id);
  return it->second;
}

std::vector<SignalRecord> Registry::ListSignals() const {
  std::shared_lock lock(mu_);
  std::vector<SignalRecord> out;
  for (const auto& [id, s] : signals_) {
    if (!s.deleted) out.push_back(s);
  }
  return out;
}

std::vector<std::string> Registry::TakeSnapshotTasks() {
  std::unique_lock lock(mu_);
  std::vector<std::string> out(snapshot_queue_.begin(), snapshot_queue_.end());
  snapshot_queue_.clear();
  return out;
}

// Datasets -----------------------------------------------------------------

fs::path Registry::DatasetPath(const std::string& signal_id) const {
  return root_ / "datasets" / (signal_id + ".csv");
}

SnapshotResult Registry::SnapshotSignal(const std::string& signal_id, const MetricSource& source,
                                        std::int64_t now, bool force) {
  const SignalRecord signal = GetSignal(signal_id);
  if (!force && signal.last_snapshot_at != 0 && DayOf(signal.last_snapshot_at) == DayOf(now)) {
    return SnapshotResult{LoadDataset(signal_id), true};
  }
  const Selector selector = ParseSelector(signal.query_expr);
  std::vector<TimePoint> points = source.FetchSeries(selector, now - kSnapshotHorizonMs, now);
  std::erase_if(points, [&](const TimePoint& p) { return p.ts < now - kSnapshotHorizonMs || p.ts > now; });
  if (points.empty()) {
    Fail(ErrorCode::kInsufficientData, "no data for signal " + signal_id + " in the snapshot window");
  }
  Dataset d;
  d.signal_id = signal_id;
  d.points = std::move(points);
  d.start_ts = d.points.front().ts;
  if (d.points.size() >= 2) {
    std::vector<double> gaps;
    for (std::size_t i = 1; i < d.points.size(); ++i) {
      gaps.push_back(static_cast<double>(d.points[i].ts - d.points[i - 1].ts));
    }
    d.step_ms = static_cast<std::int64_t>(Median(gaps));
  }
  PutDataset(d, now);
  return SnapshotResult{d, false};
}

void Registry::PutDataset(const Dataset& input, std::int64_t now) {
  Dataset d = input;
  if (!d.points.empty()) {
    const std::int64_t cutoff = d.points.back().ts - kSnapshotHorizonMs;
    std::erase_if(d.points, [&](const TimePoint& p) { return p.ts < cutoff; });
    d.start_ts = d.points.front().ts;
  }
  ParseDataset(WriteDataset(d));  // same validation as a file read back
  const std::string bytes = WriteDataset(d);
  std::unique_lock lock(mu_);
  auto it = signals_.find(d.signal_id);
  if (it == signals_.end() || it->second.deleted) Fail(ErrorCode::kNotFound, "signal " + d.signal_id);
  if (root_.empty()) {
    dataset_bytes_[d.signal_id] = bytes;
  } else {
    WriteFileAtomic(DatasetPath(d.signal_id), bytes);
  }
  SignalRecord r = it->second;
  r.last_snapshot_at = now;
  signal_log_.Append(ToJson(r));
  it->second = r;
}

std::string Registry::LoadDatasetBytes(const std::string& signal_id) const {
  std::shared_lock lock(mu_);
  if (root_.empty()) {
    const auto it = dataset_bytes_.find(signal_id);
    if (it == dataset_bytes_.end()) Fail(ErrorCode::kNotFound, "no dataset for " + signal_id);
    return it->second;
  }
  if (!fs::exists(DatasetPath(signal_id))) Fail(ErrorCode::kNotFound, "no dataset for " + signal_id);
  return ReadFile(DatasetPath(signal_id));
}

Dataset Registry::LoadDataset(const std::string& signal_id) const {
  return ParseDataset(LoadDatasetBytes(signal_id));
}

// Artifacts ----------------------------------------------------------------

std::string Registry::SaveArtifact(std::string_view bytes) { return artifacts_.Save(bytes); }

std::string Registry::LoadArtifact(const std::string& ref) const { return artifacts_.Load(ref); }

// Models -------------------------------------------------------------------

ModelRecord Registry::View(const ModelEntry& entry, int version) const {
  ModelRecord r = entry.versions.at(version);
  r.status = entry.status;
  r.active_version = entry.active_version;
  return r;
}

const Registry::ModelEntry& Registry::Entry(const std::string& model_id) const {
  const auto it = models_.find(model_id);
  if (it == models_.end()) Fail(ErrorCode::kNotFound, "model " + model_id);
  return it->second;
}

ModelRecord Registry::RegisterModel(ModelRecord draft, std::int64_t now, bool activate) {
  ModelConfigFor(draft.model_type);
  const bool multivariate = draft.model_type == "iforest_mv";
  if (draft.signal_ids.empty()) Fail(ErrorCode::kInvalidInput, "model needs at least one signal");
  if (multivariate != (draft.signal_ids.size() > 1)) {
    Fail(ErrorCode::kInvalidInput, draft.model_type + " with " +
                                       std::to_string(draft.signal_ids.size()) + " signal(s)");
  }
  if (!artifacts_.Contains(draft.artifact_ref)) {
    Fail(ErrorCode::kNotFound, "artifact '" + draft.artifact_ref + "' not found");
  }
  std::unique_lock lock(mu_);
  for (const auto& sid : draft.signal_ids) {
    const auto it = signals_.find(sid);
    if (it == signals_.end() || it->second.deleted) Fail(ErrorCode::kNotFound, "signal " + sid);
  }
  int counter = model_counter_;
  if (draft.model_id.empty()) draft.model_id = NextId("mdl", counter);
  int version = 1;
  if (const auto it = models_.find(draft.model_id); it != models_.end()) {
    if (it->second.status == ModelStatus::kDeleted) {
      Fail(ErrorCode::kInvalidState, "model " + draft.model_id + " is deleted");
    }
    version = it->second.versions.rbegin()->first + 1;
  }
  draft.version = version;
  draft.created_at = now;
  draft.spec.model_id = draft.model_id;
  draft.spec.model_version = version;
  draft.spec.flow = multivariate ? detection::Flow::kMultivariate : detection::Flow::kUnivariate;
  draft.spec.Validate();
  const nlohmann::json line{{"op", "version"}, {"record", ToJson(draft)}, {"activate", activate}};
  model_log_.Append(line);
  model_counter_ = counter;
  ApplyModelLine(line);
  return View(models_.at(draft.model_id), version);
}

ModelRecord Registry::GetModel(const std::string& model_id, std::optional<int> version) const {
  std::shared_lock lock(mu_);
  const ModelEntry& entry = Entry(model_id);
  const int v = version.value_or(entry.active_version);
  if (entry.versions.count(v) == 0) {
    Fail(ErrorCode::kNotFound, "model " + model_id + " has no version " + std::to_string(v));
  }
  return View(entry, v);
}

std::vector<ModelRecord> Registry::ListModels(bool include_deleted) const {
  std::shared_lock lock(mu_);
  std::vector<ModelRecord> out;
  for (const auto& [id, entry] : models_) {
    if (include_deleted || entry.status != ModelStatus::kDeleted) {
      out.push_back(View(entry, entry.active_version));
    }
  }
  return out;
}

std::vector<ModelRecord> Registry::ListVersions(const std::string& model_id) const {
  std::shared_lock lock(mu_);
  const ModelEntry& entry = Entry(model_id);
  std::vector<ModelRecord> out;
  for (const auto& [v, r] : entry.versions) out.push_back(View(entry, v));
  return out;
}

std::vector<ModelRecord> Registry::GetActiveModels() const {
  std::shared_lock lock(mu_);
  std::vector<ModelRecord> out;
  for (const auto& [id, entry] : models_) {
    if (entry.status == ModelStatus::kActive) out.push_back(View(entry, entry.active_version));
  }
  return out;
}

int Registry::LatestVersion(const std::string& model_id) const {
  std::shared_lock lock(mu_);
  return Entry(model_id).versions.rbegin()->first;
}

ModelRecord Registry::SetModelStatus(const std::string& model_id, ModelStatus status) {
  std::unique_lock lock(mu_);
  const ModelEntry& entry = Entry(model_id);
  if (entry.status == ModelStatus::kDeleted && status != ModelStatus::kDeleted) {
    Fail(ErrorCode::kInvalidState, "model " + model_id + " is deleted");
  }
  const nlohmann::json line{{"op", "state"},
                            {"model_id", model_id},
                            {"status", ModelStatusName(status)},
                            {"active_version", entry.active_version}};
  model_log_.Append(line);
  ApplyModelLine(line);
  return View(entry, entry.active_version);
}

ModelRecord Registry::ActivateVersion(const std::string& model_id, int version) {
  std::unique_lock lock(mu_);
  const ModelEntry& entry = Entry(model_id);
  if (entry.versions.count(version) == 0) {
    Fail(ErrorCode::kNotFound, "model " + model_id + " has no version " + std::to_string(version));
  }
  if (entry.status == ModelStatus::kDeleted) Fail(ErrorCode::kInvalidState, "model is deleted");
  const nlohmann::json line{{"op", "state"},
                            {"model_id", model_id},
                            {"status", ModelStatusName(entry.status)},
                            {"active_version", version}};
  model_log_.Append(line);
  ApplyModelLine(line);
  return View(entry, version);
}

// Alerts -------------------------------------------------------------------

AlertRecord& Registry::MutableAlert(const std::string& alert_id) {
  const auto it = alerts_.find(alert_id);
  if (it == alerts_.end()) Fail(ErrorCode::kNotFound, "alert " + alert_id);
  return it->second;
}

void Registry::PersistAlert(const AlertRecord& a) {
  alert_log_.Append(ToJson(a));
  alerts_[a.alert_id] = a;
}

AlertRecord Registry::RecordAlert(const std::string& model_id, int version, std::int64_t fired_at,
                                  const std::string& severity, const nlohmann::json& verdict) {
  std::unique_lock lock(mu_);
  const ModelEntry& entry = Entry(model_id);
  if (entry.versions.count(version) == 0) {
    Fail(ErrorCode::kNotFound, "model " + model_id + " has no version " + std::to_string(version));
  }
  int counter = alert_counter_;
  AlertRecord a;
  a.alert_id = NextId("alr", counter);
  a.model_id = model_id;
  a.version = version;
  a.fired_at = fired_at;
  a.severity = severity;
  a.verdict = verdict;
  PersistAlert(a);
  alert_counter_ = counter;
  return a;
}

AlertRecord Registry::RecordFeedback(const std::string& alert_id, FeedbackLabel label,
                                     const std::string& by, std::int64_t at) {
  std::unique_lock lock(mu_);
  AlertRecord a = MutableAlert(alert_id);
  if (a.feedback) Fail(ErrorCode::kConflict, "alert " + alert_id + " already has feedback");
  if (a.state == AlertState::kDeleted) Fail(ErrorCode::kInvalidState, "alert is deleted");
  a.feedback = Feedback{label, by, at};
  PersistAlert(a);
  return a;
}

AlertRecord Registry::SnoozeAlert(const std::string& alert_id, std::int64_t until, std::int64_t now) {
  if (until <= now) Fail(ErrorCode::kInvalidInput, "snooze must end in the future");
  std::unique_lock lock(mu_);
  AlertRecord a = MutableAlert(alert_id);
  if (a.EffectiveState(now) != AlertState::kOpen) {
    Fail(ErrorCode::kInvalidState, std::string("alert is ") + AlertStateName(a.EffectiveState(now)));
  }
  a.state = AlertState::kSnoozed;
  a.snoozed_until = until;
  PersistAlert(a);
  return a;
}

AlertRecord Registry::DeleteAlert(const std::string& alert_id) {
  std::unique_lock lock(mu_);
  AlertRecord a = MutableAlert(alert_id);
  if (a.state == AlertState::kDeleted) return a;
  a.state = AlertState::kDeleted;
  PersistAlert(a);
  return a;
}

AlertRecord Registry::RecordDelivery(const std::string& alert_id, DeliveryStatus status, int attempts,
                                     const std::string& error) {
  std::unique_lock lock(mu_);
  AlertRecord a = MutableAlert(alert_id);
  a.delivery = status;
  a.delivery_attempts = attempts;
  a.delivery_error = error;
  PersistAlert(a);
  return a;
}

AlertRecord Registry::GetAlert(const std::string& alert_id) const {
  std::shared_lock lock(mu_);
  const auto it = alerts_.find(alert_id);
  if (it == alerts_.end()) Fail(ErrorCode::kNotFound, "alert " + alert_id);
  return it->second;
}

std::vector<AlertRecord> Registry::ListAlerts(std::optional<std::string> model_id,
                                              bool include_deleted) const {
  std::shared_lock lock(mu_);
  std::vector<AlertRecord> out;
  for (const auto& [id, a] : alerts_) {
    if (model_id && a.model_id != *model_id) continue;
    if (!include_deleted && a.state == AlertState::kDeleted) continue;
    out.push_back(a);
  }
  return out;
}

std::vector<int> Registry::DailyAlertCounts(const std::string& model_id, std::int64_t now,
                                            int days) const {
  std::shared_lock lock(mu_);
  std::vector<int> counts(static_cast<std::size_t>(std::max(days, 0)), 0);
  const std::int64_t today = DayOf(now);
  for (const auto& [id, a] : alerts_) {
    if (a.model_id != model_id) continue;
    const std::int64_t age = today - DayOf(a.fired_at);
    if (age >= 0 && age < days) ++counts[static_cast<std::size_t>(days - 1 - age)];
  }
  return counts;
}

drift::FeedbackTally Registry::FeedbackFor(const std::string& model_id, std::int64_t since) const {
  std::shared_lock lock(mu_);
  drift::FeedbackTally tally;
  for (const auto& [id, a] : alerts_) {
    if (a.model_id != model_id || !a.feedback || a.feedback->at < since) continue;
    if (a.feedback->label == FeedbackLabel::kTruePositive) {
      ++tally.true_positives;
    } else {
      ++tally.false_positives;
    }
  }
  return tally;
}

// Drift --------------------------------------------------------------------

void Registry::SaveDriftReport(const drift::DriftReport& report) {
  std::unique_lock lock(mu_);
  drift_log_.Append(drift::ReportToJson(report));
  drift_reports_[DriftKey(report)] = report;
}

std::vector<drift::DriftReport> Registry::ListDriftReports(std::optional<std::string> model_id) const {
  std::shared_lock lock(mu_);
  std::vector<drift::DriftReport> out;
  for (const auto& [key, r] : drift_reports_) {
    if (!model_id || r.model_id == *model_id) out.push_back(r);
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return std::tie(a.evaluated_at, a.model_id) < std::tie(b.evaluated_at, b.model_id);
  });
  return out;
}

void Registry::SaveProposal(const drift::RetrainProposal& proposal) {
  std::unique_lock lock(mu_);
  proposal_log_.Append(drift::ProposalToJson(proposal));
  proposals_[proposal.proposal_id] = proposal;
}

drift::RetrainProposal Registry::GetProposal(const std::string& proposal_id) const {
  std::shared_lock lock(mu_);
  const auto it = proposals_.find(proposal_id);
  if (it == proposals_.end()) Fail(ErrorCode::kNotFound, "proposal " + proposal_id);
  return it->second;
}

std::vector<drift::RetrainProposal> Registry::ListProposals(
    std::optional<drift::ProposalStatus> status) const {
  std::shared_lock lock(mu_);
  std::vector<drift::RetrainProposal> out;
  for (const auto& [id, p] : proposals_) {
    if (!status || p.status == *status) out.push_back(p);
  }
  return out;
}

// Tokens and idempotency ---------------------------------------------------

ActionToken Registry::IssueActionToken(const std::string& alert_id, AlertAction action,
                                       std::int64_t now) {
  std::unique_lock lock(mu_);
  if (alerts_.count(alert_id) == 0) Fail(ErrorCode::kNotFound, "alert " + alert_id);
  ActionToken t{RandomToken(), alert_id, action, now, false};
  token_log_.Append(ToJson(t));
  tokens_[t.token] = t;
  return t;
}

ActionToken Registry::ConsumeActionToken(const std::string& token) {
  std::unique_lock lock(mu_);
  const auto it = tokens_.find(token);
  if (it == tokens_.end()) Fail(ErrorCode::kNotFound, "unknown action token");
  if (it->second.used) Fail(ErrorCode::kConflict, "action token already used");
  ActionToken t = it->second;
  t.used = true;
  token_log_.Append(ToJson(t));
  it->second = t;
  return t;
}

std::optional<StoredResponse> Registry::LookupIdempotent(const std::string& key) const {
  std::shared_lock lock(mu_);
  const auto it = idempotent_.find(key);
  if (it == idempotent_.end()) return std::nullopt;
  return it->second;
}

void Registry::RememberIdempotent(const std::string& key, const StoredResponse& response) {
  std::unique_lock lock(mu_);
  if (idempotent_.count(key) > 0) return;
  idempotency_log_.Append({{"key", key}, {"status", response.status}, {"body", response.body}});
  idempotent_[key] = response;
}

// Maintenance --------------------------------------------------------------

void Registry::Compact() {
  std::unique_lock lock(mu_);
  std::vector<nlohmann::json> lines;
  for (const auto& [id, s] : signals_) lines.push_back(ToJson(s));
  signal_log_.Rewrite(lines);

  lines.clear();
  for (const auto& [id, entry] : models_) {
    for (const auto& [v, r] : entry.versions) {
      lines.push_back({{"op", "version"}, {"record", ToJson(r)}, {"activate", v == entry.active_version}});
    }
    lines.push_back({{"op", "state"},
                     {"model_id", id},
                     {"status", ModelStatusName(entry.status)},
                     {"active_version", entry.active_version}});
  }
  model_log_.Rewrite(lines);

  lines.clear();
  for (const auto& [id, a] : alerts_) lines.push_back(ToJson(a));
  alert_log_.Rewrite(lines);
  lines.clear();
  for (const auto& [key, r] : drift_reports_) lines.push_back(drift::ReportToJson(r));
  drift_log_.Rewrite(lines);
  lines.clear();
  for (const auto& [id, p] : proposals_) lines.push_back(drift::ProposalToJson(p));
  proposal_log_.Rewrite(lines);
  lines.clear();
  for (const auto& [id, t] : tokens_) lines.push_back(ToJson(t));
  token_log_.Rewrite(lines);
  lines.clear();
  for (const auto& [key, r] : idempotent_) {
    lines.push_back({{"key", key}, {"status", r.status}, {"body", r.body}});
  }
  idempotency_log_.Rewrite(lines);
}

void Registry::CheckInvariants() const {
  std::shared_lock lock(mu_);
  auto broken = [](const std::string& what) { Fail(ErrorCode::kInternal, "invariant: " + what); };
  std::map<std::string, int> names;
  for (const auto& [id, s] : signals_) {
    if (!s.deleted && ++names[s.name] > 1) broken("duplicate signal name " + s.name);
  }
  for (const auto& [id, entry] : models_) {
    if (entry.versions.empty()) broken("model " + id + " without versions");
    if (entry.versions.count(entry.active_version) != 1) broken("model " + id + " active version missing");
    for (const auto& [v, r] : entry.versions) {
      if (!artifacts_.Contains(r.artifact_ref)) broken("dangling artifact on " + id);
      for (const auto& sid : r.signal_ids) {
        if (signals_.count(sid) == 0) broken("model " + id + " references unknown signal " + sid);
      }
    }
  }
  for (const auto& [id, a] : alerts_) {
    if (models_.count(a.model_id) == 0) broken("alert " + id + " references unknown model");
  }
}

}  // namespace tickwatch::registry
