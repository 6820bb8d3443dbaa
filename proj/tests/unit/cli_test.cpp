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
#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "json.hpp"

namespace {

using nlohmann::json;

struct Run {
  int exit_code = -1;
  std::string out;
};

Run Cli(const std::string& args) {
  const std::string command = std::string(TICKWATCH_CLI) + " " + args + " 2>/dev/null";
  Run r;
  FILE* pipe = ::popen(command.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) r.out.append(buf, n);
  const int status = ::pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::vector<json> Lines(const std::string& text) {
  std::vector<json> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) out.push_back(json::parse(line));
  }
  return out;
}

// 8 days of a daily wave with labeled 4-row spikes on the last day.
void WriteLabeledCsv(const std::string& path) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> eps(0.0, 0.3);
  std::ofstream f(path);
  f << "ts_ms,cpu,label\n";
  for (int i = 0; i < 8 * 1440; ++i) {
    const std::int64_t ts = tickwatch::testing::kEpoch + static_cast<std::int64_t>(i) * 60'000;
    double v = 10.0 + 3.0 * std::sin(2.0 * M_PI * (i % 1440) / 1440.0) + eps(rng);
    int label = 0;
    if (i >= 7 * 1440 + 100 && (i - 7 * 1440 - 100) % 150 < 4 && i + 4 < 8 * 1440) {
      v += 8.0;
      label = 1;
    }
    f << ts << ',' << v << ',' << label << '\n';
  }
}

TEST(Cli, ReplayTickLinesAgreeWithSummary) {
  tickwatch::testing::TempDir dir("tickwatch_cli");
  std::filesystem::create_directories(dir.path());
  const std::string csv = (dir.path() / "cpu.csv").string();
  WriteLabeledCsv(csv);
  const auto r = Cli("replay --dataset " + csv +
                     " --train-rows 10080 --ticks --output json-lines"
                     " --params '{\"order\":{\"p\":1,\"d\":0,\"q\":0},\"seasonality_period\":1440}'"
                     " --spec '{\"seasonality_period\":1440,\"hold_window\":3}'");
  ASSERT_EQ(r.exit_code, 0) << r.out;
  const auto lines = Lines(r.out);
  ASSERT_EQ(lines.size(), 1441u);
  double tp = 0, fp = 0, tn = 0, fn = 0;
  for (std::size_t i = 0; i + 1 < lines.size(); ++i) {
    const int p = lines[i].at("predicted");
    const int l = lines[i].at("label");
    tp += p && l;
    fp += p && !l;
    tn += !p && !l;
    fn += !p && l;
  }
  const auto& summary = lines.back();
  EXPECT_EQ(summary.at("event"), "replay_summary");
  EXPECT_DOUBLE_EQ(summary.at("balanced_accuracy").get<double>(), 0.5 * (tp / (tp + fn) + tn / (tn + fp)));
  EXPECT_EQ(summary.at("anomalies").get<double>(), tp + fp);
}

TEST(Cli, OnboardTrainPreviewRoundTrip) {
  tickwatch::testing::TempDir dir("tickwatch_cli");
  std::filesystem::create_directories(dir.path());
  const std::string csv = (dir.path() / "cpu.csv").string();
  const std::string data = (dir.path() / "data").string();
  WriteLabeledCsv(csv);
  auto r = Cli("onboard --csv " + csv + " --data-dir " + data + " --output json-lines");
  ASSERT_EQ(r.exit_code, 0);
  const auto onboarded = Lines(r.out);
  ASSERT_EQ(onboarded.size(), 1u);  // the label column is not a signal
  const std::string sid = onboarded[0].at("signal_id");
  EXPECT_EQ(onboarded[0].at("points"), 8 * 1440);

  r = Cli("train --data-dir " + data + " --signals " + sid +
          " --params '{\"order\":{\"p\":1,\"d\":0,\"q\":0}}' --output json-lines");
  ASSERT_EQ(r.exit_code, 0);
  EXPECT_EQ(Lines(r.out)[0].at("version"), 1);
  r = Cli("train --data-dir " + data + " --signals " + sid +
          " --params '{\"order\":{\"p\":1,\"d\":0,\"q\":0}}' --output json-lines");
  ASSERT_EQ(r.exit_code, 0);
  EXPECT_EQ(Lines(r.out)[0].at("version"), 1);  // a new model, not a version bump
  EXPECT_EQ(Lines(r.out)[0].at("model_id"), "mdl-000002");

  r = Cli("preview --data-dir " + data + " --signals " + sid +
          " --params '{\"order\":{\"p\":1,\"d\":0,\"q\":0}}' --series --output json-lines");
  ASSERT_EQ(r.exit_code, 0);
  const auto preview = Lines(r.out)[0];
  EXPECT_EQ(preview.at("rows"), 3 * 1440);
  EXPECT_EQ(preview.at("series").at("flag").size(), 3u * 1440u);
}

TEST(Cli, BenchAndChaosReport) {
  auto r = Cli("bench --models 60 --ticks 2 --output json-lines");
  ASSERT_EQ(r.exit_code, 0);
  auto lines = Lines(r.out);
  ASSERT_EQ(lines.size(), 3u);
  EXPECT_EQ(lines.back().at("cache").at("hit_ratio"), 1.0);

  r = Cli("chaos --kill-leader --seed 11 --nodes 4 --loss 0.1 --runs 4 --output json-lines");
  ASSERT_EQ(r.exit_code, 0);
  lines = Lines(r.out);
  ASSERT_EQ(lines.size(), 5u);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_TRUE(lines[i].at("passed").get<bool>());
    EXPECT_NE(lines[i].at("new_leader"), lines[i].at("old_leader"));
  }
  EXPECT_EQ(lines.back().at("failed"), 0);
}

TEST(Cli, FailuresExitNonzero) {
  EXPECT_NE(Cli("").exit_code, 0);
  EXPECT_NE(Cli("chaos --seed 1").exit_code, 0);
  EXPECT_NE(Cli("replay --dataset /nonexistent/x.csv").exit_code, 0);
  EXPECT_NE(Cli("bench --models 0").exit_code, 0);
  EXPECT_NE(Cli("train --signals sig-x").exit_code, 0);
  EXPECT_NE(Cli("replay --dataset /dev/null --speed fast").exit_code, 0);
}

}  // namespace
