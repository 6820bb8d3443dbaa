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

#include "tickwatch/registry/dataset.hpp"

#include <charconv>
#include <cmath>

#include "json.hpp"
#include "tickwatch/core/error.hpp"

namespace tickwatch::registry {
namespace {

std::vector<std::string_view> SplitLines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = end + 1;
  }
  return lines;
}

std::vector<std::string_view> SplitFields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    std::string_view f = line.substr(start, comma == std::string_view::npos ? line.size() - start
                                                                           : comma - start);
    while (!f.empty() && f.front() == ' ') f.remove_prefix(1);
    while (!f.empty() && f.back() == ' ') f.remove_suffix(1);
    out.push_back(f);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

bool ParseInt(std::string_view s, std::int64_t& out) {
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

bool ParseDouble(std::string_view s, double& out) {
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size() && std::isfinite(out);
}

[[noreturn]] void BadLine(std::size_t line_no, const std::string& what) {
  Fail(ErrorCode::kInvalidInput, "line " + std::to_string(line_no) + ": " + what);
}

}  // namespace

std::string FormatDouble(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string WriteDataset(const Dataset& d) {
  nlohmann::json header{{"signal_id", d.signal_id}, {"start_ts", d.start_ts}, {"step_ms", d.step_ms}};
  std::string out = header.dump();
  out.push_back('\n');
  for (const TimePoint& p : d.points) {
    out += std::to_string(p.ts);
    out.push_back(',');
    out += FormatDouble(p.value);
    out.push_back('\n');
  }
  return out;
}

Dataset ParseDataset(std::string_view text) {
  const std::vector<std::string_view> lines = SplitLines(text);
  if (lines.empty()) Fail(ErrorCode::kInvalidInput, "empty dataset");
  Dataset d;
  try {
    const auto header = nlohmann::json::parse(lines[0]);
    d.signal_id = header.at("signal_id").get<std::string>();
    d.start_ts = header.at("start_ts").get<std::int64_t>();
    d.step_ms = header.at("step_ms").get<std::int64_t>();
  } catch (const nlohmann::json::exception& e) {
    BadLine(1, std::string("bad header: ") + e.what());
  }
  if (d.step_ms <= 0) BadLine(1, "step_ms must be positive");
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto fields = SplitFields(lines[i]);
    TimePoint p;
    if (fields.size() != 2 || !ParseInt(fields[0], p.ts) || !ParseDouble(fields[1], p.value)) {
      BadLine(i + 1, "expected ts_ms,value");
    }
    if (!d.points.empty() && p.ts <= d.points.back().ts) BadLine(i + 1, "timestamps must ascend");
    d.points.push_back(p);
  }
  return d;
}

CsvTable ParseCsv(std::string_view text) {
  const std::vector<std::string_view> lines = SplitLines(text);
  CsvTable t;
  std::size_t width = 0;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto fields = SplitFields(lines[i]);
    std::int64_t ts = 0;
    if (!ParseInt(fields[0], ts)) {
      if (width != 0 || !t.columns.empty()) BadLine(i + 1, "bad timestamp");
      for (std::size_t c = 1; c < fields.size(); ++c) t.columns.emplace_back(fields[c]);
      width = fields.size();
      continue;
    }
    if (width == 0) width = fields.size();
    if (fields.size() != width || width < 2) BadLine(i + 1, "expected " + std::to_string(width) + " fields");
    if (t.values.empty()) t.values.resize(width - 1);
    for (std::size_t c = 1; c < width; ++c) {
      double v = 0.0;
      if (!ParseDouble(fields[c], v)) BadLine(i + 1, "bad value");
      t.values[c - 1].push_back(v);
    }
    if (!t.ts.empty() && ts <= t.ts.back()) BadLine(i + 1, "timestamps must ascend");
    t.ts.push_back(ts);
  }
  if (t.ts.empty()) Fail(ErrorCode::kInvalidInput, "csv has no data rows");
  if (t.columns.empty()) {
    for (std::size_t c = 1; c < width; ++c) {
      t.columns.push_back(width == 2 ? "value" : "f" + std::to_string(c));
    }
  }
  return t;
}

}  // namespace tickwatch::registry
