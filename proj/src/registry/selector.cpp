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

#include "tickwatch/registry/selector.hpp"

#include <cctype>

#include "tickwatch/core/error.hpp"

namespace tickwatch::registry {
namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Selector Parse() {
    Selector s;
    SkipSpace();
    s.metric_name = Identifier(true);
    SkipSpace();
    if (AtEnd()) return s;
    Expect('{');
    SkipSpace();
    while (!AtEnd() && Peek() != '}') {
      std::string name = Identifier(false);
      SkipSpace();
      Expect('=');
      SkipSpace();
      std::string value = Quoted();
      if (!s.labels.emplace(std::move(name), std::move(value)).second) Error("duplicate label");
      SkipSpace();
      if (!AtEnd() && Peek() == ',') {
        ++pos_;
        SkipSpace();
      } else {
        break;
      }
    }
    Expect('}');
    SkipSpace();
    if (!AtEnd()) Error("trailing characters");
    return s;
  }

 private:
  bool AtEnd() const { return pos_ >= text_.size(); }
  char Peek() const { return text_[pos_]; }

  void SkipSpace() {
    while (!AtEnd() && std::isspace(static_cast<unsigned char>(Peek()))) ++pos_;
  }

  [[noreturn]] void Error(const std::string& what) const {
    Fail(ErrorCode::kInvalidQuery,
         "selector: " + what + " at offset " + std::to_string(pos_) + " in '" + std::string(text_) + "'");
  }

  void Expect(char c) {
    if (AtEnd() || Peek() != c) Error(std::string("expected '") + c + "'");
    ++pos_;
  }

  std::string Identifier(bool metric) {
    const std::size_t start = pos_;
    auto head = [&](char c) {
      return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || (metric && c == ':');
    };
    auto tail = [&](char c) { return head(c) || std::isdigit(static_cast<unsigned char>(c)); };
    if (AtEnd() || !head(Peek())) Error(metric ? "expected metric name" : "expected label name");
    while (!AtEnd() && tail(Peek())) ++pos_;
    return std::string(text_.substr(start, pos_ - start));
  }

  std::string Quoted() {
    Expect('"');
    std::string out;
    while (true) {
      if (AtEnd()) Error("unterminated string");
      const char c = text_[pos_++];
      if (c == '"') return out;
      if (c != '\\') {
        out.push_back(c);
        continue;
      }
      if (AtEnd()) Error("dangling escape");
      const char e = text_[pos_++];
      if (e == 'n') {
        out.push_back('\n');
      } else if (e == '"' || e == '\\') {
        out.push_back(e);
      } else {
        Error("unknown escape");
      }
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

std::string Escape(const std::string& v) {
  std::string out;
  for (char c : v) {
    if (c == '"' || c == '\\') {
      out.push_back('\\');
      out.push_back(c);
    } else if (c == '\n') {
      out += "\\n";
    } else {
      out.push_back(c);
    }
  }
  return out;
}

}  // namespace

bool Selector::Matches(std::string_view name, const std::map<std::string, std::string>& series_labels) const {
  if (name != metric_name) return false;
  for (const auto& [k, v] : labels) {
    const auto it = series_labels.find(k);
    if (it == series_labels.end() || it->second != v) return false;
  }
  return true;
}

std::string Selector::ToString() const { return FormatSeriesKey(metric_name, labels); }

Selector ParseSelector(std::string_view text) { return Parser(text).Parse(); }

std::string FormatSeriesKey(std::string_view name, const std::map<std::string, std::string>& labels) {
  std::string out(name);
  if (labels.empty()) return out;
  out.push_back('{');
  bool first = true;
  for (const auto& [k, v] : labels) {
    if (!first) out.push_back(',');
    first = false;
    out += k + "=\"" + Escape(v) + "\"";
  }
  out.push_back('}');
  return out;
}

}  // namespace tickwatch::registry
