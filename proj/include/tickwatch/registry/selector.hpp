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

#include <map>
#include <string>
#include <string_view>

namespace tickwatch::registry {

// Metric selector, the exact-match subset of the usual query syntax:
//
//   selector   := metric_name [ "{" [ matcher { "," matcher } [ "," ] ] "}" ]
//   metric_name:= [a-zA-Z_:][a-zA-Z0-9_:]*
//   matcher    := label_name "=" quoted
//   label_name := [a-zA-Z_][a-zA-Z0-9_]*
//   quoted     := '"' { char | '\"' | '\\' | '\n' } '"'
//
// Whitespace is allowed between tokens. Label names must be unique.
struct Selector {
  std::string metric_name;
  std::map<std::string, std::string> labels;

  // True when `labels` contains every matcher of this selector.
  bool Matches(std::string_view name, const std::map<std::string, std::string>& labels) const;

  // Canonical text: labels sorted, values escaped.
  std::string ToString() const;

  friend bool operator==(const Selector&, const Selector&) = default;
};

// Throws InvalidQuery with the offending position.
Selector ParseSelector(std::string_view text);

// name{k="v",...} with sorted labels, or bare name when there are none.
std::string FormatSeriesKey(std::string_view name, const std::map<std::string, std::string>& labels);

}  // namespace tickwatch::registry
