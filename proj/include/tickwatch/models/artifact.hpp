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
#include <string>
#include <string_view>

#include "json.hpp"
#include "tickwatch/models/model.hpp"

namespace tickwatch::models {

inline constexpr int kArtifactSchemaVersion = 1;

// Self-describing envelope stored in the artifact store. Serialized as one
// line of compact JSON with sorted keys:
//   {"config":{...},"created_ts":<ms>,"model_type":"...","payload":{...},
//    "schema_version":1}
// Doubles are written in shortest round-trip form, so
// Serialize(Deserialize(bytes)) == bytes.
struct ModelArtifact {
  int schema_version = kArtifactSchemaVersion;
  std::string model_type;
  std::int64_t created_ts = 0;
  ModelPtr model;
  // Enrichment: detector parameters, training summary, provenance.
  nlohmann::json config = nlohmann::json::object();
};

std::string SerializeArtifact(const ModelArtifact& artifact);
ModelArtifact DeserializeArtifact(std::string_view bytes);

}  // namespace tickwatch::models
