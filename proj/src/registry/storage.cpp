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

#include "tickwatch/registry/storage.hpp"

#include <openssl/evp.h>

#include <fstream>
#include <sstream>

#include "tickwatch/core/error.hpp"

namespace tickwatch::registry {

namespace fs = std::filesystem;

std::string Sha256Hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    Fail(ErrorCode::kInternal, "sha256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 15]);
  }
  return out;
}

void WriteFileAtomic(const fs::path& path, std::string_view bytes) {
  fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) Fail(ErrorCode::kInternal, "write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string ReadFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kNotFound, "no such file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

JsonlLog::JsonlLog(fs::path path) : path_(std::move(path)) {
  if (persistent()) fs::create_directories(path_.parent_path());
}

JsonlLog::~JsonlLog() {
  if (file_ != nullptr) std::fclose(file_);
}

void JsonlLog::Open() {
  if (file_ == nullptr) {
    file_ = std::fopen(path_.c_str(), "ab");
    if (file_ == nullptr) Fail(ErrorCode::kInternal, "cannot open log " + path_.string());
  }
}

std::vector<nlohmann::json> JsonlLog::ReadAll() const {
  std::vector<nlohmann::json> out;
  if (!persistent() || !fs::exists(path_)) return out;
  std::ifstream in(path_, std::ios::binary);
  std::string line;
  while (std::getline(in, line)) {
    if (in.eof()) break;  // no trailing newline: torn write
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) break;
    out.push_back(std::move(j));
  }
  return out;
}

void JsonlLog::Append(const nlohmann::json& record) {
  if (!persistent()) return;
  Open();
  const std::string line = record.dump() + "\n";
  if (std::fwrite(line.data(), 1, line.size(), file_) != line.size() || std::fflush(file_) != 0) {
    Fail(ErrorCode::kInternal, "append failed: " + path_.string());
  }
}

void JsonlLog::Rewrite(const std::vector<nlohmann::json>& records) {
  if (!persistent()) return;
  std::string body;
  for (const auto& r : records) body += r.dump() + "\n";
  if (file_ != nullptr) {
    std::fclose(file_);
    file_ = nullptr;
  }
  WriteFileAtomic(path_, body);
}

ArtifactStore::ArtifactStore(fs::path dir) : dir_(std::move(dir)) {
  if (!dir_.empty()) fs::create_directories(dir_);
}

fs::path ArtifactStore::PathFor(const std::string& ref) const {
  return dir_ / ref.substr(ref.find(':') + 1);
}

std::string ArtifactStore::Save(std::string_view bytes) {
  const std::string ref = "sha256:" + Sha256Hex(bytes);
  std::lock_guard lock(mu_);
  if (dir_.empty()) {
    memory_.emplace(ref, std::string(bytes));
  } else if (!fs::exists(PathFor(ref))) {
    WriteFileAtomic(PathFor(ref), bytes);
  }
  return ref;
}

bool ArtifactStore::Contains(const std::string& ref) const {
  if (ref.rfind("sha256:", 0) != 0 || ref.size() != 7 + 64) return false;
  std::lock_guard lock(mu_);
  return dir_.empty() ? memory_.count(ref) > 0 : fs::exists(PathFor(ref));
}

std::string ArtifactStore::Load(const std::string& ref) const {
  if (!Contains(ref)) Fail(ErrorCode::kNotFound, "artifact " + ref + " not found");
  ++reads_;
  std::string bytes;
  {
    std::lock_guard lock(mu_);
    bytes = dir_.empty() ? memory_.at(ref) : ReadFile(PathFor(ref));
  }
  if ("sha256:" + Sha256Hex(bytes) != ref) {
    Fail(ErrorCode::kModelUnavailable, "artifact " + ref + " is corrupt");
  }
  return bytes;
}

}  // namespace tickwatch::registry
