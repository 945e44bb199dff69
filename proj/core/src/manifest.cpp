// Copyright 2026 The aphasiakit authors
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

#include "aphasia/manifest.hpp"

#include <fstream>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

namespace aphasia::corpus {
namespace {

const char* kSeverityNames[] = {"mild", "moderate", "severe", "very_severe", "control"};

}  // namespace

std::string_view severity_name(SeverityLevel level) {
  return kSeverityNames[static_cast<int>(level)];
}

std::optional<SeverityLevel> severity_from_name(std::string_view name) {
  for (int i = 0; i < 5; ++i) {
    if (name == kSeverityNames[i]) return static_cast<SeverityLevel>(i);
  }
  return std::nullopt;
}

std::string manifest_to_jsonl(const Manifest& manifest) {
  std::string out;
  for (const UtteranceRecord& r : manifest) {
    nlohmann::ordered_json j;
    j["utt_id"] = r.utt_id;
    j["speaker_id"] = r.speaker_id;
    j["tokens"] = r.tokens;
    j["duration_s"] = r.duration_s;
    j["aphasia"] = r.aphasia;
    if (r.aq) j["aq"] = *r.aq; else j["aq"] = nullptr;
    j["severity"] = severity_name(r.severity);
    j["feature_path"] = r.feature_path;
    out += j.dump();
    out += '\n';
  }
  return out;
}

Manifest manifest_from_jsonl(std::string_view text) {
  Manifest manifest;
  std::size_t pos = 0;
  int line_no = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    std::string_view line =
        (nl == std::string_view::npos) ? text.substr(pos) : text.substr(pos, nl - pos);
    pos = (nl == std::string_view::npos) ? text.size() : nl + 1;
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      throw ManifestError(ManifestError::Code::kParse,
                          "manifest line " + std::to_string(line_no) + ": invalid JSON");
    }
    try {
      UtteranceRecord r;
      r.utt_id = j.at("utt_id").get<std::string>();
      r.speaker_id = j.at("speaker_id").get<std::string>();
      r.tokens = j.at("tokens").get<std::vector<std::string>>();
      r.duration_s = j.at("duration_s").get<double>();
      r.aphasia = j.at("aphasia").get<bool>();
      if (j.contains("aq") && !j.at("aq").is_null()) r.aq = j.at("aq").get<double>();
      auto sev = severity_from_name(j.at("severity").get<std::string>());
      if (!sev) throw std::runtime_error("unknown severity");
      r.severity = *sev;
      if (j.contains("feature_path") && !j.at("feature_path").is_null()) {
        r.feature_path = j.at("feature_path").get<std::string>();
      }
      manifest.push_back(std::move(r));
    } catch (const std::exception& e) {
      throw ManifestError(ManifestError::Code::kParse,
                          "manifest line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return manifest;
}

void validate_speaker_constancy(const Manifest& manifest) {
  std::unordered_map<std::string, std::pair<bool, SeverityLevel>> seen;
  for (const UtteranceRecord& r : manifest) {
    auto [it, inserted] = seen.emplace(r.speaker_id, std::make_pair(r.aphasia, r.severity));
    if (!inserted && (it->second.first != r.aphasia || it->second.second != r.severity)) {
      throw ManifestError(ManifestError::Code::kMixedSpeakerLabels,
                          "speaker '" + r.speaker_id +
                              "' carries more than one label or severity");
    }
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ManifestError(ManifestError::Code::kIo, "cannot open " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw ManifestError(ManifestError::Code::kIo, "cannot write " + tmp.string());
    }
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) {
      throw ManifestError(ManifestError::Code::kIo, "short write to " + tmp.string());
    }
  }
  std::filesystem::rename(tmp, path);
}

Manifest load_manifest(const std::filesystem::path& path) {
  Manifest manifest = manifest_from_jsonl(read_file(path));
  validate_speaker_constancy(manifest);
  return manifest;
}

void save_manifest(const Manifest& manifest, const std::filesystem::path& path) {
  write_file_atomic(path, manifest_to_jsonl(manifest));
}

}  // namespace aphasia::corpus
