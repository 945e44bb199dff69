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

#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace aphasia::corpus {

enum class SeverityLevel { kMild, kModerate, kSevere, kVerySevere, kControl };

std::string_view severity_name(SeverityLevel level);
std::optional<SeverityLevel> severity_from_name(std::string_view name);

// One manifest row. All records of a speaker must share the same aphasia
// label and severity; load_manifest rejects violations.
struct UtteranceRecord {
  std::string utt_id;
  std::string speaker_id;
  std::vector<std::string> tokens;
  double duration_s = 0.0;
  bool aphasia = false;
  std::optional<double> aq;  // absent for controls
  SeverityLevel severity = SeverityLevel::kControl;
  std::string feature_path;  // relative to the manifest file; empty if inline
};

using Manifest = std::vector<UtteranceRecord>;

class ManifestError : public std::runtime_error {
 public:
  enum class Code { kParse, kMixedSpeakerLabels, kIo };
  ManifestError(Code code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  Code code() const { return code_; }

 private:
  Code code_;
};

// JSONL schema: {utt_id, speaker_id, tokens, duration_s, aphasia, aq,
// severity, feature_path}, one record per line.
std::string manifest_to_jsonl(const Manifest& manifest);
Manifest manifest_from_jsonl(std::string_view text);

Manifest load_manifest(const std::filesystem::path& path);
// Atomic write (temp file + rename).
void save_manifest(const Manifest& manifest, const std::filesystem::path& path);

// Throws ManifestError::kMixedSpeakerLabels when a speaker carries more than
// one aphasia label or severity.
void validate_speaker_constancy(const Manifest& manifest);

// Atomic whole-file write used by everything that produces artifacts.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);
std::string read_file(const std::filesystem::path& path);

}  // namespace aphasia::corpus
