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

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace aphasia::chat {

// Diagnosis group of a transcript participant, derived from the group field
// of the @ID header line ("control" -> kControl, any other non-empty value
// -> kAphasia, absent/empty -> kUnknown).
enum class DiagnosisGroup { kAphasia, kControl, kUnknown };

struct Participant {
  std::string code;  // speaker code, e.g. "PAR"
  std::string role;  // e.g. "Participant"
  DiagnosisGroup group = DiagnosisGroup::kUnknown;
};

// One main-tier utterance as it appears in the file. Media markers
// ("•start_end•" or the 0x15 ASCII fallback) are stripped from `text` and
// captured in start_ms/end_ms.
struct RawUtterance {
  std::string speaker_code;
  std::string text;
  std::optional<std::int64_t> start_ms;
  std::optional<std::int64_t> end_ms;
};

struct ChatDocument {
  std::vector<Participant> participants;
  std::vector<RawUtterance> utterances;  // file order

  const Participant* find_participant(std::string_view code) const;
};

// Utterance after marker cleaning. `tokens` may contain the literal laughter
// token and nothing else from the marker character set.
struct CleanUtterance {
  std::string speaker_code;
  std::vector<std::string> tokens;
  std::optional<std::int64_t> start_ms;
  std::optional<std::int64_t> end_ms;
};

class ChatError : public std::runtime_error {
 public:
  enum class Code { kMalformedHeader, kOrphanTier };

  ChatError(Code code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  Code code() const { return code_; }

 private:
  Code code_;
};

inline constexpr std::string_view kLaughterToken = "<LAU>";

// Parses CHAT (.cha) text. Recognized line forms: "@Participants:", "@ID:",
// "*CODE:<tab>text", "%tier:" (ignored); a line starting with a tab continues
// the previous tier. Throws ChatError on a missing @Participants header or a
// main tier whose speaker code was never declared.
ChatDocument parse_chat(std::string_view file_contents);

// Applies the marker-cleaning pass to one utterance. Returns nullopt when no
// tokens survive. Never throws: unknown markers are removed, not propagated.
std::optional<CleanUtterance> clean_utterance(const RawUtterance& raw);

// clean_utterance over every utterance, dropping empty results, keeping
// order.
std::vector<CleanUtterance> clean_document(const ChatDocument& doc);

// Serializes utterances as JSONL with keys {speaker, tokens, start_ms,
// end_ms}; missing timestamps are emitted as null. Output is byte-stable.
std::string to_jsonl(const std::vector<CleanUtterance>& utterances);

}  // namespace aphasia::chat
