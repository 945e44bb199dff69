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

#include "aphasia/chat.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

#include <json.hpp>

namespace aphasia::chat {
namespace {

constexpr std::string_view kBulletUtf8 = "\xE2\x80\xA2";  // U+2022
constexpr char kBulletAscii = '\x15';

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    std::size_t next = s.find(sep, pos);
    if (next == std::string_view::npos) {
      out.push_back(s.substr(pos));
      break;
    }
    out.push_back(s.substr(pos, next - pos));
    pos = next + 1;
  }
  return out;
}

std::vector<std::string> whitespace_tokens(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ' ' || c == '\t') {
      if (!cur.empty()) out.push_back(std::move(cur)), cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

bool iequals(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(a[i])) !=
        std::tolower(static_cast<unsigned char>(b[i])))
      return false;
  }
  return true;
}

// Joins physical lines into logical tier lines: a line starting with a tab
// continues the previous one.
std::vector<std::string> logical_lines(std::string_view contents) {
  std::vector<std::string> lines;
  std::size_t pos = 0;
  while (pos <= contents.size()) {
    std::size_t nl = contents.find('\n', pos);
    std::string_view line = (nl == std::string_view::npos)
                                ? contents.substr(pos)
                                : contents.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty() && line.front() == '\t' && !lines.empty()) {
      lines.back().push_back(' ');
      lines.back().append(trim(line));
    } else if (!trim(line).empty()) {
      lines.emplace_back(line);
    }
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  return lines;
}

DiagnosisGroup group_from_id_field(std::string_view field) {
  if (field.empty()) return DiagnosisGroup::kUnknown;
  if (iequals(field, "control")) return DiagnosisGroup::kControl;
  return DiagnosisGroup::kAphasia;
}

void parse_participants_line(std::string_view payload,
                             std::vector<Participant>* participants) {
  for (std::string_view entry : split(payload, ',')) {
    auto fields = whitespace_tokens(trim(entry));
    if (fields.empty()) continue;
    Participant p;
    p.code = fields.front();
    if (fields.size() >= 2) p.role = fields.back();
    participants->push_back(std::move(p));
  }
}

void parse_id_line(std::string_view payload, std::vector<Participant>* participants) {
  auto fields = split(payload, '|');
  if (fields.size() < 6) return;
  std::string_view code = trim(fields[2]);
  std::string_view group = trim(fields[5]);
  for (Participant& p : *participants) {
    if (p.code == code) {
      p.group = group_from_id_field(group);
      if (p.role.empty() && fields.size() > 7) p.role = std::string(trim(fields[7]));
      return;
    }
  }
}

// Removes every media marker from `text`, returning the first valid start
// and the last valid end. A marker is a "start_end" group delimited by
// bullets (or the 0x15 fallback); groups that do not parse are still removed.
void extract_media_markers(std::string* text, std::optional<std::int64_t>* start_ms,
                           std::optional<std::int64_t>* end_ms) {
  std::string out;
  out.reserve(text->size());
  std::vector<std::pair<std::int64_t, std::int64_t>> stamps;
  std::string_view s(*text);
  std::size_t i = 0;
  auto delim_at = [&](std::size_t pos) -> std::size_t {
    if (pos < s.size() && s[pos] == kBulletAscii) return 1;
    if (s.compare(pos, kBulletUtf8.size(), kBulletUtf8) == 0) return kBulletUtf8.size();
    return 0;
  };
  while (i < s.size()) {
    std::size_t d = delim_at(i);
    if (d == 0) {
      out.push_back(s[i++]);
      continue;
    }
    // Find the closing delimiter.
    std::size_t j = i + d;
    std::size_t close = 0;
    while (j < s.size() && (close = delim_at(j)) == 0) ++j;
    if (close == 0) {
      i += d;  // unpaired delimiter: drop it
      continue;
    }
    std::string_view inner = s.substr(i + d, j - (i + d));
    std::size_t us = inner.find('_');
    if (us != std::string_view::npos) {
      std::int64_t a = -1, b = -1;
      auto lhs = inner.substr(0, us);
      auto rhs = inner.substr(us + 1);
      auto r1 = std::from_chars(lhs.data(), lhs.data() + lhs.size(), a);
      auto r2 = std::from_chars(rhs.data(), rhs.data() + rhs.size(), b);
      if (r1.ec == std::errc() && r1.ptr == lhs.data() + lhs.size() &&
          r2.ec == std::errc() && r2.ptr == rhs.data() + rhs.size() && a >= 0 &&
          b > a) {
        stamps.emplace_back(a, b);
      }
    }
    i = j + close;
  }
  *text = std::move(out);
  if (!stamps.empty() && stamps.back().second > stamps.front().first) {
    *start_ms = stamps.front().first;
    *end_ms = stamps.back().second;
  }
}

constexpr std::string_view kStripPunct = ".?!,;:\"";
constexpr std::string_view kMarkerChars = "[]<>&%@";

void erase_chars(std::string* tok, std::string_view chars) {
  tok->erase(std::remove_if(tok->begin(), tok->end(),
                            [&](char c) { return chars.find(c) != std::string_view::npos; }),
             tok->end());
}

// "(.)", "(..)", "(...)" and timed variants like "(2.5)".
bool is_pause_code(const std::string& tok) {
  if (tok.size() < 3 || tok.front() != '(' || tok.back() != ')') return false;
  return std::all_of(tok.begin() + 1, tok.end() - 1, [](char c) {
    return c == '.' || (c >= '0' && c <= '9');
  });
}

// Removes every "[...]" group (codes, comments, postcodes, ...). Scoped words
// in "<...>" are kept; the angle brackets themselves are dropped later at the
// token level.
std::string strip_bracket_groups(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  int depth = 0;
  for (char c : text) {
    if (c == '[') {
      ++depth;
    } else if (c == ']') {
      if (depth > 0) --depth;
      if (depth == 0) out.push_back(' ');
    } else if (depth == 0) {
      out.push_back(c);
    }
  }
  return out;
}

}  // namespace

const Participant* ChatDocument::find_participant(std::string_view code) const {
  for (const Participant& p : participants) {
    if (p.code == code) return &p;
  }
  return nullptr;
}

ChatDocument parse_chat(std::string_view file_contents) {
  ChatDocument doc;
  auto lines = logical_lines(file_contents);

  bool saw_participants = false;
  for (const std::string& line : lines) {
    if (line.rfind("@Participants:", 0) == 0) {
      saw_participants = true;
      parse_participants_line(trim(std::string_view(line).substr(14)), &doc.participants);
    }
  }
  if (!saw_participants) {
    throw ChatError(ChatError::Code::kMalformedHeader,
                    "missing @Participants header line");
  }
  for (const std::string& line : lines) {
    if (line.rfind("@ID:", 0) == 0) {
      parse_id_line(trim(std::string_view(line).substr(4)), &doc.participants);
    }
  }

  for (const std::string& line : lines) {
    if (line.empty()) continue;
    if (line[0] == '%' || line[0] == '@') continue;
    if (line[0] != '*') continue;  // stray text is ignored
    std::size_t colon = line.find(':');
    if (colon == std::string::npos) continue;
    RawUtterance utt;
    utt.speaker_code = std::string(trim(std::string_view(line).substr(1, colon - 1)));
    if (doc.find_participant(utt.speaker_code) == nullptr) {
      throw ChatError(ChatError::Code::kOrphanTier,
                      "main tier for undeclared speaker '" + utt.speaker_code + "'");
    }
    utt.text = std::string(trim(std::string_view(line).substr(colon + 1)));
    extract_media_markers(&utt.text, &utt.start_ms, &utt.end_ms);
    utt.text = std::string(trim(utt.text));
    doc.utterances.push_back(std::move(utt));
  }
  return doc;
}

std::optional<CleanUtterance> clean_utterance(const RawUtterance& raw) {
  std::string text = strip_bracket_groups(raw.text);
  std::vector<std::string> cleaned;

  for (std::string& tok : whitespace_tokens(text)) {
    if (tok == kLaughterToken) {
      cleaned.emplace_back(tok);
      continue;
    }
    // Scope grouping: keep the words, drop the angle brackets.
    erase_chars(&tok, "<>");
    if (tok.empty()) continue;

    if (tok.rfind("&=", 0) == 0) {
      // Local events, gestures and laughter.
      std::string_view event = std::string_view(tok).substr(2);
      if (event == "laughs" || event == "laugh") {
        cleaned.emplace_back(kLaughterToken);
      }
      continue;
    }
    if (tok[0] == '&') {
      // Fillers "&-", phonological fragments "&+" and their legacy bare form:
      // keep the textual representation, drop the marker.
      std::size_t skip = (tok.size() > 1 && (tok[1] == '-' || tok[1] == '+')) ? 2 : 1;
      tok.erase(0, skip);
      if (tok.empty()) continue;
    }
    if (std::size_t at = tok.find('@'); at != std::string::npos) {
      // "word@u" keeps the IPA form's text; every other special-form marker
      // drops the whole token.
      std::string_view suffix = std::string_view(tok).substr(at + 1);
      if (suffix != "u" || at == 0) continue;
      tok.erase(at);
    }
    if (tok[0] == '+') continue;  // terminators and interruption markers
    if (is_pause_code(tok)) continue;
    erase_chars(&tok, "()");  // shortenings like "(be)cause"
    if (tok.empty()) continue;
    erase_chars(&tok, kStripPunct);
    if (tok.empty()) continue;
    if (tok == "xxx" || tok == "yyy" || tok == "www") continue;  // unintelligible
    if (tok[0] == '0') continue;  // omitted words / actions without speech
    if (tok.find_first_of(kMarkerChars) != std::string::npos) continue;
    cleaned.push_back(std::move(tok));
  }

  if (cleaned.empty()) return std::nullopt;
  CleanUtterance out;
  out.speaker_code = raw.speaker_code;
  out.tokens = std::move(cleaned);
  out.start_ms = raw.start_ms;
  out.end_ms = raw.end_ms;
  return out;
}

std::vector<CleanUtterance> clean_document(const ChatDocument& doc) {
  std::vector<CleanUtterance> out;
  out.reserve(doc.utterances.size());
  for (const RawUtterance& raw : doc.utterances) {
    if (auto clean = clean_utterance(raw)) out.push_back(std::move(*clean));
  }
  return out;
}

std::string to_jsonl(const std::vector<CleanUtterance>& utterances) {
  std::string out;
  for (const CleanUtterance& u : utterances) {
    nlohmann::ordered_json j;
    j["speaker"] = u.speaker_code;
    j["tokens"] = u.tokens;
    if (u.start_ms) j["start_ms"] = *u.start_ms; else j["start_ms"] = nullptr;
    if (u.end_ms) j["end_ms"] = *u.end_ms; else j["end_ms"] = nullptr;
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace aphasia::chat
