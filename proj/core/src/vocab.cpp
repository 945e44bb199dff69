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

#include "aphasia/vocab.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "aphasia/manifest.hpp"

namespace aphasia::model {

Vocabulary Vocabulary::build(std::span<const std::string> words, std::string aph_tag,
                             std::string nonaph_tag) {
  Vocabulary v;
  v.tokens_ = {"<blank>", "<unk>", "<sos/eos>", std::move(aph_tag), std::move(nonaph_tag)};
  std::set<std::string> sorted;
  for (const std::string& w : words) {
    if (std::find(v.tokens_.begin(), v.tokens_.end(), w) == v.tokens_.end()) {
      sorted.insert(w);
    }
  }
  v.tokens_.insert(v.tokens_.end(), sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < v.tokens_.size(); ++i) {
    v.index_.emplace(v.tokens_[i], static_cast<int>(i));
  }
  return v;
}

int Vocabulary::id(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnkId : it->second;
}

bool Vocabulary::is_tag(std::string_view token) const {
  return token == tokens_[kAphTagId] || token == tokens_[kNonAphTagId];
}

std::vector<int> Vocabulary::ids(std::span<const std::string> tokens) const {
  std::vector<int> out;
  out.reserve(tokens.size());
  for (const std::string& t : tokens) out.push_back(id(t));
  return out;
}

std::vector<std::string> Vocabulary::strings(std::span<const int> ids) const {
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (int i : ids) out.push_back(token(i));
  return out;
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::string text;
  for (const std::string& t : tokens_) {
    text += t;
    text += '\n';
  }
  corpus::write_file_atomic(path, text);
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::string text = corpus::read_file(path);
  Vocabulary v;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    std::string line = (nl == std::string::npos) ? text.substr(pos)
                                                 : text.substr(pos, nl - pos);
    pos = (nl == std::string::npos) ? text.size() : nl + 1;
    if (!line.empty()) v.tokens_.push_back(std::move(line));
  }
  if (v.tokens_.size() < kNumReserved) {
    throw std::runtime_error("vocabulary file too small: " + path.string());
  }
  for (std::size_t i = 0; i < v.tokens_.size(); ++i) {
    v.index_.emplace(v.tokens_[i], static_cast<int>(i));
  }
  return v;
}

}  // namespace aphasia::model
