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
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace aphasia::model {

// Token inventory with fixed reserved ids. The tag pair extends the plain
// ASR vocabulary; tag strings are configurable so other label pairs (e.g.
// dementia) reuse the pipeline.
class Vocabulary {
 public:
  static constexpr int kBlankId = 0;
  static constexpr int kUnkId = 1;
  static constexpr int kSosEosId = 2;  // decoder start and end share one id
  static constexpr int kAphTagId = 3;
  static constexpr int kNonAphTagId = 4;
  static constexpr int kNumReserved = 5;

  // Builds from word tokens (sorted, deduplicated) after the reserved ids.
  static Vocabulary build(std::span<const std::string> words,
                          std::string aph_tag = "[APH]",
                          std::string nonaph_tag = "[NONAPH]");

  int size() const { return static_cast<int>(tokens_.size()); }
  // kUnkId for unknown tokens.
  int id(std::string_view token) const;
  const std::string& token(int id) const { return tokens_[static_cast<std::size_t>(id)]; }
  bool is_tag(int id) const { return id == kAphTagId || id == kNonAphTagId; }
  bool is_tag(std::string_view token) const;
  bool is_special(int id) const { return id >= 0 && id < kNumReserved && !is_tag(id); }
  int tag_id(bool aphasia) const { return aphasia ? kAphTagId : kNonAphTagId; }

  std::vector<int> ids(std::span<const std::string> tokens) const;
  std::vector<std::string> strings(std::span<const int> ids) const;

  void save(const std::filesystem::path& path) const;  // one token per line
  static Vocabulary load(const std::filesystem::path& path);

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

}  // namespace aphasia::model
