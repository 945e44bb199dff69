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
#include <span>
#include <string>
#include <vector>

#include "aphasia/vocab.hpp"

namespace aphasia::eval {

struct WerStats {
  std::int64_t substitutions = 0;
  std::int64_t insertions = 0;
  std::int64_t deletions = 0;
  std::int64_t ref_words = 0;
  // False when the reference is empty after tag stripping; such utterances
  // are excluded from aggregates.
  bool defined = true;

  std::int64_t errors() const { return substitutions + insertions + deletions; }
  double wer() const {
    return ref_words == 0 ? 0.0 : static_cast<double>(errors()) / static_cast<double>(ref_words);
  }
  WerStats& operator+=(const WerStats& other);
};

// Levenshtein alignment with unit costs after removing detection tags from
// both sides. Ties prefer substitutions over insertion+deletion pairs.
WerStats wer(std::span<const int> ref, std::span<const int> hyp, const model::Vocabulary& vocab);
WerStats wer_strings(std::span<const std::string> ref, std::span<const std::string> hyp,
                     const model::Vocabulary& vocab);

}  // namespace aphasia::eval
