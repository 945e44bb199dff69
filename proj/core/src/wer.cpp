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

#include "aphasia/wer.hpp"

#include <algorithm>
#include <unordered_map>

#include "aphasia/model.hpp"

namespace aphasia::eval {
namespace {

struct Cell {
  std::int64_t cost = 0;
  std::int64_t sub = 0, ins = 0, del = 0;
};

WerStats align(std::span<const int> ref, std::span<const int> hyp) {
  WerStats stats;
  stats.ref_words = static_cast<std::int64_t>(ref.size());
  if (ref.empty()) {
    stats.defined = false;
    stats.insertions = static_cast<std::int64_t>(hyp.size());
    return stats;
  }

  const std::size_t m = ref.size(), n = hyp.size();
  std::vector<Cell> prev(n + 1), cur(n + 1);
  for (std::size_t j = 1; j <= n; ++j) {
    prev[j].cost = static_cast<std::int64_t>(j);
    prev[j].ins = static_cast<std::int64_t>(j);
  }
  for (std::size_t i = 1; i <= m; ++i) {
    cur[0] = {static_cast<std::int64_t>(i), 0, 0, static_cast<std::int64_t>(i)};
    for (std::size_t j = 1; j <= n; ++j) {
      const bool match = ref[i - 1] == hyp[j - 1];
      Cell diag = prev[j - 1];
      diag.cost += match ? 0 : 1;
      diag.sub += match ? 0 : 1;
      Cell del = prev[j];
      del.cost += 1;
      del.del += 1;
      Cell ins = cur[j - 1];
      ins.cost += 1;
      ins.ins += 1;
      // Diagonal first: substitutions are preferred over ins+del pairs.
      Cell best = diag;
      if (del.cost < best.cost) best = del;
      if (ins.cost < best.cost) best = ins;
      cur[j] = best;
    }
    std::swap(prev, cur);
  }
  stats.substitutions = prev[n].sub;
  stats.insertions = prev[n].ins;
  stats.deletions = prev[n].del;
  return stats;
}

}  // namespace

WerStats& WerStats::operator+=(const WerStats& other) {
  if (!other.defined) return *this;
  substitutions += other.substitutions;
  insertions += other.insertions;
  deletions += other.deletions;
  ref_words += other.ref_words;
  return *this;
}

WerStats wer(std::span<const int> ref, std::span<const int> hyp, const model::Vocabulary& vocab) {
  (void)vocab;  // tags have reserved ids
  auto [ref_clean, ref_tags] = model::strip_tags(ref);
  auto [hyp_clean, hyp_tags] = model::strip_tags(hyp);
  return align(ref_clean, hyp_clean);
}

WerStats wer_strings(std::span<const std::string> ref, std::span<const std::string> hyp,
                     const model::Vocabulary& vocab) {
  auto drop_tags_and_map = [&](std::span<const std::string> tokens) {
    // Compare as strings: unknown words must still mismatch each other.
    std::vector<std::string> kept;
    for (const std::string& t : tokens) {
      if (!vocab.is_tag(t)) kept.push_back(t);
    }
    return kept;
  };
  std::vector<std::string> r = drop_tags_and_map(ref);
  std::vector<std::string> h = drop_tags_and_map(hyp);
  // Map distinct strings to dense ids for the integer aligner.
  std::vector<int> rid, hid;
  std::unordered_map<std::string, int> dict;
  auto to_id = [&](const std::string& s) {
    auto [it, inserted] = dict.emplace(s, static_cast<int>(dict.size()));
    return it->second;
  };
  for (const std::string& s : r) rid.push_back(to_id(s));
  for (const std::string& s : h) hid.push_back(to_id(s));
  return align(rid, hid);
}

}  // namespace aphasia::eval
