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

#include "aphasia/decode.hpp"

#include <algorithm>

#include "aphasia/vocab.hpp"

namespace aphasia::decode {
namespace {

using model::Vocabulary;

// Deterministic order: score desc, then shorter, then lexicographically
// smaller token sequence.
bool better(const Hypothesis& a, const Hypothesis& b) {
  if (a.joint_score != b.joint_score) return a.joint_score > b.joint_score;
  if (a.tokens.size() != b.tokens.size()) return a.tokens.size() < b.tokens.size();
  return a.tokens < b.tokens;
}

struct Candidate {
  Hypothesis hyp;
  ctc::PrefixState prefix;  // meaningful only while unfinished
};

}  // namespace

std::vector<Hypothesis> joint_beam_search(const model::Model& model,
                                          const autodiff::Tensor& enc_hidden,
                                          const ctc::LogProbLattice& final_lattice,
                                          const BeamConfig& config) {
  const double lambda_d = 1.0 - config.ctc_weight;
  const double lambda_c = config.ctc_weight;
  const int vocab = final_lattice.vocab;
  const int max_len = config.max_len > 0 ? config.max_len : final_lattice.frames;

  std::vector<Candidate> live(1);
  live[0].prefix = ctc::PrefixState::initial(final_lattice);

  std::vector<Hypothesis> finished;
  for (int step = 0; step <= max_len && !live.empty(); ++step) {
    const bool last_step = step == max_len;
    std::vector<Candidate> pool;
    for (const Candidate& h : live) {
      const std::vector<double> logp = model.decode_step(enc_hidden, h.hyp.tokens);

      Candidate ended;
      ended.hyp.tokens = h.hyp.tokens;
      ended.hyp.dec_score = h.hyp.dec_score + logp[Vocabulary::kSosEosId];
      ended.hyp.ctc_score = h.prefix.log_complete();
      ended.hyp.joint_score = lambda_d * ended.hyp.dec_score + lambda_c * ended.hyp.ctc_score;
      ended.hyp.finished = true;
      pool.push_back(std::move(ended));
      if (last_step) continue;

      for (int c = 0; c < vocab; ++c) {
        if (c == Vocabulary::kSosEosId || c == ctc::kBlankId) continue;
        Candidate cand;
        cand.prefix = h.prefix.extend(c);
        cand.hyp.tokens = h.hyp.tokens;
        cand.hyp.tokens.push_back(c);
        cand.hyp.dec_score = h.hyp.dec_score + logp[static_cast<std::size_t>(c)];
        cand.hyp.ctc_score = cand.prefix.log_prefix_mass();
        cand.hyp.joint_score = lambda_d * cand.hyp.dec_score + lambda_c * cand.hyp.ctc_score;
        pool.push_back(std::move(cand));
      }
    }

    // Finished candidates compete for beam slots like any other; selected
    // ones leave the beam.
    const std::size_t keep =
        std::min<std::size_t>(pool.size(), static_cast<std::size_t>(config.beam_size));
    std::partial_sort(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(keep), pool.end(),
                      [](const Candidate& a, const Candidate& b) { return better(a.hyp, b.hyp); });
    std::vector<Candidate> next;
    for (std::size_t i = 0; i < keep; ++i) {
      if (pool[i].hyp.finished) {
        finished.push_back(std::move(pool[i].hyp));
      } else {
        next.push_back(std::move(pool[i]));
      }
    }
    live = std::move(next);
  }

  std::sort(finished.begin(), finished.end(), better);
  if (finished.empty()) {
    // Fallback: longest surviving partial, flagged unfinished.
    Hypothesis partial;
    if (!live.empty()) partial = live.front().hyp;
    partial.finished = false;
    return {partial};
  }
  if (static_cast<int>(finished.size()) > config.nbest) {
    finished.resize(static_cast<std::size_t>(config.nbest));
  }
  return finished;
}

}  // namespace aphasia::decode
