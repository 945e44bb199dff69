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

#include <span>
#include <vector>

#include "aphasia/ctc.hpp"
#include "aphasia/model.hpp"

namespace aphasia::decode {

struct Hypothesis {
  std::vector<int> tokens;  // content tokens (tags included, no sos/eos)
  double joint_score = 0.0;
  double dec_score = 0.0;  // sum of decoder log-probs including eos
  double ctc_score = 0.0;  // CTC prefix mass / complete-sequence score
  bool finished = false;
};

struct BeamConfig {
  int beam_size = 10;
  // Training CTC weight lambda; the decoder side is scored with
  // lambda_d = 1 - ctc_weight.
  double ctc_weight = 0.3;
  int max_len = 0;  // 0 = one content token per encoder frame
  int nbest = 1;
};

// Length-synchronous joint CTC/attention beam search over one utterance.
// Candidates score lambda_d * decoder-log-prob + (1 - lambda_d) * CTC prefix
// mass; eos finalizes with the CTC complete-sequence score. Returns finished
// hypotheses best-first (falls back to the longest partial, flagged
// unfinished, if nothing finished).
std::vector<Hypothesis> joint_beam_search(const model::Model& model,
                                          const autodiff::Tensor& enc_hidden,
                                          const ctc::LogProbLattice& final_lattice,
                                          const BeamConfig& config);

}  // namespace aphasia::decode
