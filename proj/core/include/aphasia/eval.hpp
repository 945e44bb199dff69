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

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aphasia/decode.hpp"
#include "aphasia/manifest.hpp"
#include "aphasia/model.hpp"
#include "aphasia/wer.hpp"

namespace aphasia::eval {

enum class DetectLabel { kAph, kNonAph, kAbstain };

std::string_view detect_label_name(DetectLabel label);

// Sentence label from decoded tags: unanimous tags decide, no tag or
// disagreement abstains.
DetectLabel resolve_sentence_tag(std::span<const int> hyp_tokens, model::TagMode mode);

// Greedy-decodes an InterCTC lattice; the first tag token decides.
DetectLabel interctc_detect(const ctc::LogProbLattice& lattice);

// Modal label over non-abstaining votes; ties and all-abstain go to APH
// (screening-tool bias; the raw and coerced numbers are both reported).
DetectLabel majority_vote(std::span<const DetectLabel> votes);

struct DetectionCounts {
  std::int64_t tp = 0, fp = 0, tn = 0, fn = 0;  // coerced (abstain -> APH)
  std::int64_t abstain = 0;
  std::int64_t raw_correct = 0;  // abstain counted as wrong

  std::int64_t total() const { return tp + fp + tn + fn; }
  double accuracy() const {
    return total() == 0 ? 0.0 : static_cast<double>(tp + tn) / static_cast<double>(total());
  }
  double raw_accuracy() const {
    return total() == 0 ? 0.0 : static_cast<double>(raw_correct) / static_cast<double>(total());
  }
  double abstain_rate() const {
    return total() == 0 ? 0.0 : static_cast<double>(abstain) / static_cast<double>(total());
  }
  void add(DetectLabel predicted, bool truth_aphasia);
};

struct DetectorReport {
  DetectionCounts sentence;
  DetectionCounts speaker;
  std::map<std::string, std::vector<DetectLabel>> votes_per_speaker;
};

// Decoded view of one utterance, detached from the model so the aggregation
// protocol is testable on its own.
struct UttOutcome {
  std::vector<int> hyp_tokens;  // beam output, tags included
  std::optional<DetectLabel> interctc_label;
};

struct EvalReport {
  WerStats overall;
  std::map<corpus::SeverityLevel, WerStats> per_severity;
  std::optional<DetectorReport> tag_detector;
  std::optional<DetectorReport> interctc_detector;
  int num_utterances = 0;
  int num_speakers = 0;
  int wer_excluded = 0;  // empty-reference utterances

  std::string to_json() const;
};

// Aggregates per-utterance outcomes into the full report (WER with tag
// exclusion, per-severity table, sentence/speaker detection, majority votes).
EvalReport aggregate_outcomes(const corpus::Manifest& records,
                              std::span<const UttOutcome> outcomes,
                              const model::Vocabulary& vocab, model::TagMode tag_mode);

struct LoadedDataset {
  corpus::Manifest records;
  std::vector<corpus::FeatureMatrix> features;  // parallel to records
};

// Reads every record's feature matrix (feature_path resolved relative to the
// manifest's directory).
LoadedDataset load_dataset(const std::filesystem::path& manifest_path);

// Decodes every utterance with the joint beam search (parallel across
// utterances when jobs > 1) and aggregates. The InterCTC label comes from
// the first tag-targeted tap, when one exists.
EvalReport evaluate(const model::Model& model, const LoadedDataset& data,
                    const model::Vocabulary& vocab, const decode::BeamConfig& beam,
                    int jobs = 1);

// Beam outputs for the n-best file (utt_id, rank, score, tokens), JSONL.
std::string decode_to_jsonl(const model::Model& model, const LoadedDataset& data,
                            const model::Vocabulary& vocab, const decode::BeamConfig& beam,
                            int jobs = 1);

}  // namespace aphasia::eval
