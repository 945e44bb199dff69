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

#include "aphasia/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <functional>
#include <mutex>
#include <thread>

#include <json.hpp>

namespace aphasia::eval {
namespace {

using model::Vocabulary;

DetectLabel label_from_tag_id(int id) {
  return id == Vocabulary::kAphTagId ? DetectLabel::kAph : DetectLabel::kNonAph;
}

// Runs fn(i) over [0, n) on `jobs` threads, preserving output order by index.
// The first worker exception is rethrown on the calling thread.
void parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
  if (jobs <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> workers;
  const int nthreads = std::min(jobs, n);
  workers.reserve(static_cast<std::size_t>(nthreads));
  for (int t = 0; t < nthreads; ++t) {
    workers.emplace_back([&] {
      try {
        for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(n);  // stop handing out work
      }
    });
  }
  for (std::thread& w : workers) w.join();
  if (error) std::rethrow_exception(error);
}

struct DecodedUtterance {
  decode::Hypothesis best;
  std::vector<decode::Hypothesis> nbest;
  std::optional<DetectLabel> interctc_label;
};

// Tap used for InterCTC detection: the first tap configured with a
// tag-prefixed target.
std::optional<int> detector_tap(const model::ModelConfig& cfg) {
  for (std::size_t i = 0; i < cfg.interctc_layers.size(); ++i) {
    const model::InterTarget t = i < cfg.interctc_targets.size()
                                     ? cfg.interctc_targets[i]
                                     : model::InterTarget::kTagPrefixedTokens;
    if (t == model::InterTarget::kTagPrefixedTokens) return cfg.interctc_layers[i];
  }
  return std::nullopt;
}

std::vector<DecodedUtterance> decode_all(const model::Model& model, const LoadedDataset& data,
                                         const decode::BeamConfig& beam, int jobs) {
  std::vector<DecodedUtterance> out(data.records.size());
  const std::optional<int> tap = detector_tap(model.config());
  parallel_for(static_cast<int>(data.records.size()), jobs, [&](int i) {
    const corpus::FeatureMatrix& feats = data.features[static_cast<std::size_t>(i)];
    model::EncodeResult enc = model.encode(feats);
    ctc::LogProbLattice lattice = enc.final_lattice();
    auto hyps = decode::joint_beam_search(model, enc.hidden, lattice, beam);
    DecodedUtterance& d = out[static_cast<std::size_t>(i)];
    d.best = hyps.front();
    d.nbest = std::move(hyps);
    if (tap) d.interctc_label = interctc_detect(enc.inter_lattice(*tap));
  });
  return out;
}

nlohmann::ordered_json wer_json(const WerStats& w) {
  nlohmann::ordered_json j;
  j["wer"] = w.wer();
  j["substitutions"] = w.substitutions;
  j["insertions"] = w.insertions;
  j["deletions"] = w.deletions;
  j["ref_words"] = w.ref_words;
  return j;
}

nlohmann::ordered_json detector_json(const DetectorReport& d) {
  nlohmann::ordered_json j;
  j["sentence_acc"] = d.sentence.accuracy();
  j["sentence_acc_raw"] = d.sentence.raw_accuracy();
  j["speaker_acc"] = d.speaker.accuracy();
  j["speaker_acc_raw"] = d.speaker.raw_accuracy();
  j["confusion"] = {{"tp", d.sentence.tp}, {"fp", d.sentence.fp},
                    {"tn", d.sentence.tn}, {"fn", d.sentence.fn}};
  j["speaker_confusion"] = {{"tp", d.speaker.tp}, {"fp", d.speaker.fp},
                            {"tn", d.speaker.tn}, {"fn", d.speaker.fn}};
  j["abstain_rate"] = d.sentence.abstain_rate();
  return j;
}

}  // namespace

std::string_view detect_label_name(DetectLabel label) {
  switch (label) {
    case DetectLabel::kAph: return "APH";
    case DetectLabel::kNonAph: return "NONAPH";
    default: return "ABSTAIN";
  }
}

DetectLabel resolve_sentence_tag(std::span<const int> hyp_tokens, model::TagMode mode) {
  (void)mode;  // every decoded tag participates regardless of position
  auto [rest, tags] = model::strip_tags(hyp_tokens);
  if (tags.empty()) return DetectLabel::kAbstain;
  for (int t : tags) {
    if (t != tags.front()) return DetectLabel::kAbstain;  // disagreement
  }
  return label_from_tag_id(tags.front());
}

DetectLabel interctc_detect(const ctc::LogProbLattice& lattice) {
  for (int id : ctc::ctc_greedy(lattice)) {
    if (id == Vocabulary::kAphTagId || id == Vocabulary::kNonAphTagId) {
      return label_from_tag_id(id);
    }
  }
  return DetectLabel::kAbstain;
}

DetectLabel majority_vote(std::span<const DetectLabel> votes) {
  std::int64_t aph = 0, nonaph = 0;
  for (DetectLabel v : votes) {
    if (v == DetectLabel::kAph) ++aph;
    if (v == DetectLabel::kNonAph) ++nonaph;
  }
  if (aph == 0 && nonaph == 0) return DetectLabel::kAph;  // all abstained
  if (aph == nonaph) return DetectLabel::kAph;            // tie rule
  return aph > nonaph ? DetectLabel::kAph : DetectLabel::kNonAph;
}

void DetectionCounts::add(DetectLabel predicted, bool truth_aphasia) {
  if (predicted == DetectLabel::kAbstain) {
    ++abstain;
  } else if ((predicted == DetectLabel::kAph) == truth_aphasia) {
    ++raw_correct;
  }
  const bool coerced_aph = predicted != DetectLabel::kNonAph;  // abstain -> APH
  if (truth_aphasia) {
    coerced_aph ? ++tp : ++fn;
  } else {
    coerced_aph ? ++fp : ++tn;
  }
}

namespace {

DetectorReport build_detector_report(const corpus::Manifest& records,
                                     const std::vector<DetectLabel>& labels) {
  DetectorReport report;
  std::map<std::string, bool> speaker_truth;
  for (std::size_t i = 0; i < records.size(); ++i) {
    report.sentence.add(labels[i], records[i].aphasia);
    report.votes_per_speaker[records[i].speaker_id].push_back(labels[i]);
    speaker_truth[records[i].speaker_id] = records[i].aphasia;
  }
  for (const auto& [speaker, votes] : report.votes_per_speaker) {
    report.speaker.add(majority_vote(votes), speaker_truth.at(speaker));
  }
  return report;
}

}  // namespace

EvalReport aggregate_outcomes(const corpus::Manifest& records,
                              std::span<const UttOutcome> outcomes,
                              const model::Vocabulary& vocab, model::TagMode tag_mode) {
  EvalReport report;
  report.num_utterances = static_cast<int>(records.size());

  std::vector<DetectLabel> tag_labels, inter_labels;
  bool any_inter = false;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const corpus::UtteranceRecord& rec = records[i];
    const UttOutcome& out = outcomes[i];

    std::vector<int> ref_ids = vocab.ids(rec.tokens);
    WerStats w = wer(ref_ids, out.hyp_tokens, vocab);
    if (w.defined) {
      report.overall += w;
      report.per_severity[rec.severity] += w;
    } else {
      ++report.wer_excluded;
    }

    tag_labels.push_back(resolve_sentence_tag(out.hyp_tokens, tag_mode));
    if (out.interctc_label) {
      any_inter = true;
      inter_labels.push_back(*out.interctc_label);
    } else {
      inter_labels.push_back(DetectLabel::kAbstain);
    }
  }

  if (tag_mode != model::TagMode::kNone) {
    report.tag_detector = build_detector_report(records, tag_labels);
  }
  if (any_inter) {
    report.interctc_detector = build_detector_report(records, inter_labels);
  }
  std::map<std::string, bool> speakers;
  for (const corpus::UtteranceRecord& r : records) speakers[r.speaker_id] = r.aphasia;
  report.num_speakers = static_cast<int>(speakers.size());
  return report;
}

std::string EvalReport::to_json() const {
  nlohmann::ordered_json j;
  j["overall_wer"] = overall.wer();
  nlohmann::ordered_json sev = nlohmann::ordered_json::object();
  for (corpus::SeverityLevel level :
       {corpus::SeverityLevel::kMild, corpus::SeverityLevel::kModerate,
        corpus::SeverityLevel::kSevere, corpus::SeverityLevel::kVerySevere,
        corpus::SeverityLevel::kControl}) {
    auto it = per_severity.find(level);
    sev[std::string(corpus::severity_name(level))] =
        (it == per_severity.end()) ? nlohmann::ordered_json(nullptr) : wer_json(it->second);
  }
  j["per_severity"] = sev;

  const DetectorReport* primary = tag_detector ? &*tag_detector
                                : interctc_detector ? &*interctc_detector
                                                    : nullptr;
  if (primary != nullptr) {
    j["sentence_acc"] = primary->sentence.accuracy();
    j["speaker_acc"] = primary->speaker.accuracy();
    j["confusion"] = {{"tp", primary->sentence.tp}, {"fp", primary->sentence.fp},
                      {"tn", primary->sentence.tn}, {"fn", primary->sentence.fn}};
    j["abstain_rate"] = primary->sentence.abstain_rate();
  } else {
    j["sentence_acc"] = nullptr;
    j["speaker_acc"] = nullptr;
    j["confusion"] = nullptr;
    j["abstain_rate"] = nullptr;
  }
  j["detectors"] = nlohmann::ordered_json::object();
  if (tag_detector) j["detectors"]["tag"] = detector_json(*tag_detector);
  if (interctc_detector) j["detectors"]["interctc"] = detector_json(*interctc_detector);
  j["overall"] = wer_json(overall);
  j["num_utterances"] = num_utterances;
  j["num_speakers"] = num_speakers;
  j["wer_excluded"] = wer_excluded;
  return j.dump(2) + "\n";
}

LoadedDataset load_dataset(const std::filesystem::path& manifest_path) {
  LoadedDataset data;
  data.records = corpus::load_manifest(manifest_path);
  const std::filesystem::path base = manifest_path.parent_path();
  const char* cache_env = std::getenv("APHASIAKIT_CACHE_DIR");
  data.features.reserve(data.records.size());
  for (const corpus::UtteranceRecord& r : data.records) {
    if (r.feature_path.empty()) {
      throw corpus::ManifestError(corpus::ManifestError::Code::kParse,
                                  "record '" + r.utt_id + "' has no feature_path");
    }
    std::filesystem::path p(r.feature_path);
    if (p.is_absolute()) {
      data.features.push_back(corpus::load_features(p));
      continue;
    }
    // Relative paths resolve against the manifest's directory, then against
    // APHASIAKIT_CACHE_DIR when set.
    std::filesystem::path resolved = base / p;
    if (!std::filesystem::exists(resolved) && cache_env != nullptr) {
      const std::filesystem::path cached = std::filesystem::path(cache_env) / p;
      if (std::filesystem::exists(cached)) resolved = cached;
    }
    data.features.push_back(corpus::load_features(resolved));
  }
  return data;
}

EvalReport evaluate(const model::Model& model, const LoadedDataset& data,
                    const model::Vocabulary& vocab, const decode::BeamConfig& beam, int jobs) {
  auto decoded = decode_all(model, data, beam, jobs);
  std::vector<UttOutcome> outcomes(decoded.size());
  for (std::size_t i = 0; i < decoded.size(); ++i) {
    outcomes[i].hyp_tokens = decoded[i].best.tokens;
    outcomes[i].interctc_label = decoded[i].interctc_label;
  }
  return aggregate_outcomes(data.records, outcomes, vocab, model.config().tag_mode);
}

std::string decode_to_jsonl(const model::Model& model, const LoadedDataset& data,
                            const model::Vocabulary& vocab, const decode::BeamConfig& beam,
                            int jobs) {
  auto decoded = decode_all(model, data, beam, jobs);
  std::string out;
  for (std::size_t i = 0; i < decoded.size(); ++i) {
    for (std::size_t rank = 0; rank < decoded[i].nbest.size(); ++rank) {
      const decode::Hypothesis& h = decoded[i].nbest[rank];
      nlohmann::ordered_json j;
      j["utt_id"] = data.records[i].utt_id;
      j["rank"] = rank;
      j["score"] = h.joint_score;
      j["tokens"] = vocab.strings(h.tokens);
      j["finished"] = h.finished;
      out += j.dump();
      out += '\n';
    }
  }
  return out;
}

}  // namespace aphasia::eval
