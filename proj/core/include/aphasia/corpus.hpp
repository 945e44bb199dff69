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
#include <vector>

#include "aphasia/feature_io.hpp"
#include "aphasia/manifest.hpp"
#include "aphasia/rng.hpp"

namespace aphasia::corpus {

class CorpusError : public std::runtime_error {
 public:
  enum class Code { kAqOutOfRange, kBadSplitSpec };
  CorpusError(Code code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  Code code() const { return code_; }

 private:
  Code code_;
};

// AQ buckets: mild (AQ > 75), moderate (50 < AQ <= 75), severe
// (25 < AQ <= 50), very severe (0 <= AQ <= 25). Controls map to kControl
// regardless of AQ.
SeverityLevel classify_severity(double aq, bool aphasia);

struct SplitSpec {
  double train = 0.56;
  double valid = 0.19;
  double test = 0.25;
  std::uint64_t seed = 0;
};

struct SplitResult {
  Manifest train;
  Manifest valid;
  Manifest test;
  std::vector<std::string> warnings;  // e.g. empty strata
};

// Speaker-level stratified split: speakers are grouped by severity (controls
// form their own stratum), shuffled per stratum by seed, and apportioned by
// largest-remainder rounding. Every utterance of a speaker lands in exactly
// one split. Deterministic in (records, spec.seed).
SplitResult stratified_split(const Manifest& records, const SplitSpec& spec);

// Keeps records with min_s <= duration_s <= max_s (boundaries inclusive).
Manifest filter_duration(const Manifest& records, double min_s = 0.3, double max_s = 30.0);

// Resamples the frame axis to L' = round(L / ratio) by linear interpolation.
FeatureMatrix speed_perturb(const FeatureMatrix& features, double ratio);

struct SpecAugmentConfig {
  int time_masks = 2;
  int time_width = 20;
  int freq_masks = 2;
  int freq_width = 10;
};

// Fixed-width masks with uniformly drawn starts; masked entries are set to
// the pre-mask matrix mean.
FeatureMatrix spec_augment(const FeatureMatrix& features, const SpecAugmentConfig& config,
                           Rng& rng);

}  // namespace aphasia::corpus
