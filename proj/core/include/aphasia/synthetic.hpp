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
#include <string>
#include <vector>

#include "aphasia/feature_io.hpp"
#include "aphasia/manifest.hpp"

namespace aphasia::corpus {

// Desk-scale stand-in for a real speech corpus. Every token has a fixed
// feature template; each diagnosis class adds a class bias vector to every
// frame (acoustic cue) and skews the token unigram distribution (linguistic
// cue). With noise_sigma=0 a nearest-template decoder recovers the token
// sequence exactly.
struct SyntheticSpec {
  int speakers_per_class = 20;
  int utterances_per_speaker = 20;
  int vocab_size = 20;
  int feature_dim = 16;
  int frames_per_token = 4;
  int min_tokens = 5;
  int max_tokens = 12;
  double noise_sigma = 0.05;
  double class_bias_scale = 0.5;
  double token_skew = 0.8;
  double frame_rate_hz = 50.0;
  std::uint64_t seed = 0;
};

struct SyntheticDataset {
  Manifest records;
  std::vector<FeatureMatrix> features;  // parallel to records
};

// Deterministic per-token feature template (unit L2 norm, dimension
// spec.feature_dim).
std::vector<double> synthetic_token_template(const SyntheticSpec& spec, int token_index);

// Deterministic per-class bias added to every frame of that class.
std::vector<double> synthetic_class_bias(const SyntheticSpec& spec, bool aphasia);

// Vocabulary word for a token index ("w00", "w01", ...).
std::string synthetic_word(int token_index);

SyntheticDataset generate_synthetic(const SyntheticSpec& spec);

}  // namespace aphasia::corpus
