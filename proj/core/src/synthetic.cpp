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

#include "aphasia/synthetic.hpp"

#include <cmath>
#include <cstdio>

#include "aphasia/corpus.hpp"
#include "aphasia/rng.hpp"

namespace aphasia::corpus {
namespace {

std::vector<double> unit_gaussian_vector(Rng& rng, int dim) {
  std::vector<double> v(dim);
  double norm2 = 0.0;
  for (double& x : v) {
    x = rng.normal();
    norm2 += x * x;
  }
  const double inv = norm2 > 0 ? 1.0 / std::sqrt(norm2) : 0.0;
  for (double& x : v) x *= inv;
  return v;
}

// Class-conditional unigram over tokens: aphasic speakers favor the lower
// half of the vocabulary, controls the upper half.
std::vector<double> token_cdf(const SyntheticSpec& spec, bool aphasia) {
  std::vector<double> cdf(spec.vocab_size);
  double total = 0.0;
  for (int k = 0; k < spec.vocab_size; ++k) {
    const bool lower_half = k < spec.vocab_size / 2;
    total += 1.0 + (lower_half == aphasia ? spec.token_skew : 0.0);
    cdf[k] = total;
  }
  for (double& x : cdf) x /= total;
  return cdf;
}

int sample_cdf(const std::vector<double>& cdf, Rng& rng) {
  const double u = rng.uniform();
  for (std::size_t k = 0; k < cdf.size(); ++k) {
    if (u < cdf[k]) return static_cast<int>(k);
  }
  return static_cast<int>(cdf.size()) - 1;
}

}  // namespace

std::vector<double> synthetic_token_template(const SyntheticSpec& spec, int token_index) {
  Rng rng = Rng::from_stream(spec.seed, "template/" + std::to_string(token_index));
  return unit_gaussian_vector(rng, spec.feature_dim);
}

std::vector<double> synthetic_class_bias(const SyntheticSpec& spec, bool aphasia) {
  Rng rng = Rng::from_stream(spec.seed, aphasia ? "bias/aph" : "bias/ctl");
  std::vector<double> v = unit_gaussian_vector(rng, spec.feature_dim);
  for (double& x : v) x *= spec.class_bias_scale;
  return v;
}

std::string synthetic_word(int token_index) {
  char buf[8];
  std::snprintf(buf, sizeof(buf), "w%02d", token_index);
  return buf;
}

SyntheticDataset generate_synthetic(const SyntheticSpec& spec) {
  SyntheticDataset out;
  std::vector<std::vector<double>> templates(spec.vocab_size);
  for (int k = 0; k < spec.vocab_size; ++k) {
    templates[k] = synthetic_token_template(spec, k);
  }

  for (int cls = 0; cls < 2; ++cls) {
    const bool aphasia = cls == 0;
    const std::vector<double> bias = synthetic_class_bias(spec, aphasia);
    const std::vector<double> cdf = token_cdf(spec, aphasia);
    for (int s = 0; s < spec.speakers_per_class; ++s) {
      char spk[16];
      std::snprintf(spk, sizeof(spk), "%s%03d", aphasia ? "APH" : "CTL", s);
      std::optional<double> aq;
      SeverityLevel severity = SeverityLevel::kControl;
      if (aphasia) {
        // Cycle the severity buckets so each stratum is populated.
        Rng spk_rng = Rng::from_stream(spec.seed, std::string("speaker/") + spk);
        const double lo[] = {75.01, 50.01, 25.01, 0.0};
        const double hi[] = {100.0, 75.0, 50.0, 25.0};
        const int bucket = s % 4;
        aq = spk_rng.uniform(lo[bucket], hi[bucket]);
        severity = classify_severity(*aq, true);
      }
      for (int u = 0; u < spec.utterances_per_speaker; ++u) {
        UtteranceRecord rec;
        rec.speaker_id = spk;
        rec.utt_id = std::string(spk) + "-u" + std::to_string(u);
        rec.aphasia = aphasia;
        rec.aq = aq;
        rec.severity = severity;

        Rng rng = Rng::from_stream(spec.seed, "utt/" + rec.utt_id);
        const int n_tokens =
            spec.min_tokens +
            static_cast<int>(rng.uniform_int(spec.max_tokens - spec.min_tokens + 1));
        std::vector<int> token_ids(n_tokens);
        for (int& id : token_ids) id = sample_cdf(cdf, rng);

        const int frames = n_tokens * spec.frames_per_token;
        FeatureMatrix f = FeatureMatrix::zeros(frames, spec.feature_dim);
        f.frame_rate_hz = spec.frame_rate_hz;
        for (int t = 0; t < n_tokens; ++t) {
          const std::vector<double>& tpl = templates[token_ids[t]];
          for (int r = 0; r < spec.frames_per_token; ++r) {
            const int row = t * spec.frames_per_token + r;
            for (int c = 0; c < spec.feature_dim; ++c) {
              double v = tpl[c] + bias[c];
              if (spec.noise_sigma > 0) v += spec.noise_sigma * rng.normal();
              f.at(row, c) = static_cast<float>(v);
            }
          }
          rec.tokens.push_back(synthetic_word(token_ids[t]));
        }
        rec.duration_s = frames / spec.frame_rate_hz;
        out.records.push_back(std::move(rec));
        out.features.push_back(std::move(f));
      }
    }
  }
  return out;
}

}  // namespace aphasia::corpus
