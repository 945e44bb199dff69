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

#include "aphasia/corpus.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <unordered_map>
#include <unordered_set>

namespace aphasia::corpus {

SeverityLevel classify_severity(double aq, bool aphasia) {
  if (!aphasia) return SeverityLevel::kControl;
  if (aq < 0.0 || aq > 100.0) {
    throw CorpusError(CorpusError::Code::kAqOutOfRange,
                      "AQ " + std::to_string(aq) + " outside [0, 100]");
  }
  if (aq > 75.0) return SeverityLevel::kMild;
  if (aq > 50.0) return SeverityLevel::kModerate;
  if (aq > 25.0) return SeverityLevel::kSevere;
  return SeverityLevel::kVerySevere;
}

namespace {

// Largest-remainder apportionment of n into three parts; remainder ties go
// to the earlier split (train, valid, test).
std::array<int, 3> apportion(int n, const std::array<double, 3>& ratios) {
  std::array<int, 3> counts{};
  std::array<double, 3> remainders{};
  int assigned = 0;
  for (int i = 0; i < 3; ++i) {
    double exact = ratios[i] * n;
    counts[i] = static_cast<int>(std::floor(exact));
    remainders[i] = exact - counts[i];
    assigned += counts[i];
  }
  std::array<int, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return remainders[a] > remainders[b]; });
  for (int k = 0; k < n - assigned; ++k) counts[order[k % 3]] += 1;
  return counts;
}

}  // namespace

SplitResult stratified_split(const Manifest& records, const SplitSpec& spec) {
  const double sum = spec.train + spec.valid + spec.test;
  if (spec.train <= 0 || spec.valid <= 0 || spec.test <= 0 ||
      std::abs(sum - 1.0) > 1e-9) {
    throw CorpusError(CorpusError::Code::kBadSplitSpec,
                      "split ratios must be positive and sum to 1");
  }
  validate_speaker_constancy(records);

  // Severity per speaker, strata in enum order; speakers sorted for
  // determinism regardless of record order.
  std::map<SeverityLevel, std::vector<std::string>> strata;
  std::unordered_map<std::string, SeverityLevel> speaker_severity;
  for (const UtteranceRecord& r : records) {
    if (speaker_severity.emplace(r.speaker_id, r.severity).second) {
      strata[r.severity].push_back(r.speaker_id);
    }
  }

  SplitResult result;
  for (const SeverityLevel level :
       {SeverityLevel::kMild, SeverityLevel::kModerate, SeverityLevel::kSevere,
        SeverityLevel::kVerySevere, SeverityLevel::kControl}) {
    if (strata.find(level) == strata.end()) {
      result.warnings.push_back("empty stratum: " + std::string(severity_name(level)));
    }
  }
  std::unordered_map<std::string, int> assignment;  // speaker -> 0/1/2
  for (auto& [severity, speakers] : strata) {
    std::sort(speakers.begin(), speakers.end());
    Rng rng = Rng::from_stream(spec.seed, severity_name(severity));
    for (std::size_t i = speakers.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(rng.uniform_int(static_cast<std::int64_t>(i)));
      std::swap(speakers[i - 1], speakers[j]);
    }
    auto counts = apportion(static_cast<int>(speakers.size()),
                            {spec.train, spec.valid, spec.test});
    int idx = 0;
    for (int part = 0; part < 3; ++part) {
      for (int k = 0; k < counts[part]; ++k) assignment[speakers[idx++]] = part;
    }
  }

  for (const UtteranceRecord& r : records) {
    switch (assignment.at(r.speaker_id)) {
      case 0: result.train.push_back(r); break;
      case 1: result.valid.push_back(r); break;
      default: result.test.push_back(r); break;
    }
  }
  return result;
}

Manifest filter_duration(const Manifest& records, double min_s, double max_s) {
  Manifest out;
  out.reserve(records.size());
  for (const UtteranceRecord& r : records) {
    if (r.duration_s >= min_s && r.duration_s <= max_s) out.push_back(r);
  }
  return out;
}

FeatureMatrix speed_perturb(const FeatureMatrix& features, double ratio) {
  if (!(ratio > 0.0)) {
    throw std::invalid_argument("speed_perturb: ratio must be positive");
  }
  const int rows = features.rows;
  const int cols = features.cols;
  int out_rows = static_cast<int>(std::llround(rows / ratio));
  if (out_rows < 1) out_rows = 1;

  FeatureMatrix out = FeatureMatrix::zeros(out_rows, cols);
  out.frame_rate_hz = features.frame_rate_hz;
  for (int i = 0; i < out_rows; ++i) {
    const double src = (out_rows == 1 || rows == 1)
                           ? 0.0
                           : static_cast<double>(i) * (rows - 1) / (out_rows - 1);
    const int lo = static_cast<int>(src);
    const int hi = std::min(lo + 1, rows - 1);
    const double frac = src - lo;
    for (int c = 0; c < cols; ++c) {
      const double v = (1.0 - frac) * features.at(lo, c) + frac * features.at(hi, c);
      out.at(i, c) = static_cast<float>(v);
    }
  }
  return out;
}

FeatureMatrix spec_augment(const FeatureMatrix& features, const SpecAugmentConfig& config,
                           Rng& rng) {
  FeatureMatrix out = features;
  double sum = 0.0;
  for (float v : features.data) sum += v;
  const float fill =
      features.data.empty() ? 0.0f : static_cast<float>(sum / features.data.size());

  for (int m = 0; m < config.time_masks; ++m) {
    const int width = std::min(config.time_width, features.rows);
    if (width <= 0) continue;
    const int start = static_cast<int>(rng.uniform_int(features.rows - width + 1));
    for (int r = start; r < start + width; ++r) {
      for (int c = 0; c < features.cols; ++c) out.at(r, c) = fill;
    }
  }
  for (int m = 0; m < config.freq_masks; ++m) {
    const int width = std::min(config.freq_width, features.cols);
    if (width <= 0) continue;
    const int start = static_cast<int>(rng.uniform_int(features.cols - width + 1));
    for (int r = 0; r < features.rows; ++r) {
      for (int c = start; c < start + width; ++c) out.at(r, c) = fill;
    }
  }
  return out;
}

}  // namespace aphasia::corpus
