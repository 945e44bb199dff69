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
#include <filesystem>
#include <stdexcept>
#include <vector>

namespace aphasia::corpus {

// L×D acoustic feature matrix, row-major. frame_rate_hz is an in-memory
// property (the file format carries only the matrix).
struct FeatureMatrix {
  int rows = 0;  // frames L
  int cols = 0;  // feature dim D
  std::vector<float> data;
  double frame_rate_hz = 100.0;

  static FeatureMatrix zeros(int rows, int cols);
  float at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
  float& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  bool all_finite() const;
};

class FeatureIoError : public std::runtime_error {
 public:
  explicit FeatureIoError(const std::string& message) : std::runtime_error(message) {}
};

// File format: 16-byte header (8-byte magic "APHFEAT0", uint32 L, uint32 D,
// little endian) followed by L*D little-endian float32 values, row-major.
// Round trips are bit-exact.
void save_features(const FeatureMatrix& features, const std::filesystem::path& path);
FeatureMatrix load_features(const std::filesystem::path& path);

}  // namespace aphasia::corpus
