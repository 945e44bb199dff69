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

#include "aphasia/feature_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

static_assert(std::endian::native == std::endian::little,
              "feature files are little endian; big endian hosts need byte swaps");

namespace aphasia::corpus {
namespace {

constexpr char kMagic[8] = {'A', 'P', 'H', 'F', 'E', 'A', 'T', '0'};

}  // namespace

FeatureMatrix FeatureMatrix::zeros(int rows, int cols) {
  FeatureMatrix f;
  f.rows = rows;
  f.cols = cols;
  f.data.assign(static_cast<std::size_t>(rows) * cols, 0.0f);
  return f;
}

bool FeatureMatrix::all_finite() const {
  for (float v : data) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void save_features(const FeatureMatrix& features, const std::filesystem::path& path) {
  if (features.rows < 1 || features.cols < 1 ||
      features.data.size() != static_cast<std::size_t>(features.rows) * features.cols) {
    throw FeatureIoError("refusing to save malformed feature matrix");
  }
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FeatureIoError("cannot write " + tmp.string());
    out.write(kMagic, sizeof(kMagic));
    std::uint32_t dims[2] = {static_cast<std::uint32_t>(features.rows),
                             static_cast<std::uint32_t>(features.cols)};
    out.write(reinterpret_cast<const char*>(dims), sizeof(dims));
    out.write(reinterpret_cast<const char*>(features.data.data()),
              static_cast<std::streamsize>(features.data.size() * sizeof(float)));
    if (!out) throw FeatureIoError("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

FeatureMatrix load_features(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FeatureIoError("cannot open " + path.string());
  char magic[8];
  std::uint32_t dims[2];
  in.read(magic, sizeof(magic));
  in.read(reinterpret_cast<char*>(dims), sizeof(dims));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw FeatureIoError("bad feature file header in " + path.string());
  }
  if (dims[0] < 1 || dims[1] < 1) {
    throw FeatureIoError("empty feature matrix in " + path.string());
  }
  FeatureMatrix f;
  f.rows = static_cast<int>(dims[0]);
  f.cols = static_cast<int>(dims[1]);
  f.data.resize(static_cast<std::size_t>(f.rows) * f.cols);
  in.read(reinterpret_cast<char*>(f.data.data()),
          static_cast<std::streamsize>(f.data.size() * sizeof(float)));
  if (!in || in.gcount() != static_cast<std::streamsize>(f.data.size() * sizeof(float))) {
    throw FeatureIoError("truncated feature payload in " + path.string());
  }
  return f;
}

}  // namespace aphasia::corpus
