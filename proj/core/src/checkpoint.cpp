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

#include "aphasia/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

static_assert(std::endian::native == std::endian::little,
              "checkpoints are little endian; big endian hosts need byte swaps");

namespace aphasia::autodiff {
namespace {

constexpr char kMagic[4] = {'A', 'P', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;

std::uint64_t fnv1a(const char* data, std::size_t n, std::uint64_t h = 1469598103934665603ull) {
  for (std::size_t i = 0; i < n; ++i) {
    h ^= static_cast<unsigned char>(data[i]);
    h *= 1099511628211ull;
  }
  return h;
}

void append(std::string& buf, const void* data, std::size_t n) {
  buf.append(static_cast<const char*>(data), n);
}

template <typename T>
void append_pod(std::string& buf, T value) {
  append(buf, &value, sizeof(T));
}

class Reader {
 public:
  Reader(const char* data, std::size_t size) : data_(data), size_(size) {}

  void read(void* out, std::size_t n) {
    if (pos_ + n > size_) {
      throw CheckpointError(CheckpointError::Code::kCorruptPayload,
                            "checkpoint truncated");
    }
    std::memcpy(out, data_ + pos_, n);
    pos_ += n;
  }
  template <typename T>
  T read_pod() {
    T v;
    read(&v, sizeof(T));
    return v;
  }
  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return size_ - pos_; }

 private:
  const char* data_;
  std::size_t size_;
  std::size_t pos_ = 0;
};

}  // namespace

void save_checkpoint(const ParamStore& params, const std::filesystem::path& path) {
  std::string buf;
  append(buf, kMagic, sizeof(kMagic));
  append_pod(buf, kVersion);
  append_pod(buf, static_cast<std::uint64_t>(params.size()));
  for (const auto& [name, t] : params) {  // ParamStore iterates in name order
    append_pod(buf, static_cast<std::uint32_t>(name.size()));
    append(buf, name.data(), name.size());
    append_pod(buf, static_cast<std::uint32_t>(t.shape().size()));
    for (int d : t.shape()) append_pod(buf, static_cast<std::uint32_t>(d));
    for (double v : t.values()) append_pod(buf, static_cast<float>(v));
  }
  append_pod(buf, fnv1a(buf.data(), buf.size()));

  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw CheckpointError(CheckpointError::Code::kIo, "cannot write " + tmp.string());
    }
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) {
      throw CheckpointError(CheckpointError::Code::kIo, "short write to " + tmp.string());
    }
  }
  std::filesystem::rename(tmp, path);
}

ParamStore load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw CheckpointError(CheckpointError::Code::kIo, "cannot open " + path.string());
  }
  std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  if (buf.size() < sizeof(kMagic) + sizeof(std::uint32_t) + 2 * sizeof(std::uint64_t)) {
    throw CheckpointError(CheckpointError::Code::kCorruptPayload,
                          "checkpoint too small: " + path.string());
  }
  const std::size_t body = buf.size() - sizeof(std::uint64_t);
  std::uint64_t stored_sum;
  std::memcpy(&stored_sum, buf.data() + body, sizeof(stored_sum));
  if (fnv1a(buf.data(), body) != stored_sum) {
    throw CheckpointError(CheckpointError::Code::kCorruptPayload,
                          "checksum mismatch in " + path.string());
  }

  Reader r(buf.data(), body);
  char magic[4];
  r.read(magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw CheckpointError(CheckpointError::Code::kCorruptPayload,
                          "bad magic in " + path.string());
  }
  const auto version = r.read_pod<std::uint32_t>();
  if (version != kVersion) {
    throw CheckpointError(CheckpointError::Code::kVersionMismatch,
                          "unsupported checkpoint version " + std::to_string(version));
  }
  const auto count = r.read_pod<std::uint64_t>();
  ParamStore store;
  for (std::uint64_t p = 0; p < count; ++p) {
    const auto name_len = r.read_pod<std::uint32_t>();
    std::string name(name_len, '\0');
    r.read(name.data(), name_len);
    const auto rank = r.read_pod<std::uint32_t>();
    Shape shape(rank);
    std::int64_t size = 1;
    for (std::uint32_t d = 0; d < rank; ++d) {
      shape[d] = static_cast<int>(r.read_pod<std::uint32_t>());
      size *= shape[d];
    }
    std::vector<double> values(static_cast<std::size_t>(size));
    for (double& v : values) v = static_cast<double>(r.read_pod<float>());
    store.emplace(name, Tensor::from_values(shape, std::move(values), true));
  }
  if (r.remaining() != 0) {
    throw CheckpointError(CheckpointError::Code::kCorruptPayload,
                          "trailing bytes in " + path.string());
  }
  return store;
}

}  // namespace aphasia::autodiff
