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

#include <filesystem>
#include <stdexcept>

#include "aphasia/optim.hpp"

namespace aphasia::autodiff {

class CheckpointError : public std::runtime_error {
 public:
  enum class Code { kVersionMismatch, kCorruptPayload, kIo };
  CheckpointError(Code code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  Code code() const { return code_; }

 private:
  Code code_;
};

// Binary checkpoint, little endian throughout:
//   magic "APCK", uint32 version (=1), uint64 parameter count,
//   then per parameter in name order: uint32 name length, name bytes,
//   uint32 rank, uint32 dims..., float32 payload;
//   trailing uint64 FNV-1a checksum over everything before it.
// Parameters are stored as float32; load widens back to double, so a
// save/load/save cycle is byte-identical.
void save_checkpoint(const ParamStore& params, const std::filesystem::path& path);
ParamStore load_checkpoint(const std::filesystem::path& path);

}  // namespace aphasia::autodiff
