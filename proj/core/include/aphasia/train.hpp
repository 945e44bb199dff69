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
#include <functional>
#include <ostream>

#include "aphasia/corpus.hpp"
#include "aphasia/eval.hpp"
#include "aphasia/model.hpp"
#include "aphasia/optim.hpp"

namespace aphasia::model {

struct TrainConfig {
  int epochs = 40;
  int batch_size = 8;
  double base_lr = 1e-3;
  int warmup_steps = 2500;
  double grad_clip = 1.0;
  double weight_decay = 1e-6;
  int average_top_k = 10;
  std::uint64_t seed = 0;

  bool speed_perturb = true;
  std::vector<double> speed_ratios = {0.9, 1.1};
  bool specaugment = true;
  corpus::SpecAugmentConfig specaug;

  static TrainConfig from_key_values(const KeyValueFile& kv);
  void to_key_values(KeyValueFile* kv) const;
};

struct EpochLog {
  int epoch = 0;
  std::int64_t steps = 0;
  double lr = 0.0;
  double loss = 0.0;
  double ctc = 0.0;
  double inter = 0.0;
  double dec = 0.0;
  double valid_acc = 0.0;
};

struct TrainResult {
  autodiff::ParamStore final_params;  // mean of the top-k epoch checkpoints
  std::vector<EpochLog> log;
  std::vector<int> averaged_epochs;
};

// Minibatch Adam with warmup schedule, per-epoch checkpoints under
// out_dir/epochs/, top-k (validation accuracy) checkpoint averaging, and a
// JSONL training log. Deterministic in the seeds; single-threaded.
// Throws ModelError::kDiverged on a non-finite loss.
TrainResult train_model(Model& model, const TrainConfig& config,
                        const eval::LoadedDataset& train_data,
                        const eval::LoadedDataset& valid_data,
                        const std::filesystem::path& out_dir,
                        std::ostream* progress = nullptr);

}  // namespace aphasia::model
