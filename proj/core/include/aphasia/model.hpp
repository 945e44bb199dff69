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
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aphasia/config_file.hpp"
#include "aphasia/ctc.hpp"
#include "aphasia/feature_io.hpp"
#include "aphasia/optim.hpp"
#include "aphasia/tensor.hpp"
#include "aphasia/vocab.hpp"

namespace aphasia::model {

enum class TagMode { kNone, kPrepend, kAppend, kBoth };
enum class InterTarget { kAsrTokens, kTagPrefixedTokens };

std::string_view tag_mode_name(TagMode mode);
std::optional<TagMode> tag_mode_from_name(std::string_view name);

class ModelError : public std::runtime_error {
 public:
  enum class Code { kAlreadyTagged, kBadConfig, kDiverged };
  ModelError(Code code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  Code code() const { return code_; }

 private:
  Code code_;
};

struct ModelConfig {
  int feature_dim = 16;
  int num_layers = 4;   // encoder blocks E
  int hidden_dim = 64;  // H
  int num_heads = 2;
  int mlp_dim = 128;    // gated-MLP branch width (split in half by the gate)
  int decoder_layers = 2;
  int subsample = 2;  // frame stride at the frontend (1 = none)

  // 1-based tap positions, strictly inside the stack (1 <= e < E). The tap
  // after layer e feeds layer e+1.
  std::vector<int> interctc_layers;
  std::vector<InterTarget> interctc_targets;  // parallel to interctc_layers
  bool interctc_condition = true;

  double ctc_weight = 0.3;       // lambda
  double interctc_weight = 0.3;  // alpha
  TagMode tag_mode = TagMode::kNone;
  double label_smoothing = 0.1;
  std::uint64_t init_seed = 0;

  void validate() const;  // throws ModelError::kBadConfig
  static ModelConfig from_key_values(const KeyValueFile& kv);
  void to_key_values(KeyValueFile* kv) const;
};

// Loss components of one batch; total follows the weighted combination of
// the CTC, InterCTC and decoder terms.
struct LossBreakdown {
  double ctc = 0.0;
  double dec = 0.0;
  double inter_mean = 0.0;
  std::vector<std::pair<int, double>> inter_per_layer;  // (1-based layer, loss)
  double total = 0.0;
  bool has_taps = false;
  int infeasible_items = 0;
};

// total = lambda*(alpha*inter + (1-alpha)*ctc) + (1-lambda)*dec when taps
// exist, otherwise lambda*ctc + (1-lambda)*dec.
double combine_losses(double lambda, double alpha, double l_ctc, double l_inter_mean,
                      double l_dec, bool has_taps);

// Inserts the label's tag per mode (tag ids are the fixed reserved ids).
// Throws kAlreadyTagged when the input already contains a tag token.
std::vector<int> insert_tags(std::span<const int> tokens, bool aphasia, TagMode mode);

// Removes all tag tokens; returns (remaining tokens, extracted tags in
// order). Inverse of insert_tags on its image.
std::pair<std::vector<int>, std::vector<int>> strip_tags(std::span<const int> tokens);

struct EncodeResult {
  autodiff::Tensor hidden;                                  // L'×H
  autodiff::Tensor final_logp;                              // L'×V log softmax
  std::vector<std::pair<int, autodiff::Tensor>> inter_logp; // (1-based layer, L'×V)

  ctc::LogProbLattice final_lattice() const;
  ctc::LogProbLattice inter_lattice(int layer) const;
};

struct TrainItem {
  corpus::FeatureMatrix features;
  std::vector<int> tokens;  // plain ASR token ids, no tags
  bool aphasia = false;
};

struct LossOutput {
  autodiff::Tensor loss;  // scalar graph tensor for backward()
  LossBreakdown breakdown;
};

// Two-branch encoder (self-attention branch in parallel with a gated MLP
// branch, concatenated, linearly merged, residual + layer norm) with
// intermediate CTC taps, plus a pre-LN transformer decoder over the
// tag-extended vocabulary. Parameters are double precision; checkpoints
// store float32.
class Model {
 public:
  Model(ModelConfig config, int vocab_size);                           // fresh init
  Model(ModelConfig config, int vocab_size, autodiff::ParamStore params);  // from checkpoint

  const ModelConfig& config() const { return config_; }
  int vocab_size() const { return vocab_size_; }
  autodiff::ParamStore& params() { return params_; }
  const autodiff::ParamStore& params() const { return params_; }

  // Forward pass of the encoder over one utterance. Emits the final CTC
  // lattice and one lattice per tap; when conditioning is enabled each tap
  // feeds Norm(h) + Linear(posteriors) into the next block.
  EncodeResult encode(const corpus::FeatureMatrix& features) const;

  // Teacher-forced decoder log-probabilities, one row per input position.
  // input_ids must start with sos. valid_frames < 0 means every encoder
  // frame is attendable; otherwise frames at or beyond the limit are masked.
  autodiff::Tensor decoder_logp(const autodiff::Tensor& enc_hidden,
                                std::span<const int> input_ids,
                                int valid_frames = -1) const;

  // Next-token log-distribution after the given prefix (sos implied).
  std::vector<double> decode_step(const autodiff::Tensor& enc_hidden,
                                  std::span<const int> prefix,
                                  int valid_frames = -1) const;

  // Multi-task loss over a batch (mean of per-utterance losses).
  LossOutput compute_loss(std::span<const TrainItem> batch) const;

  // Teacher-forced next-token accuracy over a batch (validation metric).
  double teacher_forced_accuracy(std::span<const TrainItem> batch) const;

  // Per-layer InterCTC target: plain tokens for ASR taps, tag-prefixed for
  // detector taps.
  static std::vector<int> inter_target(std::span<const int> tokens, bool aphasia,
                                       InterTarget kind);

 private:
  void init_params();
  void check_params() const;
  autodiff::Tensor encoder_block(const autodiff::Tensor& x, int block_index) const;
  autodiff::Tensor attention(const autodiff::Tensor& q_input,
                             const autodiff::Tensor& kv_input, const std::string& prefix,
                             bool causal, int valid_kv = -1) const;

  ModelConfig config_;
  int vocab_size_ = 0;
  autodiff::ParamStore params_;
};

}  // namespace aphasia::model
