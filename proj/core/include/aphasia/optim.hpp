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
#include <string>
#include <vector>

#include "aphasia/tensor.hpp"

namespace aphasia::autodiff {

// Named parameter tensors with stable (name-sorted) iteration order.
class ParamStore {
 public:
  Tensor& emplace(const std::string& name, Tensor tensor);
  Tensor& at(const std::string& name);
  const Tensor& at(const std::string& name) const;
  bool contains(const std::string& name) const { return params_.count(name) > 0; }
  std::size_t size() const { return params_.size(); }
  bool empty() const { return params_.empty(); }

  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

  void zero_grad();
  std::int64_t num_values() const;

 private:
  std::map<std::string, Tensor> params_;
};

// lr(step) = base_lr * warmup^0.5 * min(step^-0.5, step * warmup^-1.5).
// Linear ramp to base_lr at step == warmup_steps, inverse-sqrt decay after.
double warmup_lr(std::int64_t step, double base_lr, std::int64_t warmup_steps);

// Scales all gradients so their global L2 norm is at most max_norm.
// Returns the pre-clip norm. max_norm <= 0 disables clipping.
double clip_global_norm(ParamStore& params, double max_norm);

struct AdamConfig {
  double base_lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 1e-6;
  double clip_norm = 1.0;
};

// Adam with L2-style weight decay added to the (already clipped) gradient.
class AdamState {
 public:
  AdamState(const ParamStore& params, AdamConfig config);

  // Clips, applies weight decay, updates moments and parameters.
  // Throws TensorError::kMissingGrad when a parameter has no gradient.
  void step(ParamStore& params, double lr);
  void step(ParamStore& params) { step(params, config_.base_lr); }

  std::int64_t step_count() const { return step_count_; }
  const AdamConfig& config() const { return config_; }

 private:
  AdamConfig config_;
  std::int64_t step_count_ = 0;
  std::map<std::string, std::vector<double>> m_;
  std::map<std::string, std::vector<double>> v_;
};

// Element-wise arithmetic mean of identically shaped stores.
ParamStore average_checkpoints(const std::vector<ParamStore>& checkpoints);

}  // namespace aphasia::autodiff
