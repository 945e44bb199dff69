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

#include "aphasia/optim.hpp"

#include <cmath>

namespace aphasia::autodiff {

Tensor& ParamStore::emplace(const std::string& name, Tensor tensor) {
  auto [it, inserted] = params_.emplace(name, std::move(tensor));
  if (!inserted) {
    throw TensorError(TensorError::Code::kShapeMismatch,
                      "ParamStore: duplicate parameter '" + name + "'");
  }
  return it->second;
}

Tensor& ParamStore::at(const std::string& name) {
  auto it = params_.find(name);
  if (it == params_.end()) {
    throw TensorError(TensorError::Code::kShapeMismatch,
                      "ParamStore: unknown parameter '" + name + "'");
  }
  return it->second;
}

const Tensor& ParamStore::at(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) {
    throw TensorError(TensorError::Code::kShapeMismatch,
                      "ParamStore: unknown parameter '" + name + "'");
  }
  return it->second;
}

void ParamStore::zero_grad() {
  for (auto& [name, t] : params_) t.zero_grad();
}

std::int64_t ParamStore::num_values() const {
  std::int64_t n = 0;
  for (const auto& [name, t] : params_) n += t.size();
  return n;
}

double warmup_lr(std::int64_t step, double base_lr, std::int64_t warmup_steps) {
  const double s = static_cast<double>(step);
  const double w = static_cast<double>(warmup_steps);
  return base_lr * std::sqrt(w) * std::min(1.0 / std::sqrt(s), s / (w * std::sqrt(w)));
}

double clip_global_norm(ParamStore& params, double max_norm) {
  double sq = 0.0;
  for (auto& [name, t] : params) {
    if (!t.has_grad()) continue;
    for (double g : t.grad()) sq += g * g;
  }
  const double norm = std::sqrt(sq);
  if (max_norm > 0 && norm > max_norm) {
    const double factor = max_norm / norm;
    for (auto& [name, t] : params) {
      if (!t.has_grad()) continue;
      for (double& g : t.grad_mut()) g *= factor;
    }
  }
  return norm;
}

AdamState::AdamState(const ParamStore& params, AdamConfig config) : config_(config) {
  for (const auto& [name, t] : params) {
    m_[name].assign(static_cast<std::size_t>(t.size()), 0.0);
    v_[name].assign(static_cast<std::size_t>(t.size()), 0.0);
  }
}

void AdamState::step(ParamStore& params, double lr) {
  for (auto& [name, t] : params) {
    if (!t.has_grad()) {
      throw TensorError(TensorError::Code::kMissingGrad,
                        "adam: parameter '" + name + "' has no gradient");
    }
  }
  clip_global_norm(params, config_.clip_norm);
  ++step_count_;
  const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(step_count_));
  const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(step_count_));
  for (auto& [name, t] : params) {
    auto theta = t.values_mut();
    auto grad = t.grad();
    std::vector<double>& m = m_.at(name);
    std::vector<double>& v = v_.at(name);
    for (std::size_t i = 0; i < theta.size(); ++i) {
      const double g = grad[i] + config_.weight_decay * theta[i];
      m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * g;
      v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * g * g;
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      theta[i] -= lr * mhat / (std::sqrt(vhat) + config_.eps);
    }
  }
}

ParamStore average_checkpoints(const std::vector<ParamStore>& checkpoints) {
  if (checkpoints.empty()) {
    throw TensorError(TensorError::Code::kShapeMismatch,
                      "average_checkpoints: empty checkpoint list");
  }
  ParamStore out;
  const ParamStore& first = checkpoints.front();
  for (const auto& [name, t] : first) {
    std::vector<double> acc(t.values().begin(), t.values().end());
    for (std::size_t k = 1; k < checkpoints.size(); ++k) {
      if (!checkpoints[k].contains(name)) {
        throw TensorError(TensorError::Code::kShapeMismatch,
                          "average_checkpoints: '" + name + "' missing in checkpoint " +
                              std::to_string(k));
      }
      const Tensor& other = checkpoints[k].at(name);
      if (other.shape() != t.shape()) {
        throw TensorError(TensorError::Code::kShapeMismatch,
                          "average_checkpoints: shape mismatch for '" + name + "'");
      }
      auto vals = other.values();
      for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += vals[i];
    }
    const double inv = 1.0 / static_cast<double>(checkpoints.size());
    for (double& x : acc) x *= inv;
    out.emplace(name, Tensor::from_values(t.shape(), std::move(acc), true));
  }
  for (std::size_t k = 1; k < checkpoints.size(); ++k) {
    if (checkpoints[k].size() != first.size()) {
      throw TensorError(TensorError::Code::kShapeMismatch,
                        "average_checkpoints: checkpoints disagree on parameter names");
    }
  }
  return out;
}

}  // namespace aphasia::autodiff
