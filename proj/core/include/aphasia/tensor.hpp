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
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace aphasia::autodiff {

using Shape = std::vector<int>;

class TensorError : public std::runtime_error {
 public:
  enum class Code {
    kShapeMismatch,
    kNonScalarLoss,
    kGraphCycle,
    kMissingGrad,
    kNanDetected,
  };
  TensorError(Code code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  Code code() const { return code_; }

 private:
  Code code_;
};

namespace detail {
struct Node {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;  // sized lazily by backward()
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> inputs;
  std::function<void()> backprop;  // accumulates into inputs' grads

  std::int64_t size() const { return static_cast<std::int64_t>(value.size()); }
  void ensure_grad() {
    if (grad.size() != value.size()) grad.assign(value.size(), 0.0);
  }
};
}  // namespace detail

// Dense tensor of doubles with a reverse-mode tape. Value-semantics handle:
// copies share the underlying node. Rank 1 and 2 cover everything the model
// needs; losses and gradients accumulate in 64-bit.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(const Shape& shape, bool requires_grad = false);
  static Tensor full(const Shape& shape, double value, bool requires_grad = false);
  static Tensor from_values(const Shape& shape, std::vector<double> values,
                            bool requires_grad = false);
  static Tensor scalar(double value);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  int dim(int i) const { return node_->shape[static_cast<std::size_t>(i)]; }
  int rank() const { return static_cast<int>(node_->shape.size()); }
  std::int64_t size() const { return node_->size(); }
  bool requires_grad() const { return node_->requires_grad; }

  std::span<const double> values() const { return node_->value; }
  // Leaf mutation (parameters, feature staging). Mutating a non-leaf
  // invalidates recorded gradients, so only leaves expose this.
  std::span<double> values_mut();
  std::span<const double> grad() const { return node_->grad; }
  std::span<double> grad_mut();
  bool has_grad() const { return node_ && node_->grad.size() == node_->value.size(); }
  void zero_grad();

  double item() const;
  double at(int r, int c) const { return node_->value[static_cast<std::size_t>(r) * dim(1) + c]; }

  std::shared_ptr<detail::Node> node() const { return node_; }
  static Tensor wrap(std::shared_ptr<detail::Node> node);

 private:
  std::shared_ptr<detail::Node> node_;
};

// --- graph construction -----------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b);                   // [M,K]x[K,N]
Tensor transpose(const Tensor& a);                                 // [M,N]->[N,M]
Tensor add(const Tensor& a, const Tensor& b);                      // same shape
Tensor sub(const Tensor& a, const Tensor& b);
Tensor add_rowwise(const Tensor& m, const Tensor& row);            // [N,C]+[C]
Tensor mul(const Tensor& a, const Tensor& b);                      // elementwise
Tensor scale(const Tensor& a, double c);
Tensor add_scalar(const Tensor& a, double c);
Tensor relu(const Tensor& a);
Tensor gelu(const Tensor& a);
Tensor exp(const Tensor& a);
Tensor softmax_rows(const Tensor& a);
Tensor log_softmax_rows(const Tensor& a);
Tensor layer_norm_rows(const Tensor& x, const Tensor& gain, const Tensor& bias,
                       double eps = 1e-5);
Tensor slice_rows(const Tensor& a, int begin, int end);
Tensor slice_cols(const Tensor& a, int begin, int end);
Tensor concat_rows(const Tensor& a, const Tensor& b);
Tensor concat_cols(const Tensor& a, const Tensor& b);
Tensor select_rows(const Tensor& a, std::vector<int> indices);     // gather
Tensor sum(const Tensor& a);                                       // scalar
Tensor mean(const Tensor& a);                                      // scalar
// mean_i of -logp[i, target[i]]; the teacher-forcing pick term.
Tensor nll_gather_mean(const Tensor& logp, std::vector<int> targets);

// Custom node with an analytically known input gradient (used by the CTC
// bridge): value is scalar `value`, backward adds upstream * input_grad.
Tensor scalar_with_input_grad(const Tensor& input, double value,
                              std::vector<double> input_grad);

// Reverse-mode sweep from a scalar loss. Populates grad on every
// requires_grad tensor reachable from it.
void backward(const Tensor& loss);

bool all_finite(const Tensor& t);

}  // namespace aphasia::autodiff
