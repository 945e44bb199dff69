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

#include "aphasia/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

namespace aphasia::autodiff {

using detail::Node;
using NodePtr = std::shared_ptr<Node>;

namespace {

std::int64_t shape_size(const Shape& shape) {
  std::int64_t n = 1;
  for (int d : shape) n *= d;
  return n;
}

NodePtr make_node(Shape shape, std::vector<NodePtr> inputs) {
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value.resize(static_cast<std::size_t>(shape_size(node->shape)));
  node->inputs = std::move(inputs);
  for (const NodePtr& in : node->inputs) {
    if (in->requires_grad) node->requires_grad = true;
  }
  return node;
}

void check(bool cond, TensorError::Code code, const std::string& message) {
  if (!cond) throw TensorError(code, message);
}

void check_rank2(const Tensor& t, const char* who) {
  check(t.rank() == 2, TensorError::Code::kShapeMismatch,
        std::string(who) + ": rank-2 tensor required");
}

// C(+)= A*B with optional transposes; plain loops, k-innermost for nn.
void mm_nn(const double* a, const double* b, double* c, int m, int k, int n, bool accumulate) {
  if (!accumulate) std::fill(c, c + static_cast<std::size_t>(m) * n, 0.0);
  for (int i = 0; i < m; ++i) {
    const double* arow = a + static_cast<std::size_t>(i) * k;
    double* crow = c + static_cast<std::size_t>(i) * n;
    for (int p = 0; p < k; ++p) {
      const double av = arow[p];
      if (av == 0.0) continue;
      const double* brow = b + static_cast<std::size_t>(p) * n;
      for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

// C(+)= A * B^T, A:[m,k] B:[n,k]
void mm_nt(const double* a, const double* b, double* c, int m, int k, int n, bool accumulate) {
  for (int i = 0; i < m; ++i) {
    const double* arow = a + static_cast<std::size_t>(i) * k;
    double* crow = c + static_cast<std::size_t>(i) * n;
    for (int j = 0; j < n; ++j) {
      const double* brow = b + static_cast<std::size_t>(j) * k;
      double acc = 0.0;
      for (int p = 0; p < k; ++p) acc += arow[p] * brow[p];
      crow[j] = accumulate ? crow[j] + acc : acc;
    }
  }
}

// C(+)= A^T * B, A:[k,m] B:[k,n]
void mm_tn(const double* a, const double* b, double* c, int m, int k, int n, bool accumulate) {
  if (!accumulate) std::fill(c, c + static_cast<std::size_t>(m) * n, 0.0);
  for (int p = 0; p < k; ++p) {
    const double* arow = a + static_cast<std::size_t>(p) * m;
    const double* brow = b + static_cast<std::size_t>(p) * n;
    for (int i = 0; i < m; ++i) {
      const double av = arow[i];
      if (av == 0.0) continue;
      double* crow = c + static_cast<std::size_t>(i) * n;
      for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

}  // namespace

Tensor Tensor::wrap(NodePtr node) {
  Tensor t;
  t.node_ = std::move(node);
  return t;
}

Tensor Tensor::zeros(const Shape& shape, bool requires_grad) {
  auto node = make_node(shape, {});
  node->requires_grad = requires_grad;
  return wrap(std::move(node));
}

Tensor Tensor::full(const Shape& shape, double value, bool requires_grad) {
  Tensor t = zeros(shape, requires_grad);
  std::fill(t.node_->value.begin(), t.node_->value.end(), value);
  return t;
}

Tensor Tensor::from_values(const Shape& shape, std::vector<double> values,
                           bool requires_grad) {
  check(static_cast<std::int64_t>(values.size()) == shape_size(shape),
        TensorError::Code::kShapeMismatch, "from_values: size does not match shape");
  auto node = make_node(shape, {});
  node->value = std::move(values);
  node->requires_grad = requires_grad;
  return wrap(std::move(node));
}

Tensor Tensor::scalar(double value) { return from_values({1}, {value}); }

std::span<double> Tensor::values_mut() {
  check(node_->inputs.empty(), TensorError::Code::kShapeMismatch,
        "values_mut: only leaf tensors are mutable");
  return node_->value;
}

std::span<double> Tensor::grad_mut() {
  node_->ensure_grad();
  return node_->grad;
}

void Tensor::zero_grad() {
  if (node_) node_->grad.clear();
}

double Tensor::item() const {
  check(size() == 1, TensorError::Code::kNonScalarLoss, "item: tensor is not scalar");
  return node_->value[0];
}

// --- ops ---------------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b) {
  check_rank2(a, "matmul");
  check_rank2(b, "matmul");
  const int m = a.dim(0), k = a.dim(1), n = b.dim(1);
  check(b.dim(0) == k, TensorError::Code::kShapeMismatch, "matmul: inner dims differ");
  auto node = make_node({m, n}, {a.node(), b.node()});
  mm_nn(a.values().data(), b.values().data(), node->value.data(), m, k, n, false);
  Node* self = node.get();
  node->backprop = [self, m, k, n] {
    Node* A = self->inputs[0].get();
    Node* B = self->inputs[1].get();
    if (A->requires_grad) {
      A->ensure_grad();
      mm_nt(self->grad.data(), B->value.data(), A->grad.data(), m, n, k, true);
    }
    if (B->requires_grad) {
      B->ensure_grad();
      // dB [k,n] = A^T [k,m] * dC [m,n]
      mm_tn(A->value.data(), self->grad.data(), B->grad.data(), k, m, n, true);
    }
  };
  return Tensor::wrap(std::move(node));
}

Tensor transpose(const Tensor& a) {
  check_rank2(a, "transpose");
  const int m = a.dim(0), n = a.dim(1);
  auto node = make_node({n, m}, {a.node()});
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j)
      node->value[static_cast<std::size_t>(j) * m + i] = a.values()[static_cast<std::size_t>(i) * n + j];
  Node* self = node.get();
  node->backprop = [self, m, n] {
    Node* A = self->inputs[0].get();
    if (!A->requires_grad) return;
    A->ensure_grad();
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < m; ++i)
        A->grad[static_cast<std::size_t>(i) * n + j] += self->grad[static_cast<std::size_t>(j) * m + i];
  };
  return Tensor::wrap(std::move(node));
}

namespace {

Tensor binary_same_shape(const Tensor& a, const Tensor& b, const char* who,
                         void (*fwd)(const double*, const double*, double*, std::size_t),
                         std::function<void(Node*)> bwd) {
  check(a.shape() == b.shape(), TensorError::Code::kShapeMismatch,
        std::string(who) + ": shapes differ");
  auto node = make_node(a.shape(), {a.node(), b.node()});
  fwd(a.values().data(), b.values().data(), node->value.data(), node->value.size());
  Node* self = node.get();
  node->backprop = [self, bwd = std::move(bwd)] { bwd(self); };
  return Tensor::wrap(std::move(node));
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  return binary_same_shape(
      a, b, "add",
      [](const double* x, const double* y, double* o, std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) o[i] = x[i] + y[i];
      },
      [](Node* self) {
        for (int s = 0; s < 2; ++s) {
          Node* in = self->inputs[static_cast<std::size_t>(s)].get();
          if (!in->requires_grad) continue;
          in->ensure_grad();
          for (std::size_t i = 0; i < self->grad.size(); ++i) in->grad[i] += self->grad[i];
        }
      });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return binary_same_shape(
      a, b, "sub",
      [](const double* x, const double* y, double* o, std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) o[i] = x[i] - y[i];
      },
      [](Node* self) {
        Node* A = self->inputs[0].get();
        Node* B = self->inputs[1].get();
        if (A->requires_grad) {
          A->ensure_grad();
          for (std::size_t i = 0; i < self->grad.size(); ++i) A->grad[i] += self->grad[i];
        }
        if (B->requires_grad) {
          B->ensure_grad();
          for (std::size_t i = 0; i < self->grad.size(); ++i) B->grad[i] -= self->grad[i];
        }
      });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return binary_same_shape(
      a, b, "mul",
      [](const double* x, const double* y, double* o, std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) o[i] = x[i] * y[i];
      },
      [](Node* self) {
        Node* A = self->inputs[0].get();
        Node* B = self->inputs[1].get();
        if (A->requires_grad) {
          A->ensure_grad();
          for (std::size_t i = 0; i < self->grad.size(); ++i)
            A->grad[i] += self->grad[i] * B->value[i];
        }
        if (B->requires_grad) {
          B->ensure_grad();
          for (std::size_t i = 0; i < self->grad.size(); ++i)
            B->grad[i] += self->grad[i] * A->value[i];
        }
      });
}

Tensor add_rowwise(const Tensor& m, const Tensor& row) {
  check_rank2(m, "add_rowwise");
  check(row.rank() == 1 && row.dim(0) == m.dim(1), TensorError::Code::kShapeMismatch,
        "add_rowwise: row length must match columns");
  const int rows = m.dim(0), cols = m.dim(1);
  auto node = make_node(m.shape(), {m.node(), row.node()});
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      node->value[static_cast<std::size_t>(r) * cols + c] =
          m.values()[static_cast<std::size_t>(r) * cols + c] + row.values()[static_cast<std::size_t>(c)];
  Node* self = node.get();
  node->backprop = [self, rows, cols] {
    Node* M = self->inputs[0].get();
    Node* R = self->inputs[1].get();
    if (M->requires_grad) {
      M->ensure_grad();
      for (std::size_t i = 0; i < self->grad.size(); ++i) M->grad[i] += self->grad[i];
    }
    if (R->requires_grad) {
      R->ensure_grad();
      for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
          R->grad[static_cast<std::size_t>(c)] += self->grad[static_cast<std::size_t>(r) * cols + c];
    }
  };
  return Tensor::wrap(std::move(node));
}

namespace {

Tensor unary(const Tensor& a, std::function<double(double)> f,
             std::function<double(double, double)> df /* (x, y) -> dy/dx */) {
  auto node = make_node(a.shape(), {a.node()});
  for (std::size_t i = 0; i < node->value.size(); ++i) node->value[i] = f(a.values()[i]);
  Node* self = node.get();
  node->backprop = [self, df = std::move(df)] {
    Node* A = self->inputs[0].get();
    if (!A->requires_grad) return;
    A->ensure_grad();
    for (std::size_t i = 0; i < self->grad.size(); ++i)
      A->grad[i] += self->grad[i] * df(A->value[i], self->value[i]);
  };
  return Tensor::wrap(std::move(node));
}

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

}  // namespace

Tensor scale(const Tensor& a, double c) {
  return unary(a, [c](double x) { return c * x; }, [c](double, double) { return c; });
}

Tensor add_scalar(const Tensor& a, double c) {
  return unary(a, [c](double x) { return x + c; }, [](double, double) { return 1.0; });
}

Tensor relu(const Tensor& a) {
  return unary(a, [](double x) { return x > 0 ? x : 0.0; },
               [](double x, double) { return x > 0 ? 1.0 : 0.0; });
}

Tensor gelu(const Tensor& a) {
  return unary(a,
               [](double x) { return 0.5 * x * (1.0 + std::erf(x * kInvSqrt2)); },
               [](double x, double) {
                 const double cdf = 0.5 * (1.0 + std::erf(x * kInvSqrt2));
                 const double pdf = kInvSqrt2Pi * std::exp(-0.5 * x * x);
                 return cdf + x * pdf;
               });
}

Tensor exp(const Tensor& a) {
  return unary(a, [](double x) { return std::exp(x); },
               [](double, double y) { return y; });
}

Tensor softmax_rows(const Tensor& a) {
  check_rank2(a, "softmax_rows");
  const int rows = a.dim(0), cols = a.dim(1);
  auto node = make_node(a.shape(), {a.node()});
  for (int r = 0; r < rows; ++r) {
    const double* x = a.values().data() + static_cast<std::size_t>(r) * cols;
    double* y = node->value.data() + static_cast<std::size_t>(r) * cols;
    double mx = x[0];
    for (int c = 1; c < cols; ++c) mx = std::max(mx, x[c]);
    double z = 0.0;
    for (int c = 0; c < cols; ++c) z += (y[c] = std::exp(x[c] - mx));
    for (int c = 0; c < cols; ++c) y[c] /= z;
  }
  Node* self = node.get();
  node->backprop = [self, rows, cols] {
    Node* A = self->inputs[0].get();
    if (!A->requires_grad) return;
    A->ensure_grad();
    for (int r = 0; r < rows; ++r) {
      const double* y = self->value.data() + static_cast<std::size_t>(r) * cols;
      const double* g = self->grad.data() + static_cast<std::size_t>(r) * cols;
      double dot = 0.0;
      for (int c = 0; c < cols; ++c) dot += g[c] * y[c];
      double* da = A->grad.data() + static_cast<std::size_t>(r) * cols;
      for (int c = 0; c < cols; ++c) da[c] += y[c] * (g[c] - dot);
    }
  };
  return Tensor::wrap(std::move(node));
}

Tensor log_softmax_rows(const Tensor& a) {
  check_rank2(a, "log_softmax_rows");
  const int rows = a.dim(0), cols = a.dim(1);
  auto node = make_node(a.shape(), {a.node()});
  for (int r = 0; r < rows; ++r) {
    const double* x = a.values().data() + static_cast<std::size_t>(r) * cols;
    double* y = node->value.data() + static_cast<std::size_t>(r) * cols;
    double mx = x[0];
    for (int c = 1; c < cols; ++c) mx = std::max(mx, x[c]);
    double z = 0.0;
    for (int c = 0; c < cols; ++c) z += std::exp(x[c] - mx);
    const double lse = mx + std::log(z);
    for (int c = 0; c < cols; ++c) y[c] = x[c] - lse;
  }
  Node* self = node.get();
  node->backprop = [self, rows, cols] {
    Node* A = self->inputs[0].get();
    if (!A->requires_grad) return;
    A->ensure_grad();
    for (int r = 0; r < rows; ++r) {
      const double* y = self->value.data() + static_cast<std::size_t>(r) * cols;
      const double* g = self->grad.data() + static_cast<std::size_t>(r) * cols;
      double gsum = 0.0;
      for (int c = 0; c < cols; ++c) gsum += g[c];
      double* da = A->grad.data() + static_cast<std::size_t>(r) * cols;
      for (int c = 0; c < cols; ++c) da[c] += g[c] - std::exp(y[c]) * gsum;
    }
  };
  return Tensor::wrap(std::move(node));
}

Tensor layer_norm_rows(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps) {
  check_rank2(x, "layer_norm_rows");
  const int rows = x.dim(0), cols = x.dim(1);
  check(gain.rank() == 1 && gain.dim(0) == cols && bias.rank() == 1 && bias.dim(0) == cols,
        TensorError::Code::kShapeMismatch, "layer_norm_rows: gain/bias length mismatch");
  auto node = make_node(x.shape(), {x.node(), gain.node(), bias.node()});
  // Cache inverse stddev and normalized values for backward.
  auto inv_std = std::make_shared<std::vector<double>>(rows);
  auto xhat = std::make_shared<std::vector<double>>(static_cast<std::size_t>(rows) * cols);
  for (int r = 0; r < rows; ++r) {
    const double* xr = x.values().data() + static_cast<std::size_t>(r) * cols;
    double mean = 0.0;
    for (int c = 0; c < cols; ++c) mean += xr[c];
    mean /= cols;
    double var = 0.0;
    for (int c = 0; c < cols; ++c) var += (xr[c] - mean) * (xr[c] - mean);
    var /= cols;
    const double istd = 1.0 / std::sqrt(var + eps);
    (*inv_std)[static_cast<std::size_t>(r)] = istd;
    for (int c = 0; c < cols; ++c) {
      const double h = (xr[c] - mean) * istd;
      (*xhat)[static_cast<std::size_t>(r) * cols + c] = h;
      node->value[static_cast<std::size_t>(r) * cols + c] =
          gain.values()[static_cast<std::size_t>(c)] * h + bias.values()[static_cast<std::size_t>(c)];
    }
  }
  Node* self = node.get();
  node->backprop = [self, rows, cols, inv_std, xhat] {
    Node* X = self->inputs[0].get();
    Node* G = self->inputs[1].get();
    Node* B = self->inputs[2].get();
    if (G->requires_grad) {
      G->ensure_grad();
      for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
          G->grad[static_cast<std::size_t>(c)] +=
              self->grad[static_cast<std::size_t>(r) * cols + c] *
              (*xhat)[static_cast<std::size_t>(r) * cols + c];
    }
    if (B->requires_grad) {
      B->ensure_grad();
      for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
          B->grad[static_cast<std::size_t>(c)] += self->grad[static_cast<std::size_t>(r) * cols + c];
    }
    if (X->requires_grad) {
      X->ensure_grad();
      for (int r = 0; r < rows; ++r) {
        const double* g = self->grad.data() + static_cast<std::size_t>(r) * cols;
        const double* h = xhat->data() + static_cast<std::size_t>(r) * cols;
        double mean_dh = 0.0, mean_dhh = 0.0;
        for (int c = 0; c < cols; ++c) {
          const double dh = g[c] * G->value[static_cast<std::size_t>(c)];
          mean_dh += dh;
          mean_dhh += dh * h[c];
        }
        mean_dh /= cols;
        mean_dhh /= cols;
        const double istd = (*inv_std)[static_cast<std::size_t>(r)];
        double* dx = X->grad.data() + static_cast<std::size_t>(r) * cols;
        for (int c = 0; c < cols; ++c) {
          const double dh = g[c] * G->value[static_cast<std::size_t>(c)];
          dx[c] += istd * (dh - mean_dh - h[c] * mean_dhh);
        }
      }
    }
  };
  return Tensor::wrap(std::move(node));
}

Tensor slice_rows(const Tensor& a, int begin, int end) {
  check_rank2(a, "slice_rows");
  check(0 <= begin && begin < end && end <= a.dim(0), TensorError::Code::kShapeMismatch,
        "slice_rows: bad range");
  const int cols = a.dim(1);
  auto node = make_node({end - begin, cols}, {a.node()});
  std::copy_n(a.values().data() + static_cast<std::size_t>(begin) * cols,
              node->value.size(), node->value.data());
  Node* self = node.get();
  node->backprop = [self, begin, cols] {
    Node* A = self->inputs[0].get();
    if (!A->requires_grad) return;
    A->ensure_grad();
    for (std::size_t i = 0; i < self->grad.size(); ++i)
      A->grad[static_cast<std::size_t>(begin) * cols + i] += self->grad[i];
  };
  return Tensor::wrap(std::move(node));
}

Tensor slice_cols(const Tensor& a, int begin, int end) {
  check_rank2(a, "slice_cols");
  check(0 <= begin && begin < end && end <= a.dim(1), TensorError::Code::kShapeMismatch,
        "slice_cols: bad range");
  const int rows = a.dim(0), cols = a.dim(1), width = end - begin;
  auto node = make_node({rows, width}, {a.node()});
  for (int r = 0; r < rows; ++r)
    std::copy_n(a.values().data() + static_cast<std::size_t>(r) * cols + begin, width,
                node->value.data() + static_cast<std::size_t>(r) * width);
  Node* self = node.get();
  node->backprop = [self, rows, cols, begin, width] {
    Node* A = self->inputs[0].get();
    if (!A->requires_grad) return;
    A->ensure_grad();
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < width; ++c)
        A->grad[static_cast<std::size_t>(r) * cols + begin + c] +=
            self->grad[static_cast<std::size_t>(r) * width + c];
  };
  return Tensor::wrap(std::move(node));
}

Tensor concat_rows(const Tensor& a, const Tensor& b) {
  check_rank2(a, "concat_rows");
  check_rank2(b, "concat_rows");
  check(a.dim(1) == b.dim(1), TensorError::Code::kShapeMismatch, "concat_rows: columns differ");
  const int cols = a.dim(1);
  auto node = make_node({a.dim(0) + b.dim(0), cols}, {a.node(), b.node()});
  std::copy(a.values().begin(), a.values().end(), node->value.begin());
  std::copy(b.values().begin(), b.values().end(),
            node->value.begin() + static_cast<std::ptrdiff_t>(a.values().size()));
  Node* self = node.get();
  const std::size_t split = a.values().size();
  node->backprop = [self, split] {
    Node* A = self->inputs[0].get();
    Node* B = self->inputs[1].get();
    if (A->requires_grad) {
      A->ensure_grad();
      for (std::size_t i = 0; i < split; ++i) A->grad[i] += self->grad[i];
    }
    if (B->requires_grad) {
      B->ensure_grad();
      for (std::size_t i = split; i < self->grad.size(); ++i)
        B->grad[i - split] += self->grad[i];
    }
  };
  return Tensor::wrap(std::move(node));
}

Tensor concat_cols(const Tensor& a, const Tensor& b) {
  check_rank2(a, "concat_cols");
  check_rank2(b, "concat_cols");
  check(a.dim(0) == b.dim(0), TensorError::Code::kShapeMismatch, "concat_cols: rows differ");
  const int rows = a.dim(0), ca = a.dim(1), cb = b.dim(1);
  auto node = make_node({rows, ca + cb}, {a.node(), b.node()});
  for (int r = 0; r < rows; ++r) {
    std::copy_n(a.values().data() + static_cast<std::size_t>(r) * ca, ca,
                node->value.data() + static_cast<std::size_t>(r) * (ca + cb));
    std::copy_n(b.values().data() + static_cast<std::size_t>(r) * cb, cb,
                node->value.data() + static_cast<std::size_t>(r) * (ca + cb) + ca);
  }
  Node* self = node.get();
  node->backprop = [self, rows, ca, cb] {
    Node* A = self->inputs[0].get();
    Node* B = self->inputs[1].get();
    if (A->requires_grad) {
      A->ensure_grad();
      for (int r = 0; r < rows; ++r)
        for (int c = 0; c < ca; ++c)
          A->grad[static_cast<std::size_t>(r) * ca + c] +=
              self->grad[static_cast<std::size_t>(r) * (ca + cb) + c];
    }
    if (B->requires_grad) {
      B->ensure_grad();
      for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cb; ++c)
          B->grad[static_cast<std::size_t>(r) * cb + c] +=
              self->grad[static_cast<std::size_t>(r) * (ca + cb) + ca + c];
    }
  };
  return Tensor::wrap(std::move(node));
}

Tensor select_rows(const Tensor& a, std::vector<int> indices) {
  check_rank2(a, "select_rows");
  const int cols = a.dim(1);
  for (int idx : indices) {
    check(0 <= idx && idx < a.dim(0), TensorError::Code::kShapeMismatch,
          "select_rows: index out of range");
  }
  auto node = make_node({static_cast<int>(indices.size()), cols}, {a.node()});
  for (std::size_t r = 0; r < indices.size(); ++r)
    std::copy_n(a.values().data() + static_cast<std::size_t>(indices[r]) * cols, cols,
                node->value.data() + r * cols);
  Node* self = node.get();
  node->backprop = [self, cols, indices = std::move(indices)] {
    Node* A = self->inputs[0].get();
    if (!A->requires_grad) return;
    A->ensure_grad();
    for (std::size_t r = 0; r < indices.size(); ++r)
      for (int c = 0; c < cols; ++c)
        A->grad[static_cast<std::size_t>(indices[r]) * cols + c] += self->grad[r * cols + c];
  };
  return Tensor::wrap(std::move(node));
}

Tensor sum(const Tensor& a) {
  auto node = make_node({1}, {a.node()});
  double acc = 0.0;
  for (double v : a.values()) acc += v;
  node->value[0] = acc;
  Node* self = node.get();
  node->backprop = [self] {
    Node* A = self->inputs[0].get();
    if (!A->requires_grad) return;
    A->ensure_grad();
    const double g = self->grad[0];
    for (double& d : A->grad) d += g;
  };
  return Tensor::wrap(std::move(node));
}

Tensor mean(const Tensor& a) {
  const double n = static_cast<double>(a.size());
  auto node = make_node({1}, {a.node()});
  double acc = 0.0;
  for (double v : a.values()) acc += v;
  node->value[0] = acc / n;
  Node* self = node.get();
  node->backprop = [self, n] {
    Node* A = self->inputs[0].get();
    if (!A->requires_grad) return;
    A->ensure_grad();
    const double g = self->grad[0] / n;
    for (double& d : A->grad) d += g;
  };
  return Tensor::wrap(std::move(node));
}

Tensor nll_gather_mean(const Tensor& logp, std::vector<int> targets) {
  check_rank2(logp, "nll_gather_mean");
  check(static_cast<int>(targets.size()) == logp.dim(0), TensorError::Code::kShapeMismatch,
        "nll_gather_mean: one target per row required");
  const int cols = logp.dim(1);
  for (int t : targets) {
    check(0 <= t && t < cols, TensorError::Code::kShapeMismatch,
          "nll_gather_mean: target out of range");
  }
  auto node = make_node({1}, {logp.node()});
  double acc = 0.0;
  for (std::size_t r = 0; r < targets.size(); ++r)
    acc -= logp.values()[r * cols + static_cast<std::size_t>(targets[r])];
  node->value[0] = acc / static_cast<double>(targets.size());
  Node* self = node.get();
  node->backprop = [self, cols, targets = std::move(targets)] {
    Node* A = self->inputs[0].get();
    if (!A->requires_grad) return;
    A->ensure_grad();
    const double g = self->grad[0] / static_cast<double>(targets.size());
    for (std::size_t r = 0; r < targets.size(); ++r)
      A->grad[r * static_cast<std::size_t>(cols) + static_cast<std::size_t>(targets[r])] -= g;
  };
  return Tensor::wrap(std::move(node));
}

Tensor scalar_with_input_grad(const Tensor& input, double value,
                              std::vector<double> input_grad) {
  check(static_cast<std::int64_t>(input_grad.size()) == input.size(),
        TensorError::Code::kShapeMismatch, "scalar_with_input_grad: grad size mismatch");
  auto node = make_node({1}, {input.node()});
  node->value[0] = value;
  Node* self = node.get();
  node->backprop = [self, input_grad = std::move(input_grad)] {
    Node* A = self->inputs[0].get();
    if (!A->requires_grad) return;
    A->ensure_grad();
    const double g = self->grad[0];
    for (std::size_t i = 0; i < input_grad.size(); ++i) A->grad[i] += g * input_grad[i];
  };
  return Tensor::wrap(std::move(node));
}

void backward(const Tensor& loss) {
  check(loss.defined(), TensorError::Code::kNonScalarLoss, "backward: undefined tensor");
  check(loss.size() == 1, TensorError::Code::kNonScalarLoss, "backward: loss must be scalar");

  // Iterative DFS topological sort. enum: 0 unseen, 1 on stack, 2 done.
  std::vector<Node*> order;
  std::unordered_map<Node*, int> state;
  std::vector<std::pair<Node*, std::size_t>> stack;
  stack.emplace_back(loss.node().get(), 0);
  state[loss.node().get()] = 1;
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->inputs.size()) {
      Node* child = node->inputs[next++].get();
      auto it = state.find(child);
      if (it == state.end()) {
        state[child] = 1;
        stack.emplace_back(child, 0);
      } else if (it->second == 1) {
        throw TensorError(TensorError::Code::kGraphCycle, "backward: graph cycle detected");
      }
    } else {
      state[node] = 2;
      order.push_back(node);
      stack.pop_back();
    }
  }

  loss.node()->ensure_grad();
  loss.node()->grad[0] = 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* node = *it;
    if (!node->requires_grad || !node->backprop) continue;
    node->ensure_grad();
    node->backprop();
  }
}

bool all_finite(const Tensor& t) {
  for (double v : t.values()) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace aphasia::autodiff
