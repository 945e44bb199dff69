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

#include <limits>
#include <span>
#include <vector>

#include "aphasia/tensor.hpp"

namespace aphasia::ctc {

inline constexpr int kBlankId = 0;
// Log-domain zero; anything at or below this is treated as probability 0.
inline constexpr double kLogZero = -1e30;

double log_add(double a, double b);

// T×V matrix of per-frame log probabilities; blank lives at index 0.
struct LogProbLattice {
  int frames = 0;  // T
  int vocab = 0;   // V (blank included)
  std::vector<double> logp;  // row-major T×V

  static LogProbLattice uniform(int frames, int vocab);
  double at(int t, int v) const { return logp[static_cast<std::size_t>(t) * vocab + v]; }
  double& at(int t, int v) { return logp[static_cast<std::size_t>(t) * vocab + v]; }
  // Rows logsumexp to 0 within tol and entries stay <= tol.
  bool is_normalized(double tol = 1e-6) const;
};

struct CtcResult {
  double neg_log_likelihood = std::numeric_limits<double>::infinity();
  bool feasible = false;
  std::vector<double> grad_logp;  // T×V; zeros when infeasible
};

// Forward-backward over the blank-interleaved state sequence, log domain.
// Returns -log P(target | lattice) and its exact gradient with respect to
// the lattice entries (taken as free variables). An infeasible target
// (T < |target| + adjacent-repeat count) comes back flagged with infinite
// loss and zero gradient rather than as an exception.
CtcResult ctc_loss(const LogProbLattice& lattice, std::span<const int> target);

// Per-frame argmax (ties to the lowest index), collapse adjacent repeats,
// drop blanks.
std::vector<int> ctc_greedy(const LogProbLattice& lattice);

// Incremental CTC prefix scoring for beam search. State for prefix g holds
// r_n[t] / r_b[t] (log mass of g with the alignment ending at frame t in the
// last symbol / in blank) and the prefix mass psi = log P(output starts
// with g). Extension by one token costs O(T).
class PrefixState {
 public:
  static PrefixState initial(const LogProbLattice& lattice);
  PrefixState extend(int token) const;

  double log_prefix_mass() const { return psi_; }
  // log P(output == prefix): r_n[T] + r_b[T].
  double log_complete() const;
  int last_token() const { return last_; }
  int length() const { return length_; }

 private:
  const LogProbLattice* lattice_ = nullptr;
  std::vector<double> r_n_, r_b_;  // index t = after frames 1..t
  double psi_ = 0.0;
  int last_ = -1;
  int length_ = 0;
};

struct PrefixScore {
  double log_prefix_mass = 0.0;            // log P(output starts with prefix)
  double log_complete = kLogZero;          // log P(output == prefix)
  std::vector<double> next_prefix_mass;    // per token id; blank entry stays log-zero
};

// One-shot scoring of a whole prefix plus all one-token continuations.
PrefixScore ctc_prefix_score(const LogProbLattice& lattice, std::span<const int> prefix);

// Mean of per-layer InterCTC losses. Throws on an empty list.
double interctc_loss_total(std::span<const double> losses);

// --- autodiff bridges -------------------------------------------------------

// Graph node for ctc_loss: forward runs the lattice recursion on the tensor
// values, backward feeds the analytic gradient into `logp`. `feasible`
// (optional) reports the infeasible-target flag.
autodiff::Tensor ctc_loss_op(const autodiff::Tensor& logp, std::span<const int> target,
                             bool* feasible = nullptr);

// Conditioning input for the encoder block after an intermediate tap:
// LayerNorm(h) + softmax(posteriors from logp) * proj_w + proj_b.
// Shapes: h [L,H], logp [L,V], proj_w [V,H], proj_b [H].
autodiff::Tensor interctc_condition(const autodiff::Tensor& h, const autodiff::Tensor& logp,
                                    const autodiff::Tensor& norm_gain,
                                    const autodiff::Tensor& norm_bias,
                                    const autodiff::Tensor& proj_w,
                                    const autodiff::Tensor& proj_b);

}  // namespace aphasia::ctc
