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

#include "aphasia/ctc.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace aphasia::ctc {

double log_add(double a, double b) {
  if (a < b) std::swap(a, b);
  if (b <= kLogZero * 0.5) return a;  // adding probability zero
  return a + std::log1p(std::exp(b - a));
}

LogProbLattice LogProbLattice::uniform(int frames, int vocab) {
  LogProbLattice lat;
  lat.frames = frames;
  lat.vocab = vocab;
  lat.logp.assign(static_cast<std::size_t>(frames) * vocab,
                  -std::log(static_cast<double>(vocab)));
  return lat;
}

bool LogProbLattice::is_normalized(double tol) const {
  for (int t = 0; t < frames; ++t) {
    double lse = kLogZero;
    for (int v = 0; v < vocab; ++v) {
      if (at(t, v) > tol) return false;
      lse = log_add(lse, at(t, v));
    }
    if (std::abs(lse) > tol) return false;
  }
  return true;
}

namespace {

void validate_target(const LogProbLattice& lattice, std::span<const int> target) {
  for (int tok : target) {
    if (tok <= 0 || tok >= lattice.vocab) {
      throw std::invalid_argument("ctc: target token " + std::to_string(tok) +
                                  " outside [1, V-1]");
    }
  }
}

int min_frames_needed(std::span<const int> target) {
  int repeats = 0;
  for (std::size_t i = 1; i < target.size(); ++i) {
    if (target[i] == target[i - 1]) ++repeats;
  }
  return static_cast<int>(target.size()) + repeats;
}

}  // namespace

CtcResult ctc_loss(const LogProbLattice& lattice, std::span<const int> target) {
  validate_target(lattice, target);
  const int T = lattice.frames;
  const int V = lattice.vocab;
  CtcResult result;
  result.grad_logp.assign(static_cast<std::size_t>(T) * V, 0.0);
  if (T < 1 || T < min_frames_needed(target)) return result;  // infeasible, flagged

  // Blank-interleaved state sequence: S = 2K+1, even states are blanks.
  const int K = static_cast<int>(target.size());
  const int S = 2 * K + 1;
  auto label = [&](int s) { return (s % 2 == 0) ? kBlankId : target[static_cast<std::size_t>(s / 2)]; };

  std::vector<double> alpha(static_cast<std::size_t>(T) * S, kLogZero);
  std::vector<double> beta(static_cast<std::size_t>(T) * S, kLogZero);
  auto a = [&](int t, int s) -> double& { return alpha[static_cast<std::size_t>(t) * S + s]; };
  auto b = [&](int t, int s) -> double& { return beta[static_cast<std::size_t>(t) * S + s]; };

  a(0, 0) = lattice.at(0, kBlankId);
  if (S > 1) a(0, 1) = lattice.at(0, label(1));
  for (int t = 1; t < T; ++t) {
    for (int s = 0; s < S; ++s) {
      double acc = a(t - 1, s);
      if (s >= 1) acc = log_add(acc, a(t - 1, s - 1));
      if (s >= 2 && label(s) != kBlankId && label(s) != label(s - 2)) {
        acc = log_add(acc, a(t - 1, s - 2));
      }
      a(t, s) = acc + lattice.at(t, label(s));
    }
  }

  double log_p = a(T - 1, S - 1);
  if (S > 1) log_p = log_add(log_p, a(T - 1, S - 2));
  if (log_p <= kLogZero * 0.5) return result;  // numerically unreachable target

  b(T - 1, S - 1) = 0.0;
  if (S > 1) b(T - 1, S - 2) = 0.0;
  for (int t = T - 2; t >= 0; --t) {
    for (int s = 0; s < S; ++s) {
      double acc = b(t + 1, s) + lattice.at(t + 1, label(s));
      if (s + 1 < S) acc = log_add(acc, b(t + 1, s + 1) + lattice.at(t + 1, label(s + 1)));
      if (s + 2 < S && label(s + 2) != kBlankId && label(s + 2) != label(s)) {
        acc = log_add(acc, b(t + 1, s + 2) + lattice.at(t + 1, label(s + 2)));
      }
      b(t, s) = acc;
    }
  }

  // d(-log P)/d logp[t][v] = -exp(logsum_{s: label(s)=v} (alpha+beta) - log P).
  std::vector<double> occ(static_cast<std::size_t>(V));
  for (int t = 0; t < T; ++t) {
    std::fill(occ.begin(), occ.end(), kLogZero);
    for (int s = 0; s < S; ++s) {
      const int v = label(s);
      occ[static_cast<std::size_t>(v)] = log_add(occ[static_cast<std::size_t>(v)], a(t, s) + b(t, s));
    }
    for (int v = 0; v < V; ++v) {
      if (occ[static_cast<std::size_t>(v)] > kLogZero * 0.5) {
        result.grad_logp[static_cast<std::size_t>(t) * V + v] =
            -std::exp(occ[static_cast<std::size_t>(v)] - log_p);
      }
    }
  }

  result.neg_log_likelihood = -log_p;
  result.feasible = true;
  return result;
}

std::vector<int> ctc_greedy(const LogProbLattice& lattice) {
  std::vector<int> out;
  int prev = -1;
  for (int t = 0; t < lattice.frames; ++t) {
    int best = 0;
    for (int v = 1; v < lattice.vocab; ++v) {
      if (lattice.at(t, v) > lattice.at(t, best)) best = v;  // ties keep lowest index
    }
    if (best != prev && best != kBlankId) out.push_back(best);
    prev = best;
  }
  return out;
}

PrefixState PrefixState::initial(const LogProbLattice& lattice) {
  PrefixState st;
  st.lattice_ = &lattice;
  const int T = lattice.frames;
  st.r_n_.assign(static_cast<std::size_t>(T) + 1, kLogZero);
  st.r_b_.assign(static_cast<std::size_t>(T) + 1, kLogZero);
  st.r_b_[0] = 0.0;
  for (int t = 1; t <= T; ++t) {
    st.r_b_[static_cast<std::size_t>(t)] =
        st.r_b_[static_cast<std::size_t>(t) - 1] + lattice.at(t - 1, kBlankId);
  }
  st.psi_ = 0.0;  // every output starts with the empty prefix
  return st;
}

PrefixState PrefixState::extend(int token) const {
  const LogProbLattice& lat = *lattice_;
  const int T = lat.frames;
  PrefixState st;
  st.lattice_ = lattice_;
  st.last_ = token;
  st.length_ = length_ + 1;
  st.r_n_.assign(static_cast<std::size_t>(T) + 1, kLogZero);
  st.r_b_.assign(static_cast<std::size_t>(T) + 1, kLogZero);

  double psi = kLogZero;
  for (int t = 1; t <= T; ++t) {
    // phi[t-1]: mass of the parent prefix ending by frame t-1 such that
    // emitting `token` at frame t starts a new symbol.
    double phi = r_b_[static_cast<std::size_t>(t) - 1];
    if (last_ != token) phi = log_add(phi, r_n_[static_cast<std::size_t>(t) - 1]);
    const double p_tok = lat.at(t - 1, token);
    st.r_n_[static_cast<std::size_t>(t)] =
        log_add(st.r_n_[static_cast<std::size_t>(t) - 1], phi) + p_tok;
    st.r_b_[static_cast<std::size_t>(t)] =
        log_add(st.r_b_[static_cast<std::size_t>(t) - 1], st.r_n_[static_cast<std::size_t>(t) - 1]) +
        lat.at(t - 1, kBlankId);
    psi = log_add(psi, phi + p_tok);
  }
  st.psi_ = psi;
  return st;
}

double PrefixState::log_complete() const {
  if (length_ == 0) {
    // complete-empty mass = all-blank path
    return r_b_.back();
  }
  return log_add(r_n_.back(), r_b_.back());
}

PrefixScore ctc_prefix_score(const LogProbLattice& lattice, std::span<const int> prefix) {
  validate_target(lattice, prefix);
  PrefixState st = PrefixState::initial(lattice);
  for (int tok : prefix) st = st.extend(tok);
  PrefixScore score;
  score.log_prefix_mass = st.log_prefix_mass();
  score.log_complete = st.log_complete();
  score.next_prefix_mass.assign(static_cast<std::size_t>(lattice.vocab), kLogZero);
  for (int v = 1; v < lattice.vocab; ++v) {
    score.next_prefix_mass[static_cast<std::size_t>(v)] = st.extend(v).log_prefix_mass();
  }
  return score;
}

double interctc_loss_total(std::span<const double> losses) {
  if (losses.empty()) {
    throw std::invalid_argument("interctc_loss_total: empty loss list");
  }
  double acc = 0.0;
  for (double l : losses) acc += l;
  return acc / static_cast<double>(losses.size());
}

autodiff::Tensor ctc_loss_op(const autodiff::Tensor& logp, std::span<const int> target,
                             bool* feasible) {
  if (logp.rank() != 2) {
    throw autodiff::TensorError(autodiff::TensorError::Code::kShapeMismatch,
                                "ctc_loss_op: lattice tensor must be rank 2");
  }
  LogProbLattice lat;
  lat.frames = logp.dim(0);
  lat.vocab = logp.dim(1);
  lat.logp.assign(logp.values().begin(), logp.values().end());
  CtcResult res = ctc_loss(lat, target);
  if (feasible != nullptr) *feasible = res.feasible;
  return autodiff::scalar_with_input_grad(logp, res.neg_log_likelihood,
                                          std::move(res.grad_logp));
}

autodiff::Tensor interctc_condition(const autodiff::Tensor& h, const autodiff::Tensor& logp,
                                    const autodiff::Tensor& norm_gain,
                                    const autodiff::Tensor& norm_bias,
                                    const autodiff::Tensor& proj_w,
                                    const autodiff::Tensor& proj_b) {
  using namespace autodiff;
  if (h.rank() != 2 || logp.rank() != 2 || h.dim(0) != logp.dim(0)) {
    throw TensorError(TensorError::Code::kShapeMismatch,
                      "interctc_condition: h and lattice must share the frame axis");
  }
  if (proj_w.dim(0) != logp.dim(1) || proj_w.dim(1) != h.dim(1)) {
    throw TensorError(TensorError::Code::kShapeMismatch,
                      "interctc_condition: projection must map V to H");
  }
  Tensor posteriors = exp(logp);  // exp(log softmax) = per-frame posterior
  Tensor projected = add_rowwise(matmul(posteriors, proj_w), proj_b);
  return add(layer_norm_rows(h, norm_gain, norm_bias), projected);
}

}  // namespace aphasia::ctc
