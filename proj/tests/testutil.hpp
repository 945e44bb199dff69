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

// Test-only oracles, kept independent of the library's CTC implementation:
// path enumeration sums probabilities directly, finite differences probe
// gradients numerically.

#pragma once

#include <cmath>
#include <map>
#include <span>
#include <vector>

#include "aphasia/ctc.hpp"
#include "aphasia/rng.hpp"

namespace testutil {

// Normalized random lattice: log-softmax rows of scale * N(0,1) logits.
inline aphasia::ctc::LogProbLattice random_lattice(aphasia::Rng& rng, int frames, int vocab,
                                                   double scale = 2.0) {
  aphasia::ctc::LogProbLattice lat;
  lat.frames = frames;
  lat.vocab = vocab;
  lat.logp.resize(static_cast<std::size_t>(frames) * vocab);
  for (int t = 0; t < frames; ++t) {
    double mx = -1e300;
    std::vector<double> row(static_cast<std::size_t>(vocab));
    for (int v = 0; v < vocab; ++v) {
      row[static_cast<std::size_t>(v)] = scale * rng.normal();
      mx = std::max(mx, row[static_cast<std::size_t>(v)]);
    }
    double z = 0.0;
    for (int v = 0; v < vocab; ++v) z += std::exp(row[static_cast<std::size_t>(v)] - mx);
    const double lse = mx + std::log(z);
    for (int v = 0; v < vocab; ++v) lat.at(t, v) = row[static_cast<std::size_t>(v)] - lse;
  }
  return lat;
}

// CTC collapse: merge adjacent repeats, then drop blanks.
inline std::vector<int> collapse_path(std::span<const int> path) {
  std::vector<int> out;
  int prev = -1;
  for (int v : path) {
    if (v != prev && v != aphasia::ctc::kBlankId) out.push_back(v);
    prev = v;
  }
  return out;
}

// Enumerates all V^T alignment paths; returns P(target) by direct summation.
inline double brute_force_ctc_prob(const aphasia::ctc::LogProbLattice& lat,
                                   std::span<const int> target) {
  const int T = lat.frames, V = lat.vocab;
  std::vector<int> path(static_cast<std::size_t>(T), 0);
  double total = 0.0;
  while (true) {
    std::vector<int> collapsed = collapse_path(path);
    if (collapsed.size() == target.size() &&
        std::equal(collapsed.begin(), collapsed.end(), target.begin())) {
      double lp = 0.0;
      for (int t = 0; t < T; ++t) lp += lat.at(t, path[static_cast<std::size_t>(t)]);
      total += std::exp(lp);
    }
    int pos = T - 1;
    while (pos >= 0 && path[static_cast<std::size_t>(pos)] == V - 1) {
      path[static_cast<std::size_t>(pos)] = 0;
      --pos;
    }
    if (pos < 0) break;
    ++path[static_cast<std::size_t>(pos)];
  }
  return total;
}

// All complete outputs with their probabilities, by path enumeration.
inline std::map<std::vector<int>, double> enumerate_outputs(
    const aphasia::ctc::LogProbLattice& lat) {
  const int T = lat.frames, V = lat.vocab;
  std::map<std::vector<int>, double> out;
  std::vector<int> path(static_cast<std::size_t>(T), 0);
  while (true) {
    double lp = 0.0;
    for (int t = 0; t < T; ++t) lp += lat.at(t, path[static_cast<std::size_t>(t)]);
    out[collapse_path(path)] += std::exp(lp);
    int pos = T - 1;
    while (pos >= 0 && path[static_cast<std::size_t>(pos)] == V - 1) {
      path[static_cast<std::size_t>(pos)] = 0;
      --pos;
    }
    if (pos < 0) break;
    ++path[static_cast<std::size_t>(pos)];
  }
  return out;
}

// Central finite differences of ctc_loss with respect to lattice entries.
inline std::vector<double> fd_ctc_grad(const aphasia::ctc::LogProbLattice& lat,
                                       std::span<const int> target, double h = 1e-5) {
  std::vector<double> grad(lat.logp.size());
  aphasia::ctc::LogProbLattice work = lat;
  for (std::size_t i = 0; i < lat.logp.size(); ++i) {
    work.logp[i] = lat.logp[i] + h;
    const double up = aphasia::ctc::ctc_loss(work, target).neg_log_likelihood;
    work.logp[i] = lat.logp[i] - h;
    const double down = aphasia::ctc::ctc_loss(work, target).neg_log_likelihood;
    work.logp[i] = lat.logp[i];
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

inline double max_rel_err(std::span<const double> got, std::span<const double> want,
                          double denom_floor = 1e-8) {
  double worst = 0.0;
  for (std::size_t i = 0; i < got.size(); ++i) {
    const double denom = std::max(std::abs(want[i]), denom_floor);
    worst = std::max(worst, std::abs(got[i] - want[i]) / denom);
  }
  return worst;
}

// Worst violation of |got - want| <= atol + rtol*|want|, reported as a
// multiple of the allowance (<= 1 passes). The absolute floor keeps the
// comparison well-posed where `want` is FD noise around zero.
inline double max_allclose_violation(std::span<const double> got, std::span<const double> want,
                                     double rtol, double atol) {
  double worst = 0.0;
  for (std::size_t i = 0; i < got.size(); ++i) {
    const double allowance = atol + rtol * std::abs(want[i]);
    worst = std::max(worst, std::abs(got[i] - want[i]) / allowance);
  }
  return worst;
}

}  // namespace testutil
