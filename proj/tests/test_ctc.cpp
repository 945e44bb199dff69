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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "aphasia/ctc.hpp"
#include "aphasia/rng.hpp"
#include "testutil.hpp"

using namespace aphasia;
using ctc::LogProbLattice;

TEST_CASE("ctc_loss: certain single emission has zero loss") {
  LogProbLattice lat;
  lat.frames = 1;
  lat.vocab = 2;
  lat.logp = {ctc::kLogZero, 0.0};  // P(a)=1 at the only frame
  const int target[] = {1};
  auto res = ctc::ctc_loss(lat, target);
  CHECK(res.feasible);
  CHECK(res.neg_log_likelihood == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("ctc_loss: two uniform frames, single token") {
  // paths for "a": {aa, a-, -a} of 4 equally likely -> P = 0.75
  LogProbLattice lat = LogProbLattice::uniform(2, 2);
  const int target[] = {1};
  auto res = ctc::ctc_loss(lat, target);
  CHECK(res.feasible);
  CHECK(res.neg_log_likelihood == doctest::Approx(-std::log(0.75)).epsilon(1e-12));
  CHECK(res.neg_log_likelihood == doctest::Approx(0.2876820724).epsilon(1e-9));
}

TEST_CASE("ctc_loss: infeasible target is flagged, not thrown") {
  LogProbLattice lat = LogProbLattice::uniform(2, 3);
  SUBCASE("too long") {
    const int target[] = {1, 2, 1};
    auto res = ctc::ctc_loss(lat, target);
    CHECK_FALSE(res.feasible);
    CHECK(std::isinf(res.neg_log_likelihood));
    for (double g : res.grad_logp) CHECK(g == 0.0);
  }
  SUBCASE("adjacent repeat needs a separating blank") {
    const int target[] = {1, 1};
    auto res = ctc::ctc_loss(lat, target);
    CHECK_FALSE(res.feasible);
  }
  SUBCASE("three frames make the repeat feasible") {
    LogProbLattice lat3 = LogProbLattice::uniform(3, 3);
    const int target[] = {1, 1};
    CHECK(ctc::ctc_loss(lat3, target).feasible);
  }
}

TEST_CASE("ctc_loss: rejects out-of-range target tokens") {
  LogProbLattice lat = LogProbLattice::uniform(3, 3);
  const int bad_blank[] = {0};
  CHECK_THROWS_AS((void)ctc::ctc_loss(lat, bad_blank), std::invalid_argument);
  const int bad_high[] = {3};
  CHECK_THROWS_AS((void)ctc::ctc_loss(lat, bad_high), std::invalid_argument);
}

TEST_CASE("ctc_loss: matches path enumeration and finite differences") {
  Rng rng(20260808);
  int checked = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const int T = 1 + static_cast<int>(rng.uniform_int(6));
    const int V = 2 + static_cast<int>(rng.uniform_int(3));
    const int K = static_cast<int>(rng.uniform_int(4));
    std::vector<int> target(static_cast<std::size_t>(K));
    for (int& tok : target) tok = 1 + static_cast<int>(rng.uniform_int(V - 1));
    LogProbLattice lat = testutil::random_lattice(rng, T, V);

    auto res = ctc::ctc_loss(lat, target);
    const double brute = testutil::brute_force_ctc_prob(lat, target);
    if (!res.feasible) {
      CHECK(brute == doctest::Approx(0.0).epsilon(1e-12));
      continue;
    }
    ++checked;
    CHECK(res.neg_log_likelihood == doctest::Approx(-std::log(brute)).epsilon(1e-9));
    auto fd = testutil::fd_ctc_grad(lat, target);
    CHECK(testutil::max_allclose_violation(res.grad_logp, fd, 1e-5, 1e-9) <= 1.0);
  }
  CHECK(checked > 20);  // the sweep must actually exercise feasible cases
}

TEST_CASE("ctc: appending a token never gains prefix mass or feasibility") {
  // The prefix mass P(output starts with g) can only shrink as g grows, and
  // an infeasible target stays infeasible under extension. The complete
  // probability P(output == g) is deliberately not monotone (a certain
  // one-token emission beats the empty output).
  Rng rng(7);
  for (int trial = 0; trial < 30; ++trial) {
    const int T = 3 + static_cast<int>(rng.uniform_int(4));
    const int V = 3 + static_cast<int>(rng.uniform_int(2));
    LogProbLattice lat = testutil::random_lattice(rng, T, V);
    std::vector<int> target;
    double prev_mass = 0.0;  // log 1
    bool was_feasible = true;
    for (int k = 0; k < 5; ++k) {
      target.push_back(1 + static_cast<int>(rng.uniform_int(V - 1)));
      auto score = ctc::ctc_prefix_score(lat, target);
      CHECK(score.log_prefix_mass <= prev_mass + 1e-9);
      prev_mass = score.log_prefix_mass;
      const bool feasible = ctc::ctc_loss(lat, target).feasible;
      if (!was_feasible) CHECK_FALSE(feasible);
      was_feasible = feasible;
    }
  }
}

TEST_CASE("ctc_greedy: collapse rules") {
  auto one_hot = [](std::span<const int> frames, int vocab) {
    LogProbLattice lat;
    lat.frames = static_cast<int>(frames.size());
    lat.vocab = vocab;
    lat.logp.assign(lat.frames * static_cast<std::size_t>(vocab), -20.0);
    for (int t = 0; t < lat.frames; ++t) lat.at(t, frames[static_cast<std::size_t>(t)]) = 0.0;
    return lat;
  };
  SUBCASE("adjacent repeats merge, blanks separate") {
    const int frames[] = {0, 1, 1, 0, 1};
    CHECK(ctc::ctc_greedy(one_hot(frames, 2)) == std::vector<int>{1, 1});
  }
  SUBCASE("all blanks decode to empty") {
    const int frames[] = {0, 0, 0};
    CHECK(ctc::ctc_greedy(one_hot(frames, 2)).empty());
  }
  SUBCASE("distinct tokens pass through") {
    const int frames[] = {1, 1, 0, 2};
    CHECK(ctc::ctc_greedy(one_hot(frames, 3)) == std::vector<int>{1, 2});
  }
  SUBCASE("ties break toward the lowest index") {
    LogProbLattice lat = LogProbLattice::uniform(1, 3);
    CHECK(ctc::ctc_greedy(lat).empty());  // blank (index 0) wins the tie
  }
}

TEST_CASE("ctc_greedy: reproduces the collapse of a one-hot alignment path") {
  Rng rng(99);
  for (int trial = 0; trial < 50; ++trial) {
    const int T = 1 + static_cast<int>(rng.uniform_int(8));
    const int V = 2 + static_cast<int>(rng.uniform_int(3));
    std::vector<int> path(static_cast<std::size_t>(T));
    for (int& v : path) v = static_cast<int>(rng.uniform_int(V));
    LogProbLattice lat;
    lat.frames = T;
    lat.vocab = V;
    lat.logp.assign(static_cast<std::size_t>(T) * V, -30.0);
    for (int t = 0; t < T; ++t) lat.at(t, path[static_cast<std::size_t>(t)]) = 0.0;
    CHECK(ctc::ctc_greedy(lat) == testutil::collapse_path(path));
  }
}

TEST_CASE("ctc_prefix_score: empty prefix carries all the mass") {
  Rng rng(3);
  LogProbLattice lat = testutil::random_lattice(rng, 4, 3);
  auto score = ctc::ctc_prefix_score(lat, {});
  CHECK(score.log_prefix_mass == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("ctc_prefix_score: two uniform frames, prefix [a]") {
  LogProbLattice lat = LogProbLattice::uniform(2, 2);
  const int prefix[] = {1};
  auto score = ctc::ctc_prefix_score(lat, prefix);
  // P(output == a) = 0.75; as a log probability that is ln 0.75 = -nll.
  CHECK(score.log_complete == doctest::Approx(std::log(0.75)).epsilon(1e-12));
  CHECK(score.log_prefix_mass == doctest::Approx(std::log(0.75)).epsilon(1e-12));
}

TEST_CASE("ctc_prefix_score: complete score equals minus ctc_loss") {
  Rng rng(41);
  for (int trial = 0; trial < 40; ++trial) {
    const int T = 2 + static_cast<int>(rng.uniform_int(4));
    const int V = 2 + static_cast<int>(rng.uniform_int(3));
    const int K = 1 + static_cast<int>(rng.uniform_int(3));
    std::vector<int> prefix(static_cast<std::size_t>(K));
    for (int& tok : prefix) tok = 1 + static_cast<int>(rng.uniform_int(V - 1));
    LogProbLattice lat = testutil::random_lattice(rng, T, V);
    auto res = ctc::ctc_loss(lat, prefix);
    if (!res.feasible) continue;
    auto score = ctc::ctc_prefix_score(lat, prefix);
    CHECK(score.log_complete == doctest::Approx(-res.neg_log_likelihood).epsilon(1e-9));
  }
}

TEST_CASE("ctc_prefix_score: complete hypotheses cover at most unit mass") {
  Rng rng(55);
  for (int trial = 0; trial < 10; ++trial) {
    const int T = 2 + static_cast<int>(rng.uniform_int(3));
    const int V = 2 + static_cast<int>(rng.uniform_int(2));
    LogProbLattice lat = testutil::random_lattice(rng, T, V);
    auto outputs = testutil::enumerate_outputs(lat);
    double total = 0.0;
    for (const auto& [tokens, prob] : outputs) {
      auto score = ctc::ctc_prefix_score(lat, tokens);
      CHECK(std::exp(score.log_complete) == doctest::Approx(prob).epsilon(1e-9));
      total += std::exp(score.log_complete);
    }
    CHECK(total <= 1.0 + 1e-9);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));  // enumeration is exhaustive
  }
}

TEST_CASE("ctc_prefix_score: next-token masses match one-step extensions") {
  Rng rng(77);
  LogProbLattice lat = testutil::random_lattice(rng, 5, 4);
  const int prefix[] = {2};
  auto score = ctc::ctc_prefix_score(lat, prefix);
  for (int v = 1; v < lat.vocab; ++v) {
    const int extended[] = {2, v};
    auto ext = ctc::ctc_prefix_score(lat, extended);
    CHECK(score.next_prefix_mass[static_cast<std::size_t>(v)] ==
          doctest::Approx(ext.log_prefix_mass).epsilon(1e-12));
  }
  CHECK(score.next_prefix_mass[0] <= ctc::kLogZero * 0.5);
}

TEST_CASE("interctc_loss_total: arithmetic mean over taps") {
  const double one[] = {0.5};
  CHECK(ctc::interctc_loss_total(one) == doctest::Approx(0.5));
  const double two[] = {1.0, 3.0};
  CHECK(ctc::interctc_loss_total(two) == doctest::Approx(2.0));
  const double swapped[] = {3.0, 1.0};
  CHECK(ctc::interctc_loss_total(two) == doctest::Approx(ctc::interctc_loss_total(swapped)));
  CHECK_THROWS_AS((void)ctc::interctc_loss_total({}), std::invalid_argument);
}

TEST_CASE("interctc_condition: zero projection reduces to the norm term") {
  using namespace autodiff;
  Rng rng(5);
  const int L = 3, H = 4, V = 5;
  std::vector<double> hv(L * H), lv(L * V);
  for (double& x : hv) x = rng.normal();
  for (double& x : lv) x = -1.5;  // arbitrary log-probs
  Tensor h = Tensor::from_values({L, H}, hv, true);
  Tensor logp = Tensor::from_values({L, V}, lv, true);
  Tensor gain = Tensor::full({H}, 1.0, true);
  Tensor bias = Tensor::zeros({H}, true);
  Tensor proj_w = Tensor::zeros({V, H}, true);
  Tensor proj_b = Tensor::zeros({H}, true);

  Tensor out = ctc::interctc_condition(h, logp, gain, bias, proj_w, proj_b);
  Tensor norm_only = layer_norm_rows(h, gain, bias);
  REQUIRE(out.shape() == h.shape());
  for (std::size_t i = 0; i < out.values().size(); ++i) {
    CHECK(out.values()[i] == doctest::Approx(norm_only.values()[i]).epsilon(1e-12));
  }
}

TEST_CASE("interctc_condition: preserves shape for random sizes") {
  Rng rng(6);
  for (int trial = 0; trial < 5; ++trial) {
    const int L = 1 + static_cast<int>(rng.uniform_int(6));
    const int H = 2 + static_cast<int>(rng.uniform_int(6));
    const int V = 2 + static_cast<int>(rng.uniform_int(5));
    std::vector<double> hv(static_cast<std::size_t>(L) * H), lv(static_cast<std::size_t>(L) * V);
    for (double& x : hv) x = rng.normal();
    for (double& x : lv) x = rng.normal();
    auto out = ctc::interctc_condition(
        autodiff::Tensor::from_values({L, H}, hv), autodiff::Tensor::from_values({L, V}, lv),
        autodiff::Tensor::full({H}, 1.0), autodiff::Tensor::zeros({H}),
        autodiff::Tensor::from_values({V, H}, std::vector<double>(static_cast<std::size_t>(V) * H, 0.1)),
        autodiff::Tensor::zeros({H}));
    CHECK(out.shape() == autodiff::Shape{L, H});
  }
}

TEST_CASE("interctc_condition: gradient through a scalar head matches finite differences") {
  using namespace autodiff;
  Rng rng(9);
  const int L = 2, H = 3, V = 4;
  std::vector<double> hv(L * H), lv(L * V), wv(V * H);
  for (double& x : hv) x = 0.5 * rng.normal();
  for (double& x : lv) x = 0.5 * rng.normal();
  for (double& x : wv) x = 0.5 * rng.normal();

  auto loss_value = [&](const std::vector<double>& h_in) {
    Tensor h = Tensor::from_values({L, H}, h_in, true);
    Tensor logp = Tensor::from_values({L, V}, lv, true);
    Tensor out = ctc::interctc_condition(h, logp, Tensor::full({H}, 1.0, true),
                                         Tensor::zeros({H}, true),
                                         Tensor::from_values({V, H}, wv, true),
                                         Tensor::zeros({H}, true));
    return sum(mul(out, out));
  };

  Tensor h = Tensor::from_values({L, H}, hv, true);
  Tensor logp = Tensor::from_values({L, V}, lv, true);
  Tensor out = ctc::interctc_condition(h, logp, Tensor::full({H}, 1.0, true),
                                       Tensor::zeros({H}, true),
                                       Tensor::from_values({V, H}, wv, true),
                                       Tensor::zeros({H}, true));
  Tensor loss = sum(mul(out, out));
  backward(loss);

  const double step = 1e-5;
  for (std::size_t i = 0; i < hv.size(); ++i) {
    std::vector<double> up = hv, down = hv;
    up[i] += step;
    down[i] -= step;
    const double fd = (loss_value(up).item() - loss_value(down).item()) / (2 * step);
    const double denom = std::max(std::abs(fd), 1e-6);
    CHECK(std::abs(h.grad()[i] - fd) / denom < 1e-4);
  }
}
