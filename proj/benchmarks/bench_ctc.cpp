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

#include <benchmark/benchmark.h>

#include "aphasia/ctc.hpp"
#include "aphasia/rng.hpp"

namespace {

using namespace aphasia;

ctc::LogProbLattice make_lattice(int frames, int vocab, std::uint64_t seed) {
  Rng rng(seed);
  ctc::LogProbLattice lat;
  lat.frames = frames;
  lat.vocab = vocab;
  lat.logp.resize(static_cast<std::size_t>(frames) * vocab);
  for (int t = 0; t < frames; ++t) {
    double mx = -1e300;
    for (int v = 0; v < vocab; ++v) {
      lat.at(t, v) = 2.0 * rng.normal();
      mx = std::max(mx, lat.at(t, v));
    }
    double z = 0.0;
    for (int v = 0; v < vocab; ++v) z += std::exp(lat.at(t, v) - mx);
    const double lse = mx + std::log(z);
    for (int v = 0; v < vocab; ++v) lat.at(t, v) -= lse;
  }
  return lat;
}

std::vector<int> make_target(int len, int vocab, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<int> target(static_cast<std::size_t>(len));
  for (int& t : target) t = 1 + static_cast<int>(rng.uniform_int(vocab - 1));
  return target;
}

void BM_ctc_loss(benchmark::State& state) {
  const int frames = static_cast<int>(state.range(0));
  const int vocab = 32;
  const auto lat = make_lattice(frames, vocab, 1);
  const auto target = make_target(frames / 4, vocab, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ctc::ctc_loss(lat, target));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_ctc_loss)->Arg(16)->Arg(64)->Arg(256);

void BM_ctc_greedy(benchmark::State& state) {
  const auto lat = make_lattice(static_cast<int>(state.range(0)), 32, 3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ctc::ctc_greedy(lat));
  }
}
BENCHMARK(BM_ctc_greedy)->Arg(64)->Arg(256);

void BM_prefix_extend(benchmark::State& state) {
  const int frames = static_cast<int>(state.range(0));
  const auto lat = make_lattice(frames, 32, 4);
  const auto base = ctc::PrefixState::initial(lat);
  int token = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(base.extend(token));
    token = 1 + (token % 31);
  }
}
BENCHMARK(BM_prefix_extend)->Arg(16)->Arg(64)->Arg(256);

}  // namespace

BENCHMARK_MAIN();
