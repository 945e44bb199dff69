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

#include "aphasia/model.hpp"
#include "aphasia/rng.hpp"
#include "aphasia/tensor.hpp"

namespace {

using namespace aphasia;

model::ModelConfig bench_config() {
  model::ModelConfig cfg;
  cfg.feature_dim = 16;
  cfg.num_layers = 4;
  cfg.hidden_dim = 64;
  cfg.num_heads = 2;
  cfg.mlp_dim = 128;
  cfg.decoder_layers = 2;
  cfg.subsample = 2;
  cfg.interctc_layers = {2};
  cfg.interctc_targets = {model::InterTarget::kTagPrefixedTokens};
  cfg.tag_mode = model::TagMode::kBoth;
  return cfg;
}

corpus::FeatureMatrix bench_features(int rows) {
  Rng rng(7);
  corpus::FeatureMatrix f = corpus::FeatureMatrix::zeros(rows, 16);
  for (float& x : f.data) x = static_cast<float>(rng.normal());
  return f;
}

void BM_encode(benchmark::State& state) {
  model::Model m(bench_config(), 25);
  const auto feats = bench_features(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(m.encode(feats));
  }
}
BENCHMARK(BM_encode)->Arg(32)->Arg(64);

void BM_decode_step(benchmark::State& state) {
  model::Model m(bench_config(), 25);
  const auto feats = bench_features(32);
  const auto enc = m.encode(feats);
  const std::vector<int> prefix{3, 7, 9, 12};
  for (auto _ : state) {
    benchmark::DoNotOptimize(m.decode_step(enc.hidden, prefix));
  }
}
BENCHMARK(BM_decode_step);

void BM_train_step(benchmark::State& state) {
  model::Model m(bench_config(), 25);
  std::vector<model::TrainItem> batch(4);
  Rng rng(9);
  for (auto& item : batch) {
    item.features = bench_features(32);
    item.tokens = {5, 7, 9, 11, 13};
    item.aphasia = rng.uniform() < 0.5;
  }
  autodiff::AdamState adam(m.params(), {});
  for (auto _ : state) {
    m.params().zero_grad();
    auto out = m.compute_loss(batch);
    autodiff::backward(out.loss);
    adam.step(m.params(), 1e-3);
  }
}
BENCHMARK(BM_train_step);

}  // namespace

BENCHMARK_MAIN();
