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

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "aphasia/checkpoint.hpp"
#include "aphasia/corpus.hpp"
#include "aphasia/synthetic.hpp"
#include "aphasia/train.hpp"

using namespace aphasia;
namespace fs = std::filesystem;

namespace {

struct SplitDatasets {
  eval::LoadedDataset train;
  eval::LoadedDataset valid;
  model::Vocabulary vocab = model::Vocabulary::build(std::vector<std::string>{});
};

SplitDatasets make_datasets(const corpus::SyntheticSpec& spec) {
  auto data = corpus::generate_synthetic(spec);
  corpus::SplitSpec ss;
  ss.seed = 1;
  auto split = corpus::stratified_split(data.records, ss);
  std::map<std::string, std::size_t> by_id;
  for (std::size_t i = 0; i < data.records.size(); ++i) by_id[data.records[i].utt_id] = i;
  auto dataset = [&](const corpus::Manifest& m) {
    eval::LoadedDataset d;
    d.records = m;
    for (const auto& r : m) d.features.push_back(data.features[by_id.at(r.utt_id)]);
    return d;
  };
  SplitDatasets out;
  out.train = dataset(split.train);
  out.valid = dataset(split.valid);
  std::vector<std::string> words;
  for (const auto& r : out.train.records) {
    words.insert(words.end(), r.tokens.begin(), r.tokens.end());
  }
  out.vocab = model::Vocabulary::build(words);
  return out;
}

corpus::SyntheticSpec tiny_spec() {
  corpus::SyntheticSpec spec;
  spec.speakers_per_class = 3;
  spec.utterances_per_speaker = 4;
  spec.vocab_size = 6;
  spec.feature_dim = 6;
  spec.frames_per_token = 4;
  spec.min_tokens = 3;
  spec.max_tokens = 5;
  spec.noise_sigma = 0.0;
  spec.seed = 17;
  return spec;
}

model::ModelConfig tiny_model_config(int feature_dim) {
  model::ModelConfig cfg;
  cfg.feature_dim = feature_dim;
  cfg.num_layers = 2;
  cfg.hidden_dim = 16;
  cfg.num_heads = 2;
  cfg.mlp_dim = 16;
  cfg.decoder_layers = 1;
  cfg.subsample = 2;
  cfg.interctc_layers = {1};
  cfg.interctc_targets = {model::InterTarget::kTagPrefixedTokens};
  cfg.tag_mode = model::TagMode::kBoth;
  cfg.init_seed = 4;
  return cfg;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "aphasiakit_test_train" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("train: one epoch with k=1 makes that epoch the final checkpoint") {
  auto ds = make_datasets(tiny_spec());
  model::TrainConfig tc;
  tc.epochs = 1;
  tc.batch_size = 4;
  tc.base_lr = 1e-3;
  tc.warmup_steps = 10;
  tc.average_top_k = 1;
  tc.seed = 2;
  tc.speed_perturb = false;
  tc.specaugment = false;

  const auto out = fresh_dir("k1");
  model::Model m(tiny_model_config(6), ds.vocab.size());
  auto result = model::train_model(m, tc, ds.train, ds.valid, out, nullptr);
  CHECK(result.averaged_epochs == std::vector<int>{1});
  CHECK(slurp(out / "model.ckpt") == slurp(out / "epochs" / "epoch_001.ckpt"));

  auto epoch1 = autodiff::load_checkpoint(out / "epochs" / "epoch_001.ckpt");
  for (const auto& [name, t] : result.final_params) {
    auto other = epoch1.at(name).values();
    for (std::size_t i = 0; i < other.size(); ++i) CHECK(t.values()[i] == other[i]);
  }
}

TEST_CASE("train: fixed seed reproduces the final checkpoint byte for byte") {
  auto ds = make_datasets(tiny_spec());
  model::TrainConfig tc;
  tc.epochs = 2;
  tc.batch_size = 4;
  tc.base_lr = 2e-3;
  tc.warmup_steps = 10;
  tc.average_top_k = 2;
  tc.seed = 9;
  tc.speed_perturb = true;  // exercise the augmentation paths too
  tc.speed_ratios = {0.9, 1.1};
  tc.specaugment = true;
  tc.specaug = {1, 2, 1, 1};

  const auto out_a = fresh_dir("det_a");
  const auto out_b = fresh_dir("det_b");
  model::Model ma(tiny_model_config(6), ds.vocab.size());
  model::Model mb(tiny_model_config(6), ds.vocab.size());
  model::train_model(ma, tc, ds.train, ds.valid, out_a, nullptr);
  model::train_model(mb, tc, ds.train, ds.valid, out_b, nullptr);
  CHECK(slurp(out_a / "model.ckpt") == slurp(out_b / "model.ckpt"));
  CHECK(slurp(out_a / "train_log.jsonl") == slurp(out_b / "train_log.jsonl"));

  // A different seed must actually change the trajectory.
  model::TrainConfig tc2 = tc;
  tc2.seed = 10;
  const auto out_c = fresh_dir("det_c");
  model::Model mc(tiny_model_config(6), ds.vocab.size());
  model::train_model(mc, tc2, ds.train, ds.valid, out_c, nullptr);
  CHECK(slurp(out_a / "model.ckpt") != slurp(out_c / "model.ckpt"));
}

TEST_CASE("train: log file carries one JSON row per epoch") {
  auto ds = make_datasets(tiny_spec());
  model::TrainConfig tc;
  tc.epochs = 3;
  tc.batch_size = 4;
  tc.warmup_steps = 10;
  tc.average_top_k = 2;
  tc.seed = 5;
  tc.speed_perturb = false;
  tc.specaugment = false;

  const auto out = fresh_dir("log");
  model::Model m(tiny_model_config(6), ds.vocab.size());
  auto result = model::train_model(m, tc, ds.train, ds.valid, out, nullptr);
  CHECK(result.log.size() == 3);
  CHECK(result.averaged_epochs.size() == 2);

  std::istringstream lines(slurp(out / "train_log.jsonl"));
  std::string line;
  int rows = 0;
  while (std::getline(lines, line)) {
    if (line.empty()) continue;
    auto j = nlohmann::json::parse(line);
    for (const char* key : {"epoch", "step", "lr", "loss", "loss_ctc", "loss_inter",
                            "loss_dec", "valid_acc"}) {
      CHECK(j.contains(key));
    }
    ++rows;
  }
  CHECK(rows == 3);
}

TEST_CASE("train: noiseless synthetic task is driven below 0.1 training loss") {
  corpus::SyntheticSpec spec;
  spec.speakers_per_class = 4;
  spec.utterances_per_speaker = 8;
  spec.vocab_size = 8;
  spec.feature_dim = 8;
  spec.frames_per_token = 4;
  spec.min_tokens = 3;
  spec.max_tokens = 6;
  spec.noise_sigma = 0.0;
  spec.seed = 99;
  auto ds = make_datasets(spec);

  model::ModelConfig cfg;
  cfg.feature_dim = 8;
  cfg.num_layers = 2;
  cfg.hidden_dim = 48;
  cfg.num_heads = 2;
  cfg.mlp_dim = 96;
  cfg.decoder_layers = 1;
  cfg.subsample = 2;
  cfg.interctc_layers = {1};
  cfg.interctc_targets = {model::InterTarget::kTagPrefixedTokens};
  cfg.tag_mode = model::TagMode::kBoth;
  cfg.init_seed = 5;

  model::TrainConfig tc;
  tc.epochs = 80;
  tc.batch_size = 2;
  tc.base_lr = 3e-3;
  tc.warmup_steps = 400;
  tc.average_top_k = 5;
  tc.seed = 5;
  tc.speed_perturb = false;
  tc.specaugment = false;

  const auto out = fresh_dir("converge");
  model::Model m(cfg, ds.vocab.size());
  auto result = model::train_model(m, tc, ds.train, ds.valid, out, nullptr);
  CHECK(result.log.back().loss < 0.1);
}
