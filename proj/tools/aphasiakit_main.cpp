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

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <future>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "aphasia/chat.hpp"
#include "aphasia/checkpoint.hpp"
#include "aphasia/config_file.hpp"
#include "aphasia/corpus.hpp"
#include "aphasia/eval.hpp"
#include "aphasia/manifest.hpp"
#include "aphasia/model.hpp"
#include "aphasia/synthetic.hpp"
#include "aphasia/train.hpp"

namespace {

namespace fs = std::filesystem;
using namespace aphasia;

struct PrepareArgs {
  std::string chat_dir;
  std::string out;
  int jobs = 1;
};

struct SplitArgs {
  std::string manifest;
  std::string out_prefix;
  std::vector<double> ratios = {0.56, 0.19, 0.25};
  std::uint64_t seed = 0;
  double min_duration = 0.3;
  double max_duration = 30.0;
  bool no_duration_filter = false;
};

struct SynthArgs {
  std::string out_dir;
  corpus::SyntheticSpec spec;
};

struct TrainArgs {
  std::string config;
  std::string train_manifest;
  std::string valid_manifest;
  std::string out_dir;
  std::int64_t seed = -1;  // <0: keep the config file's seed
};

struct DecodeArgs {
  std::string checkpoint;
  std::string manifest;
  std::string out;
  std::string config;  // defaults to model.cfg next to the checkpoint
  std::string vocab;   // defaults to vocab.txt next to the checkpoint
  int beam = 10;
  double ctc_weight = -1.0;  // <0: reuse the model's training weight
  int max_len = 0;
  int nbest = 1;
  int jobs = 1;
};

int run_prepare(const PrepareArgs& args) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(args.chat_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".cha") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    std::cerr << "prepare: no .cha files under " << args.chat_dir << '\n';
    return 1;
  }

  std::vector<std::string> parts(files.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < files.size(); i = next.fetch_add(1)) {
      const std::string text = corpus::read_file(files[i]);
      parts[i] = chat::to_jsonl(chat::clean_document(chat::parse_chat(text)));
    }
  };
  if (args.jobs > 1) {
    std::vector<std::future<void>> futs;
    for (int t = 0; t < args.jobs; ++t) futs.push_back(std::async(std::launch::async, worker));
    for (auto& f : futs) f.get();
  } else {
    worker();
  }

  std::string all;
  for (const std::string& p : parts) all += p;
  corpus::write_file_atomic(args.out, all);
  std::cerr << "prepare: " << files.size() << " files -> " << args.out << '\n';
  return 0;
}

int run_split(const SplitArgs& args) {
  if (args.ratios.size() != 3) {
    std::cerr << "split: --ratios needs exactly three values\n";
    return 2;
  }
  corpus::Manifest manifest = corpus::load_manifest(args.manifest);
  if (!args.no_duration_filter) {
    const std::size_t before = manifest.size();
    manifest = corpus::filter_duration(manifest, args.min_duration, args.max_duration);
    std::cerr << "split: duration filter kept " << manifest.size() << "/" << before << '\n';
  }
  corpus::SplitSpec spec;
  spec.train = args.ratios[0];
  spec.valid = args.ratios[1];
  spec.test = args.ratios[2];
  spec.seed = args.seed;
  auto result = corpus::stratified_split(manifest, spec);
  for (const std::string& w : result.warnings) std::cerr << "split: warning: " << w << '\n';
  corpus::save_manifest(result.train, args.out_prefix + ".train.jsonl");
  corpus::save_manifest(result.valid, args.out_prefix + ".valid.jsonl");
  corpus::save_manifest(result.test, args.out_prefix + ".test.jsonl");
  std::cerr << "split: speakers -> train/valid/test utterances " << result.train.size() << "/"
            << result.valid.size() << "/" << result.test.size() << '\n';
  return 0;
}

int run_synth(const SynthArgs& args) {
  auto data = corpus::generate_synthetic(args.spec);
  const fs::path out_dir(args.out_dir);
  fs::create_directories(out_dir / "features");
  corpus::Manifest manifest = data.records;
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    const std::string rel = "features/" + manifest[i].utt_id + ".feat";
    corpus::save_features(data.features[i], out_dir / rel);
    manifest[i].feature_path = rel;
  }
  corpus::save_manifest(manifest, out_dir / "manifest.jsonl");
  std::cerr << "synth: wrote " << manifest.size() << " utterances to " << args.out_dir << '\n';
  return 0;
}

int run_train(const TrainArgs& args) {
  KeyValueFile kv =
      args.config.empty() ? KeyValueFile::parse("") : KeyValueFile::load(args.config);
  model::TrainConfig train_cfg = model::TrainConfig::from_key_values(kv);
  if (args.seed >= 0) train_cfg.seed = static_cast<std::uint64_t>(args.seed);

  eval::LoadedDataset train_data = eval::load_dataset(args.train_manifest);
  eval::LoadedDataset valid_data = eval::load_dataset(args.valid_manifest);
  if (train_data.records.empty()) {
    std::cerr << "train: empty training manifest\n";
    return 1;
  }

  if (!kv.contains("feature_dim")) {
    kv.set("feature_dim", std::to_string(train_data.features.front().cols));
  }
  model::ModelConfig model_cfg = model::ModelConfig::from_key_values(kv);
  if (!kv.contains("init_seed")) model_cfg.init_seed = train_cfg.seed;

  std::vector<std::string> words;
  for (const auto& r : train_data.records) {
    words.insert(words.end(), r.tokens.begin(), r.tokens.end());
  }
  const model::Vocabulary vocab = model::Vocabulary::build(words);

  const fs::path out_dir(args.out_dir);
  fs::create_directories(out_dir);
  vocab.save(out_dir / "vocab.txt");

  model::Model model(model_cfg, vocab.size());
  auto result = model::train_model(model, train_cfg, train_data, valid_data, out_dir, &std::cerr);

  KeyValueFile resolved;
  model_cfg.to_key_values(&resolved);
  train_cfg.to_key_values(&resolved);
  corpus::write_file_atomic(out_dir / "model.cfg", resolved.dump());

  std::cerr << "train: averaged epochs";
  for (int e : result.averaged_epochs) std::cerr << ' ' << e;
  std::cerr << "; final checkpoint " << (out_dir / "model.ckpt").string() << '\n';
  return 0;
}

struct LoadedModel {
  model::ModelConfig config;
  model::Vocabulary vocab;
  std::unique_ptr<model::Model> model;
  decode::BeamConfig beam;
};

LoadedModel load_model(const DecodeArgs& args) {
  const fs::path ckpt(args.checkpoint);
  const fs::path cfg_path = args.config.empty() ? ckpt.parent_path() / "model.cfg"
                                                : fs::path(args.config);
  const fs::path vocab_path = args.vocab.empty() ? ckpt.parent_path() / "vocab.txt"
                                                 : fs::path(args.vocab);
  LoadedModel lm{model::ModelConfig::from_key_values(KeyValueFile::load(cfg_path)),
                 model::Vocabulary::load(vocab_path), nullptr, {}};
  lm.model = std::make_unique<model::Model>(lm.config, lm.vocab.size(),
                                            autodiff::load_checkpoint(ckpt));
  lm.beam.beam_size = args.beam;
  lm.beam.ctc_weight = args.ctc_weight >= 0 ? args.ctc_weight : lm.config.ctc_weight;
  lm.beam.max_len = args.max_len;
  lm.beam.nbest = args.nbest;
  return lm;
}

int run_decode(const DecodeArgs& args) {
  LoadedModel lm = load_model(args);
  eval::LoadedDataset data = eval::load_dataset(args.manifest);
  const std::string jsonl =
      eval::decode_to_jsonl(*lm.model, data, lm.vocab, lm.beam, args.jobs);
  corpus::write_file_atomic(args.out, jsonl);
  std::cerr << "decode: wrote " << args.out << '\n';
  return 0;
}

int run_evaluate(const DecodeArgs& args) {
  LoadedModel lm = load_model(args);
  eval::LoadedDataset data = eval::load_dataset(args.manifest);
  eval::EvalReport report = eval::evaluate(*lm.model, data, lm.vocab, lm.beam, args.jobs);
  corpus::write_file_atomic(args.out, report.to_json());
  std::cerr << "evaluate: overall WER " << report.overall.wer();
  if (report.tag_detector) {
    std::cerr << ", tag sentence acc " << report.tag_detector->sentence.accuracy()
              << ", tag speaker acc " << report.tag_detector->speaker.accuracy();
  }
  if (report.interctc_detector) {
    std::cerr << ", interctc sentence acc " << report.interctc_detector->sentence.accuracy()
              << ", interctc speaker acc " << report.interctc_detector->speaker.accuracy();
  }
  std::cerr << "; report " << args.out << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"aphasiakit: CHAT transcript cleaning, hybrid CTC/attention training and "
               "aphasia detection evaluation"};
  app.require_subcommand(1);

  PrepareArgs prepare_args;
  auto* prepare = app.add_subcommand("prepare", "Clean CHAT transcripts into utterance JSONL");
  prepare->add_option("--chat-dir", prepare_args.chat_dir, "Directory of .cha files")->required();
  prepare->add_option("--out", prepare_args.out, "Output JSONL path")->required();
  prepare->add_option("--jobs", prepare_args.jobs, "Parallel file workers");

  SplitArgs split_args;
  auto* split = app.add_subcommand("split", "Duration-filter and split a manifest by speaker");
  split->add_option("--manifest", split_args.manifest, "Input manifest JSONL")->required();
  split->add_option("--out-prefix", split_args.out_prefix, "Prefix for .train/.valid/.test")
      ->required();
  split->add_option("--ratios", split_args.ratios, "Train,valid,test ratios")->delimiter(',');
  split->add_option("--seed", split_args.seed, "Shuffle seed");
  split->add_option("--min-duration", split_args.min_duration, "Seconds, inclusive");
  split->add_option("--max-duration", split_args.max_duration, "Seconds, inclusive");
  split->add_flag("--no-duration-filter", split_args.no_duration_filter,
                  "Skip the duration filter");

  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth", "Generate the synthetic desk-scale corpus");
  synth->add_option("--out-dir", synth_args.out_dir, "Output directory")->required();
  synth->add_option("--speakers-per-class", synth_args.spec.speakers_per_class);
  synth->add_option("--utts-per-speaker", synth_args.spec.utterances_per_speaker);
  synth->add_option("--vocab", synth_args.spec.vocab_size);
  synth->add_option("--dim", synth_args.spec.feature_dim);
  synth->add_option("--frames-per-token", synth_args.spec.frames_per_token);
  synth->add_option("--min-tokens", synth_args.spec.min_tokens);
  synth->add_option("--max-tokens", synth_args.spec.max_tokens);
  synth->add_option("--sigma", synth_args.spec.noise_sigma);
  synth->add_option("--class-bias", synth_args.spec.class_bias_scale);
  synth->add_option("--token-skew", synth_args.spec.token_skew);
  synth->add_option("--frame-rate", synth_args.spec.frame_rate_hz);
  synth->add_option("--seed", synth_args.spec.seed);

  TrainArgs train_args;
  auto* train = app.add_subcommand("train", "Train the hybrid CTC/attention model");
  train->add_option("--config", train_args.config, "key=value config file");
  train->add_option("--train", train_args.train_manifest, "Training manifest")->required();
  train->add_option("--valid", train_args.valid_manifest, "Validation manifest")->required();
  train->add_option("--out-dir", train_args.out_dir, "Output directory")->required();
  train->add_option("--seed", train_args.seed, "Override the config seed");

  DecodeArgs decode_args;
  auto* decode = app.add_subcommand("decode", "Joint beam-search decode to an n-best file");
  decode->add_option("--checkpoint", decode_args.checkpoint)->required();
  decode->add_option("--manifest", decode_args.manifest)->required();
  decode->add_option("--out", decode_args.out, "n-best JSONL")->required();
  decode->add_option("--config", decode_args.config, "Defaults to model.cfg beside the checkpoint");
  decode->add_option("--vocab", decode_args.vocab, "Defaults to vocab.txt beside the checkpoint");
  decode->add_option("--beam", decode_args.beam);
  decode->add_option("--ctc-weight", decode_args.ctc_weight);
  decode->add_option("--max-len", decode_args.max_len);
  decode->add_option("--nbest", decode_args.nbest);
  decode->add_option("--jobs", decode_args.jobs);

  DecodeArgs eval_args;
  auto* evaluate = app.add_subcommand("evaluate", "Decode and score WER plus detection");
  evaluate->add_option("--checkpoint", eval_args.checkpoint)->required();
  evaluate->add_option("--manifest", eval_args.manifest)->required();
  evaluate->add_option("--report", eval_args.out, "Report JSON path")->required();
  evaluate->add_option("--config", eval_args.config);
  evaluate->add_option("--vocab", eval_args.vocab);
  evaluate->add_option("--beam", eval_args.beam);
  evaluate->add_option("--ctc-weight", eval_args.ctc_weight);
  evaluate->add_option("--max-len", eval_args.max_len);
  evaluate->add_option("--jobs", eval_args.jobs);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (prepare->parsed()) return run_prepare(prepare_args);
    if (split->parsed()) return run_split(split_args);
    if (synth->parsed()) return run_synth(synth_args);
    if (train->parsed()) return run_train(train_args);
    if (decode->parsed()) return run_decode(decode_args);
    if (evaluate->parsed()) return run_evaluate(eval_args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
