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

#include "aphasia/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <json.hpp>

#include "aphasia/checkpoint.hpp"
#include "aphasia/rng.hpp"

namespace aphasia::model {
namespace {

struct PreparedItem {
  std::string utt_id;
  corpus::FeatureMatrix features;  // after speed perturbation
  std::vector<int> tokens;
  bool aphasia = false;
};

std::vector<PreparedItem> prepare_items(const eval::LoadedDataset& data,
                                        const Vocabulary& vocab, const TrainConfig& cfg,
                                        bool augment) {
  std::vector<PreparedItem> items;
  for (std::size_t i = 0; i < data.records.size(); ++i) {
    const corpus::UtteranceRecord& rec = data.records[i];
    PreparedItem base;
    base.utt_id = rec.utt_id;
    base.features = data.features[i];
    base.tokens = vocab.ids(rec.tokens);
    base.aphasia = rec.aphasia;
    if (augment && cfg.speed_perturb) {
      for (double ratio : cfg.speed_ratios) {
        if (ratio == 1.0) continue;
        PreparedItem sp = base;
        sp.utt_id += "#sp" + std::to_string(ratio);
        sp.features = corpus::speed_perturb(base.features, ratio);
        items.push_back(std::move(sp));
      }
    }
    items.push_back(std::move(base));
  }
  // Bucket by length to keep batch shapes similar; ties on utt_id keep the
  // order reproducible.
  std::stable_sort(items.begin(), items.end(), [](const PreparedItem& a, const PreparedItem& b) {
    if (a.features.rows != b.features.rows) return a.features.rows < b.features.rows;
    return a.utt_id < b.utt_id;
  });
  return items;
}

std::vector<TrainItem> make_batch(const std::vector<PreparedItem>& items, std::size_t begin,
                                  std::size_t end, const TrainConfig& cfg, int epoch,
                                  bool augment) {
  std::vector<TrainItem> batch;
  batch.reserve(end - begin);
  for (std::size_t i = begin; i < end; ++i) {
    TrainItem item;
    item.tokens = items[i].tokens;
    item.aphasia = items[i].aphasia;
    if (augment && cfg.specaugment) {
      Rng rng = Rng::from_stream(cfg.seed, items[i].utt_id + "/epoch" + std::to_string(epoch));
      item.features = corpus::spec_augment(items[i].features, cfg.specaug, rng);
    } else {
      item.features = items[i].features;
    }
    batch.push_back(std::move(item));
  }
  return batch;
}

}  // namespace

TrainConfig TrainConfig::from_key_values(const KeyValueFile& kv) {
  TrainConfig cfg;
  cfg.epochs = static_cast<int>(kv.get_int("epochs", cfg.epochs));
  cfg.batch_size = static_cast<int>(kv.get_int("batch_size", cfg.batch_size));
  cfg.base_lr = kv.get_double("base_lr", cfg.base_lr);
  cfg.warmup_steps = static_cast<int>(kv.get_int("warmup_steps", cfg.warmup_steps));
  cfg.grad_clip = kv.get_double("grad_clip", cfg.grad_clip);
  cfg.weight_decay = kv.get_double("weight_decay", cfg.weight_decay);
  cfg.average_top_k = static_cast<int>(kv.get_int("average_top_k", cfg.average_top_k));
  cfg.seed = static_cast<std::uint64_t>(kv.get_int("seed", 0));
  cfg.speed_perturb = kv.get_bool("speed_perturb", cfg.speed_perturb);
  cfg.speed_ratios = kv.get_double_list("speed_ratios", cfg.speed_ratios);
  cfg.specaugment = kv.get_bool("specaugment", cfg.specaugment);
  cfg.specaug.time_masks = static_cast<int>(kv.get_int("specaug_time_masks", cfg.specaug.time_masks));
  cfg.specaug.time_width = static_cast<int>(kv.get_int("specaug_time_width", cfg.specaug.time_width));
  cfg.specaug.freq_masks = static_cast<int>(kv.get_int("specaug_freq_masks", cfg.specaug.freq_masks));
  cfg.specaug.freq_width = static_cast<int>(kv.get_int("specaug_freq_width", cfg.specaug.freq_width));
  return cfg;
}

void TrainConfig::to_key_values(KeyValueFile* kv) const {
  auto set_int = [&](const char* k, std::int64_t v) { kv->set(k, std::to_string(v)); };
  auto set_dbl = [&](const char* k, double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    kv->set(k, buf);
  };
  set_int("epochs", epochs);
  set_int("batch_size", batch_size);
  set_dbl("base_lr", base_lr);
  set_int("warmup_steps", warmup_steps);
  set_dbl("grad_clip", grad_clip);
  set_dbl("weight_decay", weight_decay);
  set_int("average_top_k", average_top_k);
  set_int("seed", static_cast<std::int64_t>(seed));
  kv->set("speed_perturb", speed_perturb ? "true" : "false");
  std::string ratios;
  for (std::size_t i = 0; i < speed_ratios.size(); ++i) {
    if (i) ratios += ',';
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.10g", speed_ratios[i]);
    ratios += buf;
  }
  kv->set("speed_ratios", ratios);
  kv->set("specaugment", specaugment ? "true" : "false");
  set_int("specaug_time_masks", specaug.time_masks);
  set_int("specaug_time_width", specaug.time_width);
  set_int("specaug_freq_masks", specaug.freq_masks);
  set_int("specaug_freq_width", specaug.freq_width);
}

TrainResult train_model(Model& model, const TrainConfig& config,
                        const eval::LoadedDataset& train_data,
                        const eval::LoadedDataset& valid_data,
                        const std::filesystem::path& out_dir, std::ostream* progress) {
  // The vocabulary is fixed by the caller before training; ids in the
  // prepared items must already match the model's vocab size, so rebuild it
  // here from the records for id mapping only.
  std::vector<std::string> words;
  for (const corpus::UtteranceRecord& r : train_data.records) {
    words.insert(words.end(), r.tokens.begin(), r.tokens.end());
  }
  const Vocabulary vocab = Vocabulary::build(words);
  if (vocab.size() != model.vocab_size()) {
    throw ModelError(ModelError::Code::kBadConfig,
                     "model vocab size does not match the training manifest");
  }

  std::filesystem::create_directories(out_dir / "epochs");

  const std::vector<PreparedItem> train_items =
      prepare_items(train_data, vocab, config, /*augment=*/true);
  const std::vector<PreparedItem> valid_items =
      prepare_items(valid_data, vocab, config, /*augment=*/false);

  std::vector<TrainItem> valid_batch;
  for (const PreparedItem& it : valid_items) {
    TrainItem v;
    v.features = it.features;
    v.tokens = it.tokens;
    v.aphasia = it.aphasia;
    valid_batch.push_back(std::move(v));
  }

  // Batch boundaries over the length-sorted items.
  std::vector<std::pair<std::size_t, std::size_t>> batches;
  for (std::size_t begin = 0; begin < train_items.size();
       begin += static_cast<std::size_t>(config.batch_size)) {
    batches.emplace_back(begin, std::min(train_items.size(),
                                         begin + static_cast<std::size_t>(config.batch_size)));
  }

  autodiff::AdamConfig adam_cfg;
  adam_cfg.base_lr = config.base_lr;
  adam_cfg.weight_decay = config.weight_decay;
  adam_cfg.clip_norm = config.grad_clip;
  autodiff::AdamState adam(model.params(), adam_cfg);

  TrainResult result;
  std::string log_jsonl;
  std::int64_t global_step = 0;
  std::vector<std::pair<double, int>> scored_epochs;  // (valid_acc, epoch)

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::vector<std::size_t> batch_order(batches.size());
    for (std::size_t i = 0; i < batch_order.size(); ++i) batch_order[i] = i;
    Rng shuffle_rng = Rng::from_stream(config.seed, "epoch-order/" + std::to_string(epoch));
    for (std::size_t i = batch_order.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(shuffle_rng.uniform_int(static_cast<std::int64_t>(i)));
      std::swap(batch_order[i - 1], batch_order[j]);
    }

    double loss_sum = 0, ctc_sum = 0, inter_sum = 0, dec_sum = 0;
    double lr = 0.0;
    for (std::size_t b : batch_order) {
      auto batch = make_batch(train_items, batches[b].first, batches[b].second, config, epoch,
                              /*augment=*/true);
      model.params().zero_grad();
      LossOutput out = model.compute_loss(batch);
      if (!std::isfinite(out.breakdown.total)) {
        throw ModelError(ModelError::Code::kDiverged,
                         "training diverged: non-finite loss at epoch " + std::to_string(epoch));
      }
      autodiff::backward(out.loss);
      ++global_step;
      lr = autodiff::warmup_lr(global_step, config.base_lr, config.warmup_steps);
      adam.step(model.params(), lr);

      loss_sum += out.breakdown.total;
      ctc_sum += out.breakdown.ctc;
      inter_sum += out.breakdown.inter_mean;
      dec_sum += out.breakdown.dec;
    }

    const double valid_acc = model.teacher_forced_accuracy(valid_batch);
    const double nb = static_cast<double>(batches.size());
    EpochLog log{epoch, global_step, lr, loss_sum / nb, ctc_sum / nb, inter_sum / nb,
                 dec_sum / nb, valid_acc};
    result.log.push_back(log);
    scored_epochs.emplace_back(valid_acc, epoch);

    char name[32];
    std::snprintf(name, sizeof(name), "epoch_%03d.ckpt", epoch);
    autodiff::save_checkpoint(model.params(), out_dir / "epochs" / name);

    nlohmann::ordered_json j;
    j["epoch"] = log.epoch;
    j["step"] = log.steps;
    j["lr"] = log.lr;
    j["loss"] = log.loss;
    j["loss_ctc"] = log.ctc;
    j["loss_inter"] = log.inter;
    j["loss_dec"] = log.dec;
    j["valid_acc"] = log.valid_acc;
    log_jsonl += j.dump();
    log_jsonl += '\n';
    if (progress != nullptr) {
      *progress << "epoch " << epoch << "/" << config.epochs << " loss " << log.loss
                << " valid_acc " << valid_acc << " lr " << lr << '\n';
    }
  }

  corpus::write_file_atomic(out_dir / "train_log.jsonl", log_jsonl);

  // Top-k by validation accuracy; ties keep the earlier epoch.
  std::stable_sort(scored_epochs.begin(), scored_epochs.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  const int k = std::min<int>(config.average_top_k, static_cast<int>(scored_epochs.size()));
  std::vector<autodiff::ParamStore> selected;
  for (int i = 0; i < k; ++i) {
    const int epoch = scored_epochs[static_cast<std::size_t>(i)].second;
    result.averaged_epochs.push_back(epoch);
    char name[32];
    std::snprintf(name, sizeof(name), "epoch_%03d.ckpt", epoch);
    selected.push_back(autodiff::load_checkpoint(out_dir / "epochs" / name));
  }
  result.final_params = autodiff::average_checkpoints(selected);
  autodiff::save_checkpoint(result.final_params, out_dir / "model.ckpt");
  return result;
}

}  // namespace aphasia::model
