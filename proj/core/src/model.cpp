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

#include "aphasia/model.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "aphasia/rng.hpp"

namespace aphasia::model {

using autodiff::ParamStore;
using autodiff::Shape;
using autodiff::Tensor;
using autodiff::TensorError;

namespace {

constexpr double kMaskValue = -1e30;

const char* kTagModeNames[] = {"none", "prepend", "append", "both"};

enum class Init { kXavier, kZeros, kOnes };

// Single source of truth for the parameter inventory; init and checkpoint
// validation both walk it.
void for_each_param(const ModelConfig& cfg, int vocab,
                    const std::function<void(const std::string&, Shape, Init)>& fn) {
  const int H = cfg.hidden_dim;
  const int M = cfg.mlp_dim;
  auto ln = [&](const std::string& prefix) {
    fn(prefix + ".g", {H}, Init::kOnes);
    fn(prefix + ".b", {H}, Init::kZeros);
  };
  auto attn = [&](const std::string& prefix) {
    for (const char* w : {"wq", "wk", "wv", "wo"}) fn(prefix + "." + w, {H, H}, Init::kXavier);
    for (const char* b : {"bq", "bk", "bv", "bo"}) fn(prefix + "." + b, {H}, Init::kZeros);
  };

  fn("frontend.proj.w", {cfg.feature_dim, H}, Init::kXavier);
  fn("frontend.proj.b", {H}, Init::kZeros);
  ln("frontend.norm");

  for (int e = 0; e < cfg.num_layers; ++e) {
    const std::string p = "enc." + std::to_string(e) + ".";
    ln(p + "attn.norm");
    attn(p + "attn");
    ln(p + "mlp.norm");
    fn(p + "mlp.w1", {H, M}, Init::kXavier);
    fn(p + "mlp.b1", {M}, Init::kZeros);
    fn(p + "mlp.w2", {M / 2, H}, Init::kXavier);
    fn(p + "mlp.b2", {H}, Init::kZeros);
    fn(p + "merge.w", {2 * H, H}, Init::kXavier);
    fn(p + "merge.b", {H}, Init::kZeros);
    ln(p + "out_norm");
  }

  fn("ctc.w", {H, vocab}, Init::kXavier);
  fn("ctc.b", {vocab}, Init::kZeros);

  for (int layer : cfg.interctc_layers) {
    const std::string p = "tap." + std::to_string(layer) + ".";
    ln(p + "norm");
    // Zero-initialized conditioning projection: a fresh tap starts as a
    // pure Norm pass-through.
    fn(p + "proj.w", {vocab, H}, Init::kZeros);
    fn(p + "proj.b", {H}, Init::kZeros);
  }

  fn("dec.embed", {vocab, H}, Init::kXavier);
  for (int d = 0; d < cfg.decoder_layers; ++d) {
    const std::string p = "dec." + std::to_string(d) + ".";
    ln(p + "self.norm");
    attn(p + "self");
    ln(p + "cross.norm");
    attn(p + "cross");
    ln(p + "ffn.norm");
    fn(p + "ffn.w1", {H, M}, Init::kXavier);
    fn(p + "ffn.b1", {M}, Init::kZeros);
    fn(p + "ffn.w2", {M, H}, Init::kXavier);
    fn(p + "ffn.b2", {H}, Init::kZeros);
  }
  ln("dec.final_norm");
  fn("dec.out.w", {H, vocab}, Init::kXavier);
  fn("dec.out.b", {vocab}, Init::kZeros);
}

Tensor constant_matrix(int rows, int cols, const std::function<double(int, int)>& f) {
  std::vector<double> vals(static_cast<std::size_t>(rows) * cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) vals[static_cast<std::size_t>(r) * cols + c] = f(r, c);
  return Tensor::from_values({rows, cols}, std::move(vals));
}

Tensor positional_encoding(int len, int dim) {
  return constant_matrix(len, dim, [dim](int pos, int c) {
    const double exponent = static_cast<double>(c - (c % 2)) / dim;
    const double inv_freq = std::exp(-std::log(10000.0) * exponent);
    const double angle = pos * inv_freq;
    return (c % 2 == 0) ? std::sin(angle) : std::cos(angle);
  });
}

}  // namespace

std::string_view tag_mode_name(TagMode mode) { return kTagModeNames[static_cast<int>(mode)]; }

std::optional<TagMode> tag_mode_from_name(std::string_view name) {
  for (int i = 0; i < 4; ++i) {
    if (name == kTagModeNames[i]) return static_cast<TagMode>(i);
  }
  return std::nullopt;
}

void ModelConfig::validate() const {
  auto fail = [](const std::string& msg) {
    throw ModelError(ModelError::Code::kBadConfig, msg);
  };
  if (feature_dim < 1 || num_layers < 1 || hidden_dim < 1 || decoder_layers < 1) {
    fail("model dimensions must be positive");
  }
  if (hidden_dim % num_heads != 0) fail("hidden_dim must be divisible by num_heads");
  if (mlp_dim % 2 != 0) fail("mlp_dim must be even (the gate splits it in half)");
  if (subsample < 1) fail("subsample must be >= 1");
  if (ctc_weight < 0 || ctc_weight > 1) fail("ctc_weight must lie in [0, 1]");
  if (interctc_weight < 0 || interctc_weight > 1) fail("interctc_weight must lie in [0, 1]");
  if (!interctc_targets.empty() && interctc_targets.size() != interctc_layers.size()) {
    fail("interctc_targets must match interctc_layers");
  }
  for (std::size_t i = 0; i < interctc_layers.size(); ++i) {
    const int layer = interctc_layers[i];
    if (layer < 1 || layer >= num_layers) {
      fail("interctc layer " + std::to_string(layer) + " must satisfy 1 <= e < " +
           std::to_string(num_layers));
    }
    for (std::size_t j = i + 1; j < interctc_layers.size(); ++j) {
      if (interctc_layers[j] == layer) {
        fail("interctc layer " + std::to_string(layer) + " listed twice");
      }
    }
  }
}

ModelConfig ModelConfig::from_key_values(const KeyValueFile& kv) {
  ModelConfig cfg;
  cfg.feature_dim = static_cast<int>(kv.get_int("feature_dim", cfg.feature_dim));
  cfg.num_layers = static_cast<int>(kv.get_int("num_layers", cfg.num_layers));
  cfg.hidden_dim = static_cast<int>(kv.get_int("hidden_dim", cfg.hidden_dim));
  cfg.num_heads = static_cast<int>(kv.get_int("num_heads", cfg.num_heads));
  cfg.mlp_dim = static_cast<int>(kv.get_int("mlp_dim", cfg.mlp_dim));
  cfg.decoder_layers = static_cast<int>(kv.get_int("decoder_layers", cfg.decoder_layers));
  cfg.subsample = static_cast<int>(kv.get_int("subsample", cfg.subsample));
  cfg.interctc_layers = kv.get_int_list("interctc_layers", cfg.interctc_layers);
  cfg.interctc_targets.clear();
  for (const std::string& t :
       kv.get_string_list("interctc_targets", std::vector<std::string>{})) {
    if (t == "asr") {
      cfg.interctc_targets.push_back(InterTarget::kAsrTokens);
    } else if (t == "tag") {
      cfg.interctc_targets.push_back(InterTarget::kTagPrefixedTokens);
    } else {
      throw ModelError(ModelError::Code::kBadConfig,
                       "interctc_targets entries must be 'asr' or 'tag', got " + t);
    }
  }
  cfg.interctc_condition = kv.get_bool("interctc_condition", cfg.interctc_condition);
  cfg.ctc_weight = kv.get_double("ctc_weight", cfg.ctc_weight);
  cfg.interctc_weight = kv.get_double("interctc_weight", cfg.interctc_weight);
  auto mode = tag_mode_from_name(kv.get_string("tag_mode", "none"));
  if (!mode) throw ModelError(ModelError::Code::kBadConfig, "unknown tag_mode");
  cfg.tag_mode = *mode;
  cfg.label_smoothing = kv.get_double("label_smoothing", cfg.label_smoothing);
  cfg.init_seed = static_cast<std::uint64_t>(kv.get_int("init_seed", 0));
  cfg.validate();
  return cfg;
}

void ModelConfig::to_key_values(KeyValueFile* kv) const {
  auto set_int = [&](const char* k, std::int64_t v) { kv->set(k, std::to_string(v)); };
  set_int("feature_dim", feature_dim);
  set_int("num_layers", num_layers);
  set_int("hidden_dim", hidden_dim);
  set_int("num_heads", num_heads);
  set_int("mlp_dim", mlp_dim);
  set_int("decoder_layers", decoder_layers);
  set_int("subsample", subsample);
  std::string layers, targets;
  for (std::size_t i = 0; i < interctc_layers.size(); ++i) {
    if (i) layers += ',', targets += ',';
    layers += std::to_string(interctc_layers[i]);
    const InterTarget t =
        i < interctc_targets.size() ? interctc_targets[i] : InterTarget::kTagPrefixedTokens;
    targets += (t == InterTarget::kAsrTokens) ? "asr" : "tag";
  }
  kv->set("interctc_layers", layers);
  kv->set("interctc_targets", targets);
  kv->set("interctc_condition", interctc_condition ? "true" : "false");
  kv->set("ctc_weight", std::to_string(ctc_weight));
  kv->set("interctc_weight", std::to_string(interctc_weight));
  kv->set("tag_mode", std::string(tag_mode_name(tag_mode)));
  kv->set("label_smoothing", std::to_string(label_smoothing));
  set_int("init_seed", static_cast<std::int64_t>(init_seed));
}

double combine_losses(double lambda, double alpha, double l_ctc, double l_inter_mean,
                      double l_dec, bool has_taps) {
  // Same association order as the loss graph so reported totals match the
  // closed form bit for bit.
  if (has_taps) {
    return lambda * (alpha * l_inter_mean + (1.0 - alpha) * l_ctc) + (1.0 - lambda) * l_dec;
  }
  return lambda * l_ctc + (1.0 - lambda) * l_dec;
}

std::vector<int> insert_tags(std::span<const int> tokens, bool aphasia, TagMode mode) {
  for (int t : tokens) {
    if (t == Vocabulary::kAphTagId || t == Vocabulary::kNonAphTagId) {
      throw ModelError(ModelError::Code::kAlreadyTagged,
                       "insert_tags: input already contains a tag token");
    }
  }
  const int tag = aphasia ? Vocabulary::kAphTagId : Vocabulary::kNonAphTagId;
  std::vector<int> out;
  out.reserve(tokens.size() + 2);
  if (mode == TagMode::kPrepend || mode == TagMode::kBoth) out.push_back(tag);
  out.insert(out.end(), tokens.begin(), tokens.end());
  if (mode == TagMode::kAppend || mode == TagMode::kBoth) out.push_back(tag);
  return out;
}

std::pair<std::vector<int>, std::vector<int>> strip_tags(std::span<const int> tokens) {
  std::vector<int> rest, tags;
  for (int t : tokens) {
    if (t == Vocabulary::kAphTagId || t == Vocabulary::kNonAphTagId) {
      tags.push_back(t);
    } else {
      rest.push_back(t);
    }
  }
  return {std::move(rest), std::move(tags)};
}

ctc::LogProbLattice EncodeResult::final_lattice() const {
  ctc::LogProbLattice lat;
  lat.frames = final_logp.dim(0);
  lat.vocab = final_logp.dim(1);
  lat.logp.assign(final_logp.values().begin(), final_logp.values().end());
  return lat;
}

ctc::LogProbLattice EncodeResult::inter_lattice(int layer) const {
  for (const auto& [l, lp] : inter_logp) {
    if (l == layer) {
      ctc::LogProbLattice lat;
      lat.frames = lp.dim(0);
      lat.vocab = lp.dim(1);
      lat.logp.assign(lp.values().begin(), lp.values().end());
      return lat;
    }
  }
  throw ModelError(ModelError::Code::kBadConfig,
                   "no InterCTC lattice at layer " + std::to_string(layer));
}

Model::Model(ModelConfig config, int vocab_size)
    : config_(std::move(config)), vocab_size_(vocab_size) {
  config_.validate();
  init_params();
}

Model::Model(ModelConfig config, int vocab_size, ParamStore params)
    : config_(std::move(config)), vocab_size_(vocab_size), params_(std::move(params)) {
  config_.validate();
  check_params();
}

void Model::init_params() {
  for_each_param(config_, vocab_size_, [&](const std::string& name, Shape shape, Init init) {
    std::int64_t n = 1;
    for (int d : shape) n *= d;
    std::vector<double> vals(static_cast<std::size_t>(n), 0.0);
    switch (init) {
      case Init::kZeros:
        break;
      case Init::kOnes:
        std::fill(vals.begin(), vals.end(), 1.0);
        break;
      case Init::kXavier: {
        const int fan_in = shape.size() == 2 ? shape[0] : shape[0];
        const int fan_out = shape.size() == 2 ? shape[1] : shape[0];
        const double limit = std::sqrt(6.0 / (fan_in + fan_out));
        Rng rng = Rng::from_stream(config_.init_seed, name);
        for (double& v : vals) v = rng.uniform(-limit, limit);
        break;
      }
    }
    params_.emplace(name, Tensor::from_values(shape, std::move(vals), true));
  });
}

void Model::check_params() const {
  for_each_param(config_, vocab_size_, [&](const std::string& name, Shape shape, Init) {
    if (!params_.contains(name)) {
      throw ModelError(ModelError::Code::kBadConfig,
                       "checkpoint is missing parameter '" + name + "'");
    }
    if (params_.at(name).shape() != shape) {
      throw ModelError(ModelError::Code::kBadConfig,
                       "checkpoint parameter '" + name + "' has the wrong shape");
    }
  });
}

Tensor Model::attention(const Tensor& q_input, const Tensor& kv_input,
                        const std::string& prefix, bool causal, int valid_kv) const {
  const int H = config_.hidden_dim;
  const int heads = config_.num_heads;
  const int dh = H / heads;
  auto P = [&](const char* suffix) -> const Tensor& { return params_.at(prefix + "." + suffix); };

  Tensor q = add_rowwise(matmul(q_input, P("wq")), P("bq"));
  Tensor k = add_rowwise(matmul(kv_input, P("wk")), P("bk"));
  Tensor v = add_rowwise(matmul(kv_input, P("wv")), P("bv"));

  const int lq = q.dim(0);
  const int lkv = k.dim(0);
  Tensor mask;
  if (causal || valid_kv >= 0) {
    mask = constant_matrix(lq, lkv, [&](int i, int j) {
      if (causal && j > i) return kMaskValue;
      if (valid_kv >= 0 && j >= valid_kv) return kMaskValue;
      return 0.0;
    });
  }

  Tensor ctx;
  const double inv_sqrt_dh = 1.0 / std::sqrt(static_cast<double>(dh));
  for (int h = 0; h < heads; ++h) {
    Tensor qh = slice_cols(q, h * dh, (h + 1) * dh);
    Tensor kh = slice_cols(k, h * dh, (h + 1) * dh);
    Tensor vh = slice_cols(v, h * dh, (h + 1) * dh);
    Tensor scores = scale(matmul(qh, transpose(kh)), inv_sqrt_dh);
    if (mask.defined()) scores = add(scores, mask);
    Tensor weights = softmax_rows(scores);
    Tensor head_ctx = matmul(weights, vh);
    ctx = ctx.defined() ? concat_cols(ctx, head_ctx) : head_ctx;
  }
  return add_rowwise(matmul(ctx, P("wo")), P("bo"));
}

Tensor Model::encoder_block(const Tensor& x, int block_index) const {
  const std::string p = "enc." + std::to_string(block_index) + ".";
  auto P = [&](const std::string& suffix) -> const Tensor& { return params_.at(p + suffix); };

  Tensor attn_in = layer_norm_rows(x, P("attn.norm.g"), P("attn.norm.b"));
  Tensor attn_out = attention(attn_in, attn_in, p + "attn", /*causal=*/false);

  Tensor mlp_in = layer_norm_rows(x, P("mlp.norm.g"), P("mlp.norm.b"));
  Tensor up = gelu(add_rowwise(matmul(mlp_in, P("mlp.w1")), P("mlp.b1")));
  const int half = config_.mlp_dim / 2;
  Tensor gated = mul(slice_cols(up, 0, half), slice_cols(up, half, config_.mlp_dim));
  Tensor mlp_out = add_rowwise(matmul(gated, P("mlp.w2")), P("mlp.b2"));

  Tensor merged = add_rowwise(
      matmul(concat_cols(attn_out, mlp_out), P("merge.w")), P("merge.b"));
  return layer_norm_rows(add(x, merged), P("out_norm.g"), P("out_norm.b"));
}

EncodeResult Model::encode(const corpus::FeatureMatrix& features) const {
  if (features.rows < 1 || features.cols != config_.feature_dim) {
    throw TensorError(TensorError::Code::kShapeMismatch,
                      "encode: feature matrix must be L x feature_dim with L >= 1");
  }
  std::vector<double> vals(features.data.begin(), features.data.end());
  Tensor x = Tensor::from_values({features.rows, features.cols}, std::move(vals));

  x = add_rowwise(matmul(x, params_.at("frontend.proj.w")), params_.at("frontend.proj.b"));
  x = layer_norm_rows(x, params_.at("frontend.norm.g"), params_.at("frontend.norm.b"));
  if (config_.subsample > 1) {
    std::vector<int> keep;
    for (int r = 0; r < x.dim(0); r += config_.subsample) keep.push_back(r);
    x = select_rows(x, std::move(keep));
  }
  x = add(x, positional_encoding(x.dim(0), config_.hidden_dim));

  EncodeResult result;
  const Tensor& ctc_w = params_.at("ctc.w");
  const Tensor& ctc_b = params_.at("ctc.b");
  for (int e = 0; e < config_.num_layers; ++e) {
    x = encoder_block(x, e);
    const int layer = e + 1;
    const auto it = std::find(config_.interctc_layers.begin(), config_.interctc_layers.end(), layer);
    if (it != config_.interctc_layers.end() && layer < config_.num_layers) {
      Tensor logp = log_softmax_rows(add_rowwise(matmul(x, ctc_w), ctc_b));
      result.inter_logp.emplace_back(layer, logp);
      if (config_.interctc_condition) {
        const std::string tp = "tap." + std::to_string(layer) + ".";
        x = ctc::interctc_condition(x, logp, params_.at(tp + "norm.g"), params_.at(tp + "norm.b"),
                                    params_.at(tp + "proj.w"), params_.at(tp + "proj.b"));
      }
    }
  }

  if (!autodiff::all_finite(x)) {
    throw TensorError(TensorError::Code::kNanDetected,
                      "encode: non-finite values in encoder output");
  }
  result.hidden = x;
  result.final_logp = log_softmax_rows(add_rowwise(matmul(x, ctc_w), ctc_b));
  return result;
}

Tensor Model::decoder_logp(const Tensor& enc_hidden, std::span<const int> input_ids,
                           int valid_frames) const {
  if (input_ids.empty() || input_ids.front() != Vocabulary::kSosEosId) {
    throw TensorError(TensorError::Code::kShapeMismatch,
                      "decoder_logp: input must start with sos");
  }
  const int H = config_.hidden_dim;
  std::vector<int> ids(input_ids.begin(), input_ids.end());
  Tensor y = select_rows(params_.at("dec.embed"), std::move(ids));
  y = scale(y, std::sqrt(static_cast<double>(H)));
  y = add(y, positional_encoding(static_cast<int>(input_ids.size()), H));

  for (int d = 0; d < config_.decoder_layers; ++d) {
    const std::string p = "dec." + std::to_string(d) + ".";
    auto P = [&](const std::string& suffix) -> const Tensor& { return params_.at(p + suffix); };
    Tensor self_in = layer_norm_rows(y, P("self.norm.g"), P("self.norm.b"));
    y = add(y, attention(self_in, self_in, p + "self", /*causal=*/true));
    Tensor cross_in = layer_norm_rows(y, P("cross.norm.g"), P("cross.norm.b"));
    y = add(y, attention(cross_in, enc_hidden, p + "cross", /*causal=*/false, valid_frames));
    Tensor ffn_in = layer_norm_rows(y, P("ffn.norm.g"), P("ffn.norm.b"));
    Tensor up = gelu(add_rowwise(matmul(ffn_in, P("ffn.w1")), P("ffn.b1")));
    y = add(y, add_rowwise(matmul(up, P("ffn.w2")), P("ffn.b2")));
  }
  y = layer_norm_rows(y, params_.at("dec.final_norm.g"), params_.at("dec.final_norm.b"));
  Tensor logits = add_rowwise(matmul(y, params_.at("dec.out.w")), params_.at("dec.out.b"));
  return log_softmax_rows(logits);
}

std::vector<double> Model::decode_step(const Tensor& enc_hidden, std::span<const int> prefix,
                                       int valid_frames) const {
  std::vector<int> input;
  input.reserve(prefix.size() + 1);
  input.push_back(Vocabulary::kSosEosId);
  input.insert(input.end(), prefix.begin(), prefix.end());
  Tensor logp = decoder_logp(enc_hidden, input, valid_frames);
  const int rows = logp.dim(0);
  const int cols = logp.dim(1);
  auto vals = logp.values();
  return std::vector<double>(vals.begin() + static_cast<std::ptrdiff_t>(rows - 1) * cols,
                             vals.end());
}

std::vector<int> Model::inter_target(std::span<const int> tokens, bool aphasia,
                                     InterTarget kind) {
  if (kind == InterTarget::kAsrTokens) return {tokens.begin(), tokens.end()};
  std::vector<int> out;
  out.reserve(tokens.size() + 1);
  out.push_back(aphasia ? Vocabulary::kAphTagId : Vocabulary::kNonAphTagId);
  out.insert(out.end(), tokens.begin(), tokens.end());
  return out;
}

LossOutput Model::compute_loss(std::span<const TrainItem> batch) const {
  if (batch.empty()) {
    throw TensorError(TensorError::Code::kShapeMismatch, "compute_loss: empty batch");
  }
  const bool has_taps = !config_.interctc_layers.empty();
  const double V = static_cast<double>(vocab_size_);
  const double eps = config_.label_smoothing;
  double smoothing_entropy = 0.0;
  if (eps > 0.0) {
    const double q_on = 1.0 - eps + eps / V;
    const double q_off = eps / V;
    smoothing_entropy = -(q_on * std::log(q_on) + (V - 1.0) * q_off * std::log(q_off));
  }

  std::vector<Tensor> ctc_losses, dec_losses;
  std::map<int, std::vector<Tensor>> inter_losses;
  int infeasible = 0;

  for (const TrainItem& item : batch) {
    const std::vector<int> tagged = insert_tags(item.tokens, item.aphasia, config_.tag_mode);
    EncodeResult enc = encode(item.features);

    bool feasible = false;
    Tensor l_ctc = ctc::ctc_loss_op(enc.final_logp, tagged, &feasible);
    if (feasible) {
      ctc_losses.push_back(l_ctc);
    } else {
      ++infeasible;
    }

    for (std::size_t i = 0; i < enc.inter_logp.size(); ++i) {
      const auto& [layer, logp] = enc.inter_logp[i];
      // inter_logp comes back in block order; the target kind is keyed by
      // layer index, not by config position.
      InterTarget kind = InterTarget::kTagPrefixedTokens;
      for (std::size_t j = 0; j < config_.interctc_layers.size(); ++j) {
        if (config_.interctc_layers[j] == layer && j < config_.interctc_targets.size()) {
          kind = config_.interctc_targets[j];
        }
      }
      const std::vector<int> target = inter_target(item.tokens, item.aphasia, kind);
      bool inter_feasible = false;
      Tensor l_inter = ctc::ctc_loss_op(logp, target, &inter_feasible);
      if (inter_feasible) {
        inter_losses[layer].push_back(l_inter);
      } else {
        ++infeasible;
      }
    }

    std::vector<int> dec_input;
    dec_input.reserve(tagged.size() + 1);
    dec_input.push_back(Vocabulary::kSosEosId);
    dec_input.insert(dec_input.end(), tagged.begin(), tagged.end());
    std::vector<int> dec_target(tagged.begin(), tagged.end());
    dec_target.push_back(Vocabulary::kSosEosId);

    Tensor logp = decoder_logp(enc.hidden, dec_input);
    Tensor pick = nll_gather_mean(logp, dec_target);
    // Label-smoothed KL form: (1-eps)*CE_target - eps*mean(logp) - H(q);
    // zero when the model matches the smoothed target exactly.
    Tensor l_dec = eps > 0.0
                       ? add_scalar(add(scale(pick, 1.0 - eps), scale(mean(logp), -eps)),
                                    -smoothing_entropy)
                       : pick;
    dec_losses.push_back(l_dec);
  }

  auto mean_of = [](const std::vector<Tensor>& parts) -> Tensor {
    if (parts.empty()) {
      return Tensor::scalar(std::numeric_limits<double>::infinity());
    }
    Tensor acc = parts[0];
    for (std::size_t i = 1; i < parts.size(); ++i) acc = add(acc, parts[i]);
    return scale(acc, 1.0 / static_cast<double>(parts.size()));
  };

  Tensor l_ctc_mean = mean_of(ctc_losses);
  Tensor l_dec_mean = mean_of(dec_losses);

  LossOutput out;
  out.breakdown.has_taps = has_taps;
  out.breakdown.infeasible_items = infeasible;
  out.breakdown.ctc = l_ctc_mean.item();
  out.breakdown.dec = l_dec_mean.item();

  Tensor total;
  if (has_taps) {
    std::vector<Tensor> layer_means;
    for (int layer : config_.interctc_layers) {
      auto it = inter_losses.find(layer);
      Tensor lm = (it == inter_losses.end()) ? mean_of({}) : mean_of(it->second);
      out.breakdown.inter_per_layer.emplace_back(layer, lm.item());
      layer_means.push_back(lm);
    }
    Tensor l_inter_mean = mean_of(layer_means);
    out.breakdown.inter_mean = l_inter_mean.item();
    total = add(scale(add(scale(l_inter_mean, config_.interctc_weight),
                          scale(l_ctc_mean, 1.0 - config_.interctc_weight)),
                      config_.ctc_weight),
                scale(l_dec_mean, 1.0 - config_.ctc_weight));
  } else {
    total = add(scale(l_ctc_mean, config_.ctc_weight),
                scale(l_dec_mean, 1.0 - config_.ctc_weight));
  }
  out.breakdown.total = total.item();
  out.loss = total;
  return out;
}

double Model::teacher_forced_accuracy(std::span<const TrainItem> batch) const {
  std::int64_t correct = 0, total = 0;
  for (const TrainItem& item : batch) {
    const std::vector<int> tagged = insert_tags(item.tokens, item.aphasia, config_.tag_mode);
    std::vector<int> dec_input;
    dec_input.push_back(Vocabulary::kSosEosId);
    dec_input.insert(dec_input.end(), tagged.begin(), tagged.end());
    std::vector<int> dec_target(tagged.begin(), tagged.end());
    dec_target.push_back(Vocabulary::kSosEosId);

    EncodeResult enc = encode(item.features);
    Tensor logp = decoder_logp(enc.hidden, dec_input);
    const int cols = logp.dim(1);
    for (int r = 0; r < logp.dim(0); ++r) {
      int best = 0;
      for (int c = 1; c < cols; ++c) {
        if (logp.at(r, c) > logp.at(r, best)) best = c;
      }
      correct += (best == dec_target[static_cast<std::size_t>(r)]) ? 1 : 0;
      ++total;
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
}

}  // namespace aphasia::model
