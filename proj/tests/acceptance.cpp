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

// Acceptance suite. Each criterion prints exactly one PASS/FAIL line; the
// process exits nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "aphasia/chat.hpp"
#include "aphasia/checkpoint.hpp"
#include "aphasia/corpus.hpp"
#include "aphasia/ctc.hpp"
#include "aphasia/decode.hpp"
#include "aphasia/eval.hpp"
#include "aphasia/model.hpp"
#include "aphasia/optim.hpp"
#include "aphasia/rng.hpp"
#include "aphasia/synthetic.hpp"
#include "aphasia/train.hpp"
#include "aphasia/wer.hpp"
#include "testutil.hpp"

using namespace aphasia;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(const char* id, bool pass, const std::string& detail) {
  std::printf("%s: %s (%s)\n", id, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

// --- A1: CTC oracle equivalence ---------------------------------------------

void criterion_a1() {
  const auto start = std::chrono::steady_clock::now();
  Rng rng(0xA1);
  int instances = 0, feasible = 0;
  double worst_nll = 0.0, worst_grad = 0.0;
  while (instances < 1000) {
    const int T = 1 + static_cast<int>(rng.uniform_int(6));
    const int V = 2 + static_cast<int>(rng.uniform_int(3));
    const int K = static_cast<int>(rng.uniform_int(4));
    std::vector<int> target(static_cast<std::size_t>(K));
    for (int& tok : target) tok = 1 + static_cast<int>(rng.uniform_int(V - 1));
    ctc::LogProbLattice lat = testutil::random_lattice(rng, T, V);
    ++instances;

    const auto res = ctc::ctc_loss(lat, target);
    const double brute = testutil::brute_force_ctc_prob(lat, target);
    if (!res.feasible) {
      if (brute > 1e-12) {
        report("A1", false, "implementation flagged a reachable target as infeasible");
        return;
      }
      continue;
    }
    ++feasible;
    worst_nll = std::max(worst_nll, std::abs(res.neg_log_likelihood + std::log(brute)));
    const auto fd = testutil::fd_ctc_grad(lat, target);
    // rtol 1e-5 with a 1e-9 absolute floor: near-zero occupancies sit below
    // the FD oracle's own roundoff (~2e-10 absolute), so a pure relative
    // comparison is ill-posed there.
    worst_grad =
        std::max(worst_grad, testutil::max_allclose_violation(res.grad_logp, fd, 1e-5, 1e-9));
  }
  const double elapsed = seconds_since(start);
  char detail[256];
  std::snprintf(detail, sizeof(detail),
                "%d instances (%d feasible), max |nll err| %.2e <= 1e-9, grad vs FD worst "
                "violation %.2fx of (1e-9 + 1e-5*|fd|) <= 1x, %.1fs < 60s",
                instances, feasible, worst_nll, worst_grad, elapsed);
  report("A1", worst_nll <= 1e-9 && worst_grad <= 1.0 && elapsed < 60.0 && feasible > 400,
         detail);
}

// --- A2: loss algebra --------------------------------------------------------

model::ModelConfig a2_config(double lambda, double alpha, bool taps) {
  model::ModelConfig cfg;
  cfg.feature_dim = 5;
  cfg.num_layers = 2;
  cfg.hidden_dim = 8;
  cfg.num_heads = 2;
  cfg.mlp_dim = 8;
  cfg.decoder_layers = 1;
  cfg.subsample = 1;
  cfg.ctc_weight = lambda;
  cfg.interctc_weight = alpha;
  cfg.tag_mode = model::TagMode::kBoth;
  if (taps) {
    cfg.interctc_layers = {1};
    cfg.interctc_targets = {model::InterTarget::kTagPrefixedTokens};
  }
  return cfg;
}

void criterion_a2() {
  Rng rng(0xA2);
  const int kVocab = 8;
  auto random_batch = [&](int n) {
    std::vector<model::TrainItem> batch(static_cast<std::size_t>(n));
    for (auto& item : batch) {
      const int L = 8 + static_cast<int>(rng.uniform_int(6));
      item.features = corpus::FeatureMatrix::zeros(L, 5);
      for (float& x : item.features.data) x = static_cast<float>(rng.normal());
      const int K = 1 + static_cast<int>(rng.uniform_int(3));
      item.tokens.resize(static_cast<std::size_t>(K));
      for (int& t : item.tokens) t = 5 + static_cast<int>(rng.uniform_int(3));
      item.aphasia = rng.uniform() < 0.5;
    }
    return batch;
  };

  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const double lambda = rng.uniform();
    const double alpha = rng.uniform();
    const bool taps = trial % 2 == 0;
    model::ModelConfig cfg = a2_config(lambda, alpha, taps);
    cfg.init_seed = static_cast<std::uint64_t>(trial);
    model::Model m(cfg, kVocab);
    auto out = m.compute_loss(random_batch(1 + trial % 2));
    const double closed = model::combine_losses(lambda, alpha, out.breakdown.ctc,
                                                out.breakdown.inter_mean, out.breakdown.dec,
                                                taps);
    worst = std::max(worst, std::abs(out.breakdown.total - closed));
  }

  auto batch = random_batch(2);
  model::Model m0(a2_config(0.0, 0.3, false), kVocab);
  auto l0 = m0.compute_loss(batch);
  const bool lam0 = l0.breakdown.total == l0.breakdown.dec;
  model::Model m1(a2_config(1.0, 0.3, false), kVocab);
  auto l1 = m1.compute_loss(batch);
  const bool lam1 = l1.breakdown.total == l1.breakdown.ctc;

  model::ModelConfig tap_cfg = a2_config(0.3, 0.0, true);
  tap_cfg.interctc_condition = false;  // zero-conditioned taps for exact equality
  model::Model ma(tap_cfg, kVocab);
  model::Model mb(a2_config(0.3, 0.0, false), kVocab);
  const double da = ma.compute_loss(batch).breakdown.total;
  const double db = mb.compute_loss(batch).breakdown.total;
  const bool alpha0 = std::abs(da - db) <= 1e-12;

  char detail[256];
  std::snprintf(detail, sizeof(detail),
                "100 triples max |total - closed form| %.2e <= 1e-12; endpoints lambda=0 %s, "
                "lambda=1 %s, alpha=0 %s",
                worst, lam0 ? "ok" : "bad", lam1 ? "ok" : "bad", alpha0 ? "ok" : "bad");
  report("A2", worst <= 1e-12 && lam0 && lam1 && alpha0, detail);
}

// --- A3: joint beam search exactness ----------------------------------------

void criterion_a3() {
  Rng rng(0xA3);
  const model::Vocabulary tiny = model::Vocabulary::build(std::vector<std::string>{});  // V'=5
  bool all_ok = true;
  std::string fail;
  for (int trial = 0; trial < 6 && all_ok; ++trial) {
    model::ModelConfig cfg;
    cfg.feature_dim = 4;
    cfg.num_layers = 1;
    cfg.hidden_dim = 8;
    cfg.num_heads = 2;
    cfg.mlp_dim = 8;
    cfg.decoder_layers = 1;
    cfg.subsample = 1;
    cfg.init_seed = 0xA30 + static_cast<std::uint64_t>(trial);
    model::Model m(cfg, tiny.size());
    corpus::FeatureMatrix feats = corpus::FeatureMatrix::zeros(4, 4);
    for (float& x : feats.data) x = static_cast<float>(rng.normal());
    auto enc = m.encode(feats);
    auto lattice = enc.final_lattice();
    const int max_len = 3 + trial % 2;

    for (double ctc_weight : {0.0, 0.3, 0.7, 1.0}) {
      decode::BeamConfig bc;
      bc.beam_size = 1000000;
      bc.ctc_weight = ctc_weight;
      bc.max_len = max_len;
      auto beam_best = decode::joint_beam_search(m, enc.hidden, lattice, bc).front();

      // Brute force over every content sequence up to max_len.
      const double lambda_d = 1.0 - ctc_weight;
      std::vector<int> content;
      for (int c = 0; c < lattice.vocab; ++c) {
        if (c != ctc::kBlankId && c != model::Vocabulary::kSosEosId) content.push_back(c);
      }
      decode::Hypothesis best;
      bool have = false;
      std::vector<int> seq;
      std::function<void()> visit = [&] {
        double dec = 0.0;
        std::vector<int> prefix;
        for (int tok : seq) {
          dec += m.decode_step(enc.hidden, prefix)[static_cast<std::size_t>(tok)];
          prefix.push_back(tok);
        }
        dec += m.decode_step(enc.hidden, prefix)[model::Vocabulary::kSosEosId];
        decode::Hypothesis h;
        h.tokens = seq;
        h.dec_score = dec;
        h.ctc_score = ctc::ctc_prefix_score(lattice, seq).log_complete;
        h.joint_score = lambda_d * dec + ctc_weight * h.ctc_score;
        auto better = [](const decode::Hypothesis& a, const decode::Hypothesis& b) {
          if (a.joint_score != b.joint_score) return a.joint_score > b.joint_score;
          if (a.tokens.size() != b.tokens.size()) return a.tokens.size() < b.tokens.size();
          return a.tokens < b.tokens;
        };
        if (!have || better(h, best)) {
          best = h;
          have = true;
        }
        if (static_cast<int>(seq.size()) < max_len) {
          for (int c : content) {
            seq.push_back(c);
            visit();
            seq.pop_back();
          }
        }
      };
      visit();

      if (beam_best.tokens != best.tokens ||
          std::abs(beam_best.joint_score - best.joint_score) > 1e-9) {
        all_ok = false;
        fail = "mismatch at ctc_weight " + std::to_string(ctc_weight);
        break;
      }
    }
  }
  report("A3", all_ok,
         all_ok ? "exhaustive beam equals brute-force argmax for ctc_weight in {0,0.3,0.7,1}"
                : fail);
}

// --- A4: CHAT golden corpus --------------------------------------------------

void criterion_a4() {
  const fs::path fixtures = fs::path(APHASIAKIT_FIXTURE_DIR) / "chat";
  const std::vector<fs::path> files = {fixtures / "adler01.cha", fixtures / "control01.cha"};
  const std::string expected = slurp(fixtures / "expected_clean.jsonl");

  int input_utterances = 0;
  auto run_once = [&](bool parallel) {
    std::vector<std::string> parts(files.size());
    auto work = [&](std::size_t i) {
      auto doc = chat::parse_chat(slurp(files[i]));
      input_utterances += static_cast<int>(doc.utterances.size());
      parts[i] = chat::to_jsonl(chat::clean_document(doc));
    };
    if (parallel) {
      std::vector<std::future<void>> futs;
      for (std::size_t i = 0; i < files.size(); ++i) {
        futs.push_back(std::async(std::launch::async, work, i));
      }
      for (auto& f : futs) f.get();
    } else {
      for (std::size_t i = 0; i < files.size(); ++i) work(i);
    }
    std::string all;
    for (auto& p : parts) all += p;
    return all;
  };

  input_utterances = 0;
  const std::string seq = run_once(false);
  const int inputs = input_utterances;
  const bool match = seq == expected;
  const bool stable = run_once(false) == seq && run_once(true) == seq;
  char detail[160];
  std::snprintf(detail, sizeof(detail),
                "%d fixture utterances >= 25, golden JSONL %s, byte-stable across runs and "
                "threads %s",
                inputs, match ? "byte-identical" : "MISMATCH", stable ? "yes" : "no");
  report("A4", inputs >= 25 && match && stable, detail);
}

// --- A5: end-to-end synthetic task -------------------------------------------

void criterion_a5() {
  const auto start = std::chrono::steady_clock::now();

  corpus::SyntheticSpec spec;
  spec.speakers_per_class = 20;
  spec.utterances_per_speaker = 20;
  spec.vocab_size = 20;
  spec.feature_dim = 16;
  spec.frames_per_token = 4;
  spec.min_tokens = 5;
  spec.max_tokens = 10;
  spec.noise_sigma = 0.05;
  spec.seed = 0xA5;
  auto data = corpus::generate_synthetic(spec);

  corpus::SplitSpec split_spec;
  split_spec.seed = 0xA5;
  // Split the records and carry the features along by utt_id.
  std::map<std::string, std::size_t> by_id;
  for (std::size_t i = 0; i < data.records.size(); ++i) by_id[data.records[i].utt_id] = i;
  auto split = corpus::stratified_split(data.records, split_spec);
  auto as_dataset = [&](const corpus::Manifest& manifest) {
    eval::LoadedDataset ds;
    ds.records = manifest;
    for (const auto& r : manifest) ds.features.push_back(data.features[by_id.at(r.utt_id)]);
    return ds;
  };
  eval::LoadedDataset train_ds = as_dataset(split.train);
  eval::LoadedDataset valid_ds = as_dataset(split.valid);
  eval::LoadedDataset test_ds = as_dataset(split.test);

  std::vector<std::string> words;
  for (const auto& r : train_ds.records) words.insert(words.end(), r.tokens.begin(), r.tokens.end());
  const model::Vocabulary vocab = model::Vocabulary::build(words);

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
  cfg.interctc_condition = true;
  cfg.ctc_weight = 0.3;
  cfg.interctc_weight = 0.3;
  cfg.tag_mode = model::TagMode::kBoth;
  cfg.init_seed = 0xA5;

  model::TrainConfig tc;
  tc.epochs = 20;
  tc.batch_size = 8;
  tc.base_lr = 2e-3;
  tc.warmup_steps = 300;
  tc.grad_clip = 1.0;
  tc.weight_decay = 1e-6;
  tc.average_top_k = 10;
  tc.seed = 0xA5;
  tc.speed_perturb = false;
  tc.specaugment = false;

  const fs::path out_dir = fs::temp_directory_path() / "aphasiakit_acceptance_a5";
  fs::remove_all(out_dir);
  fs::create_directories(out_dir);

  model::Model m(cfg, vocab.size());
  auto result = model::train_model(m, tc, train_ds, valid_ds, out_dir, nullptr);

  model::Model final_model(cfg, vocab.size(), std::move(result.final_params));
  decode::BeamConfig beam;
  beam.beam_size = 10;
  beam.ctc_weight = 0.3;
  auto rep = eval::evaluate(final_model, test_ds, vocab, beam, /*jobs=*/2);

  const double elapsed = seconds_since(start);
  const double wer = rep.overall.wer();
  const bool has_both = rep.tag_detector.has_value() && rep.interctc_detector.has_value();
  const double tag_sen = has_both ? rep.tag_detector->sentence.accuracy() : 0.0;
  const double tag_spk = has_both ? rep.tag_detector->speaker.accuracy() : 0.0;
  const double ic_sen = has_both ? rep.interctc_detector->sentence.accuracy() : 0.0;
  const double ic_spk = has_both ? rep.interctc_detector->speaker.accuracy() : 0.0;

  const bool pass = wer <= 0.05 && has_both && tag_sen >= 0.95 && ic_sen >= 0.95 &&
                    tag_spk == 1.0 && ic_spk == 1.0 && elapsed < 900.0;
  char detail[256];
  std::snprintf(detail, sizeof(detail),
                "WER %.4f <= 0.05; sentence acc tag %.4f / interctc %.4f >= 0.95; speaker acc "
                "tag %.3f / interctc %.3f == 1; %.0fs < 900s",
                wer, tag_sen, ic_sen, tag_spk, ic_spk, elapsed);
  report("A5", pass, detail);
}

// --- A6: protocol fidelity ---------------------------------------------------

void criterion_a6() {
  using corpus::SeverityLevel;
  const std::pair<double, SeverityLevel> points[] = {
      {0.0, SeverityLevel::kVerySevere},  {25.0, SeverityLevel::kVerySevere},
      {25.01, SeverityLevel::kSevere},    {50.0, SeverityLevel::kSevere},
      {75.0, SeverityLevel::kModerate},   {75.01, SeverityLevel::kMild},
      {100.0, SeverityLevel::kMild}};
  bool severity_ok = true;
  for (const auto& [aq, expect] : points) {
    severity_ok = severity_ok && corpus::classify_severity(aq, true) == expect;
  }

  // 100 speakers per stratum -> exactly 56/19/25 in each.
  corpus::Manifest manifest;
  const SeverityLevel levels[] = {SeverityLevel::kMild, SeverityLevel::kModerate,
                                  SeverityLevel::kSevere, SeverityLevel::kVerySevere,
                                  SeverityLevel::kControl};
  for (const SeverityLevel sev : levels) {
    for (int s = 0; s < 100; ++s) {
      corpus::UtteranceRecord r;
      r.speaker_id = std::string(corpus::severity_name(sev)) + "-" + std::to_string(s);
      r.utt_id = r.speaker_id + "-u0";
      r.tokens = {"x"};
      r.duration_s = 1.0;
      r.aphasia = sev != SeverityLevel::kControl;
      r.severity = sev;
      if (r.aphasia) r.aq = 50.0;
      manifest.push_back(std::move(r));
    }
  }
  corpus::SplitSpec ss;
  ss.seed = 0xA6;
  auto split = corpus::stratified_split(manifest, ss);
  auto stratum_counts = [&](const corpus::Manifest& part, SeverityLevel sev) {
    int n = 0;
    for (const auto& r : part) n += r.severity == sev;
    return n;
  };
  bool split_ok = true;
  for (const SeverityLevel sev : levels) {
    split_ok = split_ok && stratum_counts(split.train, sev) == 56 &&
               stratum_counts(split.valid, sev) == 19 && stratum_counts(split.test, sev) == 25;
  }

  corpus::Manifest durations;
  const double secs[] = {0.1, 0.29, 0.3, 1.0, 29.99, 30.0, 30.01, 100.0};
  for (double d : secs) {
    corpus::UtteranceRecord r;
    r.utt_id = "d" + std::to_string(d);
    r.speaker_id = "s";
    r.tokens = {"x"};
    r.duration_s = d;
    durations.push_back(std::move(r));
  }
  auto kept = corpus::filter_duration(durations);
  const bool duration_ok = kept.size() == 4 && kept.front().duration_s == 0.3 &&
                           kept.back().duration_s == 30.0;

  const double lr_peak = autodiff::warmup_lr(2500, 1e-3, 2500);
  const bool warmup_ok = std::abs(lr_peak - 1e-3) <= 1e-12 &&
                         std::abs(autodiff::warmup_lr(625, 1e-3, 2500) - 0.25e-3) <= 1e-12;

  char detail[200];
  std::snprintf(detail, sizeof(detail),
                "severity boundaries %s; 56/19/25 per stratum %s; duration filter %s; "
                "warmup peak |lr-base| %.1e <= 1e-12",
                severity_ok ? "ok" : "bad", split_ok ? "ok" : "bad", duration_ok ? "ok" : "bad",
                std::abs(lr_peak - 1e-3));
  report("A6", severity_ok && split_ok && duration_ok && warmup_ok, detail);
}

// --- A7: tag/WER contract ----------------------------------------------------

void criterion_a7() {
  Rng rng(0xA7);
  const model::Vocabulary vocab =
      model::Vocabulary::build(std::vector<std::string>{"va", "vb", "vc", "vd"});
  bool ok = true;
  for (int trial = 0; trial < 500 && ok; ++trial) {
    const int nr = static_cast<int>(rng.uniform_int(7));
    const int nh = static_cast<int>(rng.uniform_int(7));
    std::vector<int> ref(static_cast<std::size_t>(nr)), hyp(static_cast<std::size_t>(nh));
    for (int& t : ref) t = 5 + static_cast<int>(rng.uniform_int(4));
    for (int& t : hyp) t = 5 + static_cast<int>(rng.uniform_int(4));
    const auto base = eval::wer(ref, hyp, vocab);
    for (model::TagMode mode :
         {model::TagMode::kPrepend, model::TagMode::kAppend, model::TagMode::kBoth}) {
      const bool yr = rng.uniform() < 0.5;
      const bool yh = rng.uniform() < 0.5;
      const auto tagged_ref = model::insert_tags(ref, yr, mode);
      const auto tagged_hyp = model::insert_tags(hyp, yh, mode);
      const auto tagged = eval::wer(tagged_ref, tagged_hyp, vocab);
      ok = ok && tagged.substitutions == base.substitutions &&
           tagged.insertions == base.insertions && tagged.deletions == base.deletions &&
           tagged.ref_words == base.ref_words;

      auto [stripped, tags] = model::strip_tags(tagged_ref);
      ok = ok && stripped == ref;
      const std::size_t expect_tags = mode == model::TagMode::kBoth ? 2 : 1;
      ok = ok && tags.size() == expect_tags;
      for (int t : tags) {
        ok = ok && t == (yr ? model::Vocabulary::kAphTagId : model::Vocabulary::kNonAphTagId);
      }
    }
  }
  report("A7", ok,
         ok ? "500 random pairs: WER invariant under tag insertion; strip(insert(x)) == x for "
              "all three modes"
            : "property violated");
}

// --- A8: checkpoint averaging and serialization -------------------------------

void criterion_a8() {
  Rng rng(0xA8);
  const fs::path dir = fs::temp_directory_path() / "aphasiakit_acceptance_a8";
  fs::remove_all(dir);
  fs::create_directories(dir);

  const autodiff::Shape shape{17, 9};
  std::vector<autodiff::ParamStore> checkpoints;
  std::vector<std::vector<double>> float_values;  // what storage keeps
  for (int k = 0; k < 10; ++k) {
    autodiff::ParamStore store;
    std::vector<double> v(17 * 9);
    for (double& x : v) x = rng.normal();
    store.emplace("w", autodiff::Tensor::from_values(shape, v, true));
    const fs::path p = dir / ("ck" + std::to_string(k) + ".ckpt");
    autodiff::save_checkpoint(store, p);
    checkpoints.push_back(autodiff::load_checkpoint(p));
    std::vector<double> fv(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) fv[i] = static_cast<double>(static_cast<float>(v[i]));
    float_values.push_back(std::move(fv));
  }

  auto averaged = autodiff::average_checkpoints(checkpoints);
  double worst = 0.0;
  auto av = averaged.at("w").values();
  for (std::size_t i = 0; i < av.size(); ++i) {
    double mean = 0.0;
    for (const auto& fv : float_values) mean += fv[i];
    mean /= static_cast<double>(float_values.size());
    worst = std::max(worst, std::abs(av[i] - mean));
  }

  const fs::path p1 = dir / "avg1.ckpt";
  const fs::path p2 = dir / "avg2.ckpt";
  autodiff::save_checkpoint(averaged, p1);
  auto reloaded = autodiff::load_checkpoint(p1);
  autodiff::save_checkpoint(reloaded, p2);
  const bool bit_exact = slurp(p1) == slurp(p2) && !slurp(p1).empty();

  char detail[160];
  std::snprintf(detail, sizeof(detail),
                "k=10 averaging max |err| %.2e <= 1e-7; save/load/save byte-identical %s", worst,
                bit_exact ? "yes" : "no");
  report("A8", worst <= 1e-7 && bit_exact, detail);
}

}  // namespace

int main() {
  criterion_a1();
  criterion_a2();
  criterion_a3();
  criterion_a4();
  criterion_a5();
  criterion_a6();
  criterion_a7();
  criterion_a8();
  if (g_failures > 0) {
    std::printf("%d criterion(s) failed\n", g_failures);
    return 1;
  }
  std::printf("all acceptance criteria passed\n");
  return 0;
}
