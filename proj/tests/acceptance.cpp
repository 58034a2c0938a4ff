// tests/acceptance.cpp

// Copyright 2026  The affectrepr authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

// Release gate: ten numbered correctness criteria, one PASS/FAIL line each.
// Every criterion runs even if an earlier one fails; the process exits
// nonzero when any line is FAIL.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "affectrepr/autoencoder.hpp"
#include "affectrepr/blstm.hpp"
#include "affectrepr/config.hpp"
#include "affectrepr/corpus.hpp"
#include "affectrepr/dsp.hpp"
#include "affectrepr/eval.hpp"
#include "affectrepr/nn.hpp"
#include "affectrepr/pipeline.hpp"
#include "affectrepr/rng.hpp"
#include "affectrepr/types.hpp"
#include "affectrepr/wav.hpp"

namespace fs = std::filesystem;
using namespace affect;

namespace {

// Collects expectations for one criterion; the first failures become the
// printed reason.
class Check {
 public:
  Check() : t0_(std::chrono::steady_clock::now()) {}

  void expect(bool ok, const std::string& what) {
    if (!ok) failures_.push_back(what);
  }
  void note(const std::string& text) {
    if (!detail_.empty()) detail_ += "; ";
    detail_ += text;
  }
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_)
        .count();
  }
  bool ok() const { return failures_.empty(); }
  std::string message() const {
    if (failures_.empty()) return detail_;
    std::string out;
    for (std::size_t i = 0; i < failures_.size() && i < 4; ++i)
      out += (i ? "; " : "") + failures_[i];
    if (failures_.size() > 4)
      out += "; (+" + std::to_string(failures_.size() - 4) + " more)";
    return out;
  }

 private:
  std::chrono::steady_clock::time_point t0_;
  std::vector<std::string> failures_;
  std::string detail_;
};

struct Shared {
  fs::path scratch;
  std::size_t corpus20_size = 0;                 // utterances in the training corpus
  std::vector<config::RunConfig> embed_cfgs;     // presets with saved models
};

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

Matrix<double> random_matrix(Eigen::Index rows, Eigen::Index cols, double scale,
                             Rng& rng) {
  Matrix<double> m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i)
      m(i, j) = rng.uniform(-scale, scale);
  return m;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

// ---------------------------------------------------------------------------
// 1. Gradient correctness across every trainable architecture.

void criterion_gradients(Check& check, Shared&) {
  Rng rng(101);
  const Matrix<double> clean = random_matrix(6, 5, 1.0, rng);
  Matrix<double> noisy = clean;
  Rng noise(55);
  for (Eigen::Index j = 0; j < noisy.cols(); ++j)
    ae::corrupt_inplace<double>(noisy.col(j), 0.3, noise);

  Rng init(7);
  ae::DaeLayer<double> untied;
  untied.tied = false;
  untied.enc = nn::init_dense<double>(3, 6, nn::Activation::kTanh, init);
  untied.dec_W = nn::init_dense<double>(6, 3, nn::Activation::kLinear, init).W;
  untied.dec_b = random_matrix(6, 1, 0.1, init).col(0);
  const double err_untied = ae::grad_check_dae(untied, noisy, clean, 1e-5);
  check.expect(err_untied < 1e-4, "untied DAE " + fmt("%.2e", err_untied));

  ae::DaeLayer<double> tied;
  tied.tied = true;
  tied.enc = nn::init_dense<double>(3, 6, nn::Activation::kTanh, init);
  tied.dec_b = random_matrix(6, 1, 0.1, init).col(0);
  const double err_tied = ae::grad_check_dae(tied, noisy, clean, 1e-5);
  check.expect(err_tied < 1e-4, "tied DAE " + fmt("%.2e", err_tied));

  nn::Mlp<double> deep;
  deep.push_back(nn::init_dense<double>(4, 6, nn::Activation::kTanh, init));
  deep.push_back(nn::init_dense<double>(2, 4, nn::Activation::kTanh, init));
  deep.push_back(nn::init_dense<double>(4, 2, nn::Activation::kTanh, init));
  deep.push_back(nn::init_dense<double>(6, 4, nn::Activation::kLinear, init));
  const double err_deep =
      nn::grad_check(deep, noisy, clean, nn::Loss::kSse, 1e-5);
  check.expect(err_deep < 1e-4, "deep AE 6-4-2 " + fmt("%.2e", err_deep));

  nn::Mlp<double> mlp;
  mlp.push_back(nn::init_dense<double>(4, 5, nn::Activation::kTanh, init));
  mlp.push_back(nn::init_dense<double>(3, 4, nn::Activation::kSoftmax, init));
  const Matrix<double> inputs = random_matrix(5, 7, 1.5, rng);
  Matrix<double> targets = Matrix<double>::Zero(3, 7);
  for (Eigen::Index j = 0; j < 7; ++j) targets(j % 3, j) = 1.0;
  const double err_mlp =
      nn::grad_check(mlp, inputs, targets, nn::Loss::kCrossEntropy, 1e-5);
  check.expect(err_mlp < 1e-4, "MLP softmax CE " + fmt("%.2e", err_mlp));

  rnn::BlstmTrainConfig bcfg;
  bcfg.hidden_dim = 2;
  bcfg.init_range = 0.4;
  bcfg.seed = 13;
  rnn::BlstmAe<double> blstm = rnn::init_blstm<double>(3, bcfg);
  Rng bias_rng(17);
  for (Vector<double>* v : {&blstm.fwd.bi, &blstm.fwd.bo, &blstm.fwd.bg,
                            &blstm.bwd.bi, &blstm.bwd.bo, &blstm.bwd.bg,
                            &blstm.head_b})
    for (Eigen::Index i = 0; i < v->size(); ++i)
      (*v)(i) = bias_rng.uniform(-0.3, 0.3);
  const Matrix<double> sequence = random_matrix(3, 5, 1.0, rng);
  const double err_blstm = rnn::grad_check_blstm(blstm, sequence, 1e-5);
  check.expect(err_blstm < 1e-4, "BLSTM D=3 H=2 T=5 " + fmt("%.2e", err_blstm));

  check.expect(check.seconds() < 60.0, "runtime under 60 s");
  check.note("worst " + fmt("%.2e", std::max({err_untied, err_tied, err_deep,
                                              err_mlp, err_blstm})));
}

// ---------------------------------------------------------------------------
// 2. The tied decoder equals the encoder transpose after every SGD step.

void criterion_tied_invariant(Check& check, Shared&) {
  Rng rng(33);
  Matrix<float> data(16, 120);
  for (Eigen::Index j = 0; j < data.cols(); ++j)
    for (Eigen::Index i = 0; i < data.rows(); ++i)
      data(i, j) = static_cast<float>(rng.uniform(-1.0, 1.0));

  ae::DaeLayer<float> layer;
  layer.tied = true;
  Rng init(5);
  layer.enc = nn::init_dense<float>(8, 16, nn::Activation::kTanh, init);
  layer.dec_b = Vector<float>::Zero(16);

  nn::SgdConfig sgd;
  sgd.learning_rate = 0.01;
  sgd.weight_decay = 1e-4;
  ae::Corruptor corruptor({0.2, 77});
  Matrix<float> clean(16, 20), noisy(16, 20);
  int violations = 0;
  for (int step = 0; step < 100; ++step) {
    for (Eigen::Index i = 0; i < 20; ++i) {
      clean.col(i) = data.col((step * 20 + i) % data.cols());
      noisy.col(i) = clean.col(i);
      corruptor.apply<float>(noisy.col(i));
    }
    const auto grads = ae::dae_backprop<float>(layer, noisy, clean);
    nn::sgd_step(layer.enc, grads.enc_W, grads.enc_b, sgd);
    layer.dec_b -= static_cast<float>(sgd.learning_rate) * grads.dec_b;
    if (!(layer.decoder_weight() == Matrix<float>(layer.enc.W.transpose())))
      ++violations;
  }
  check.expect(violations == 0,
               std::to_string(violations) + " of 100 steps broke the tie");
  check.note("100 steps, decoder == encoder transpose bitwise");
}

// ---------------------------------------------------------------------------
// 3. Masking-corruption statistics.

void criterion_corruption(Check& check, Shared&) {
  ae::Corruptor corruptor({0.2, 12345});
  std::uint64_t coords = 0, zeros = 0;
  for (int call = 0; call < 600; ++call) {
    Vector<float> v = Vector<float>::Ones(1000);
    corruptor.apply<float>(v);
    coords += 1000;
    zeros += static_cast<std::uint64_t>((v.array() == 0.0f).count());
  }
  for (int call = 0; call < 500; ++call) {
    Vector<float> v = Vector<float>::Ones(997);
    corruptor.apply<float>(v);
    coords += 997;
    zeros += static_cast<std::uint64_t>((v.array() == 0.0f).count());
  }
  const double rate =
      static_cast<double>(zeros) / static_cast<double>(coords);
  check.expect(coords >= 1000000, "at least 1e6 coordinates");
  check.expect(rate >= 0.195 && rate <= 0.205,
               "drop rate " + fmt("%.5f", rate) + " outside [0.195, 0.205]");

  Rng rng(9);
  Vector<float> x(64);
  for (Eigen::Index i = 0; i < x.size(); ++i)
    x(i) = static_cast<float>(rng.uniform(-2.0, 2.0));
  const Vector<float> before = x;
  ae::Corruptor identity({0.0, 1});
  identity.apply<float>(x);
  check.expect(x == before, "fraction 0 must be the identity");
  check.note(std::to_string(coords) + " coordinates, rate " + fmt("%.5f", rate));
}

// ---------------------------------------------------------------------------
// 4. Preset dimension contracts.

void criterion_dimensions(Check& check, Shared&) {
  const std::string preset_dir = AFFECTREPR_PRESET_DIR;
  const auto probe = [&](const char* name, int dim,
                         const std::vector<int>& arch) {
    const config::RunConfig cfg =
        config::parse_run_config(preset_dir + "/" + name + ".cfg");
    config::validate(cfg);
    check.expect(static_cast<int>(dim_of(config::feature_kind(cfg))) == dim,
                 std::string(name) + ": feature dim");
    check.expect(cfg.arch == arch, std::string(name) + ": architecture");
  };
  probe("TIED-128-5", 640, {640, 320, 160, 80});
  probe("DEEP-MEL-5", 200, {200, 100, 50});
  probe("TIED-513-1", 513, {513, 256, 128, 64});
  check.expect(corpus::kNumClasses == 4, "4 classifier targets");
  check.note("640 / 200 / 513 feature dims, 4-way heads");
}

// ---------------------------------------------------------------------------
// 5. Training losses fall under each preset's published schedule.

void criterion_training(Check& check, Shared& shared) {
  corpus::SyntheticSpec spec;
  spec.utterances_per_class = 5;
  spec.seed = 7;
  const fs::path corpus_dir = shared.scratch / "corpus20";
  corpus::gen_synthetic_corpus(spec, corpus_dir.string());
  const auto records =
      corpus::load_manifest((corpus_dir / "manifest.tsv").string());
  shared.corpus20_size = records.size();

  for (const char* name : {"TIED-128-5", "DEEP-MEL-5", "TIED-513-1"}) {
    config::RunConfig cfg = config::parse_run_config(
        std::string(AFFECTREPR_PRESET_DIR) + "/" + name + ".cfg");
    cfg.corpus_dir = corpus_dir.string();
    cfg.work_dir = (shared.scratch / (std::string("work_") + name)).string();
    config::validate(cfg);
    pipeline::run_featurize(cfg);
    const auto data = pipeline::load_feature_set(cfg, records);

    std::vector<FeatureMatrix> all;
    all.reserve(data.size());
    Eigen::Index total = 0;
    for (const auto& u : data) {
      all.push_back(u.frames);
      total += u.frames.rows();
    }
    check.expect(total >= 2000,
                 std::string(name) + ": corpus has " + std::to_string(total) +
                     " frames, need 2000");
    const dsp::NormStats norm = dsp::fit_norm_stats(all);

    Matrix<float> cols(cfg.arch.front(), total);
    Eigen::Index at = 0;
    for (const auto& u : data) {
      const FeatureMatrix f = dsp::apply_norm(u.frames, norm);
      cols.middleCols(at, f.rows()) = f.transpose();
      at += f.rows();
    }

    ae::StackConfig stack_cfg;
    stack_cfg.layer_sizes = cfg.arch;
    stack_cfg.tied = cfg.mode == ae::ArchMode::kTied;
    stack_cfg.sgd = cfg.pretrain;
    stack_cfg.sgd.seed = mix_seed(cfg.seed, 0x11);
    const ae::CorruptionConfig corruption{cfg.corruption,
                                          mix_seed(cfg.seed, 0x12)};
    const ae::PretrainResult trained =
        ae::train_pretrained(cols, cfg.mode, stack_cfg, corruption);
    for (std::size_t k = 0; k < trained.epoch_mean_sse.size(); ++k) {
      const auto& curve = trained.epoch_mean_sse[k];
      check.expect(static_cast<int>(curve.size()) == cfg.pretrain.epochs,
                   std::string(name) + ": epoch count");
      check.expect(curve.back() < curve.front(),
                   std::string(name) + " layer " + std::to_string(k + 1) +
                       ": sse " + fmt("%.4f", curve.front()) + " -> " +
                       fmt("%.4f", curve.back()) + " did not fall");
    }

    // Persist the stage artifacts; criterion 10 exports embeddings from them.
    fs::create_directories(cfg.work_dir + "/models");
    FeatureMatrix packed(2, norm.mean.size());
    packed.row(0) = norm.mean.transpose();
    packed.row(1) = norm.stddev.transpose();
    dsp::write_feature_file(config::norm_stats_path(cfg), packed,
                            config::feature_kind(cfg));
    ae::save_pretrained(config::pretrain_model_path(cfg), trained.model);
    {
      std::ofstream desc(config::pretrain_descriptor_path(cfg));
      desc << "mode = " << ae::name_of(cfg.mode) << '\n';
      desc << "arch = ";
      for (std::size_t i = 0; i < cfg.arch.size(); ++i)
        desc << (i ? "," : "") << cfg.arch[i];
      desc << '\n';
      desc << "corruption = " << cfg.corruption << '\n';
      desc << "config = " << config::config_hash_hex(cfg) << '\n';
      desc << "seed = " << cfg.seed << '\n';
    }

    std::vector<Matrix<float>> sequences;
    sequences.reserve(data.size());
    for (const auto& u : data)
      sequences.push_back(Matrix<float>(
          ae::encode_rows(trained.model, dsp::apply_norm(u.frames, norm))
              .transpose()));
    rnn::BlstmTrainConfig rnn_cfg = cfg.recurrent;
    rnn_cfg.seed = mix_seed(cfg.seed, 0x13);
    const auto recurrent = rnn::train_blstm_ae<float>(sequences, rnn_cfg);
    check.expect(static_cast<int>(recurrent.epoch_mean_frame_sse.size()) ==
                     cfg.recurrent.epochs,
                 std::string(name) + ": recurrent epoch count");
    check.expect(recurrent.epoch_mean_frame_sse.back() <
                     recurrent.epoch_mean_frame_sse.front(),
                 std::string(name) + ": recurrent sse " +
                     fmt("%.6f", recurrent.epoch_mean_frame_sse.front()) +
                     " -> " +
                     fmt("%.6f", recurrent.epoch_mean_frame_sse.back()) +
                     " did not fall");
    rnn::save_blstm(config::blstm_model_path(cfg), recurrent.model);
    shared.embed_cfgs.push_back(cfg);

    check.note(std::string(name) + " sse " +
               fmt("%.3f", trained.epoch_mean_sse.front().front()) + "->" +
               fmt("%.3f", trained.epoch_mean_sse.front().back()) + " rnn " +
               fmt("%.4f", recurrent.epoch_mean_frame_sse.front()) + "->" +
               fmt("%.4f", recurrent.epoch_mean_frame_sse.back()));
  }
  check.expect(check.seconds() < 900.0, "runtime under 15 min");
}

// ---------------------------------------------------------------------------
// 6. Confusion-matrix metrics against hand arithmetic.

void criterion_metrics(Check& check, Shared&) {
  struct Case {
    eval::Confusion confusion;
    double wa, ua;
    const char* what;
  };
  const std::vector<Case> cases = {
      {{{{3, 0, 0, 0}, {0, 5, 0, 0}, {0, 0, 2, 0}, {0, 0, 0, 7}}},
       1.0, 1.0, "diagonal"},
      {{{{9, 1, 0, 0}, {5, 5, 0, 0}, {0, 0, 10, 0}, {0, 0, 0, 10}}},
       34.0 / 40.0, (0.9 + 0.5 + 1.0 + 1.0) / 4.0, "imbalanced 0.9/0.5"},
      {{{{0, 5, 0, 0}, {4, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}}},
       0.0, 0.0, "all wrong"},
      {{{{2, 0, 0, 0}, {0, 1, 1, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}}},
       3.0 / 4.0, (1.0 + 0.5) / 2.0, "two classes"},
      {{{{7, 1, 2, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}}},
       0.7, 0.7, "single class"},
      {{{{8, 2, 1, 1}, {1, 6, 2, 1}, {0, 2, 6, 0}, {1, 1, 1, 7}}},
       27.0 / 40.0,
       (8.0 / 12.0 + 6.0 / 10.0 + 6.0 / 8.0 + 7.0 / 10.0) / 4.0, "dense"},
  };
  for (const auto& c : cases) {
    const eval::Metrics m = eval::compute_metrics(c.confusion);
    check.expect(std::abs(m.wa - c.wa) < 1e-12,
                 std::string(c.what) + ": wa " + fmt("%.15f", m.wa) + " want " +
                     fmt("%.15f", c.wa));
    check.expect(std::abs(m.ua - c.ua) < 1e-12,
                 std::string(c.what) + ": ua " + fmt("%.15f", m.ua) + " want " +
                     fmt("%.15f", c.ua));
  }
  check.note(std::to_string(cases.size()) + " matrices within 1e-12");
}

// ---------------------------------------------------------------------------
// 7. Utterance aggregation against a brute-force oracle.

int oracle_predict(const nn::Mlp<float>& net, const Matrix<float>& frames) {
  Matrix<float> hidden = frames;
  for (std::size_t k = 0; k + 1 < net.size(); ++k)
    hidden = nn::dense_forward(net[k], hidden);
  const auto& head = net.back();
  double sums[corpus::kNumClasses] = {};
  for (Eigen::Index t = 0; t < hidden.cols(); ++t) {
    double logits[corpus::kNumClasses];
    for (int k = 0; k < corpus::kNumClasses; ++k) {
      double acc = static_cast<double>(head.b(k));
      for (Eigen::Index j = 0; j < hidden.rows(); ++j)
        acc += static_cast<double>(head.W(k, j)) *
               static_cast<double>(hidden(j, t));
      logits[k] = acc;
    }
    double peak = logits[0];
    for (int k = 1; k < corpus::kNumClasses; ++k)
      peak = std::max(peak, logits[k]);
    double expo[corpus::kNumClasses];
    double total = 0.0;
    for (int k = 0; k < corpus::kNumClasses; ++k) {
      expo[k] = std::exp(logits[k] - peak);
      total += expo[k];
    }
    for (int k = 0; k < corpus::kNumClasses; ++k) sums[k] += expo[k] / total;
  }
  int best = 0;
  for (int k = 1; k < corpus::kNumClasses; ++k)
    if (sums[k] > sums[best]) best = k;
  return best;
}

void criterion_aggregation(Check& check, Shared&) {
  Rng rng(2025);
  nn::Mlp<float> net;
  net.push_back(nn::init_dense<float>(5, 6, nn::Activation::kTanh, rng));
  net.push_back(nn::init_dense<float>(4, 5, nn::Activation::kSoftmax, rng));
  for (auto& layer : net)
    for (Eigen::Index i = 0; i < layer.b.size(); ++i)
      layer.b(i) = static_cast<float>(rng.uniform(-0.5, 0.5));

  int agreements = 0;
  const int trials = 1000;
  for (int trial = 0; trial < trials; ++trial) {
    const Eigen::Index frames =
        1 + static_cast<Eigen::Index>(rng.uniform_int(12));
    Matrix<float> utterance(6, frames);
    for (Eigen::Index j = 0; j < frames; ++j)
      for (Eigen::Index i = 0; i < 6; ++i)
        utterance(i, j) = static_cast<float>(rng.uniform(-2.0, 2.0));
    if (eval::predict_utterance(net, utterance) ==
        oracle_predict(net, utterance))
      ++agreements;
  }
  check.expect(agreements == trials,
               std::to_string(agreements) + "/" + std::to_string(trials) +
                   " agreements, need all");
  check.note(std::to_string(agreements) + "/" + std::to_string(trials) +
             " utterances agree");
}

// ---------------------------------------------------------------------------
// 8. Fold construction and the held-out-data leakage audit.

std::vector<eval::LosoUtterance> featurize_corpus(
    const fs::path& dir, const std::vector<corpus::UtteranceRecord>& records,
    DimKind kind) {
  std::vector<eval::LosoUtterance> out;
  out.reserve(records.size());
  for (const auto& record : records) {
    eval::LosoUtterance u;
    u.id = record.utterance_id;
    u.session_id = record.session_id;
    u.speaker_id = record.speaker_id;
    const auto label = corpus::resolve_label(record);
    if (label.emotion.has_value()) {
      const auto idx = corpus::class_index(*label.emotion);
      u.class_index = idx.has_value() ? *idx : -1;
    }
    u.frames = pipeline::featurize_waveform(
        read_wav((dir / record.audio_path).string()), kind);
    out.push_back(std::move(u));
  }
  return out;
}

void scramble_wav_payload(const fs::path& path, Rng& rng) {
  std::string bytes = slurp(path);
  const auto data_at = bytes.find("data");
  if (data_at == std::string::npos)
    throw std::runtime_error(path.string() + ": no data chunk");
  for (std::size_t i = data_at + 8; i < bytes.size(); ++i)
    bytes[i] = static_cast<char>(rng.uniform_int(256));
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

void criterion_folds(Check& check, Shared& shared) {
  corpus::SyntheticSpec spec;
  spec.utterances_per_class = 3;
  spec.seed = 21;
  const fs::path dir_a = shared.scratch / "leak_a";
  corpus::gen_synthetic_corpus(spec, dir_a.string());
  const auto records =
      corpus::load_manifest((dir_a / "manifest.tsv").string());
  const corpus::FoldPlan plan = corpus::make_loso_folds(records);

  // Disjointness and coverage over the whole plan.
  std::set<int> held_out;
  std::map<int, std::set<std::string>> session_speakers;
  for (const auto& record : records)
    session_speakers[record.session_id].insert(record.speaker_id);
  for (const auto& fold : plan.folds) {
    held_out.insert(fold.held_out_session);
    check.expect(fold.validation_speaker < fold.test_speaker,
                 "validation speaker sorts first");
    check.expect(session_speakers[fold.held_out_session] ==
                     std::set<std::string>{fold.validation_speaker,
                                           fold.test_speaker},
                 "held-out speakers are exactly the session's pair");
    check.expect(fold.train_sessions.count(fold.held_out_session) == 0,
                 "held-out session absent from training");
    std::set<int> expect_train;
    for (int s = 1; s <= 5; ++s)
      if (s != fold.held_out_session) expect_train.insert(s);
    check.expect(fold.train_sessions == expect_train,
                 "training sessions are the complement");
  }
  check.expect(held_out == std::set<int>{1, 2, 3, 4, 5},
               "each session held out exactly once");

  // Scramble the PCM payload of every test-speaker recording and retrain.
  const corpus::Fold& fold = plan.folds[0];
  const fs::path dir_b = shared.scratch / "leak_b";
  fs::remove_all(dir_b);
  fs::copy(dir_a, dir_b, fs::copy_options::recursive);
  Rng scramble_rng(0xBADF00D);
  int scrambled = 0;
  for (const auto& record : records)
    if (record.speaker_id == fold.test_speaker) {
      scramble_wav_payload(dir_b / record.audio_path, scramble_rng);
      ++scrambled;
    }
  check.expect(scrambled > 0, "test speaker has recordings");

  const auto data_a = featurize_corpus(dir_a, records, DimKind::kLogMel40);
  const auto data_b = featurize_corpus(dir_b, records, DimKind::kLogMel40);
  bool test_changed = false, others_unchanged = true;
  for (std::size_t i = 0; i < data_a.size(); ++i) {
    const bool same = data_a[i].frames == data_b[i].frames;
    if (records[i].speaker_id == fold.test_speaker)
      test_changed = test_changed || !same;
    else
      others_unchanged = others_unchanged && same;
  }
  check.expect(test_changed, "scrambling altered the test features");
  check.expect(others_unchanged, "scrambling left other features alone");

  eval::LosoConfig cfg;
  cfg.mode = ae::ArchMode::kTied;
  cfg.layer_sizes = {40, 20, 10};
  cfg.corruption = {0.2, 0};
  cfg.pretrain = {1e-3, 1e-4, 256, 2, 0};
  cfg.finetune = {{0.05, 0.0, 256, 4, 0}, 2};
  cfg.seed = 9;
  cfg.num_threads = 1;
  const eval::FoldResult run_a = eval::run_fold(data_a, fold, cfg, 0);
  const eval::FoldResult run_b = eval::run_fold(data_b, fold, cfg, 0);

  check.expect(run_a.norm.mean == run_b.norm.mean &&
                   run_a.norm.stddev == run_b.norm.stddev,
               "normalization statistics differ");
  check.expect(run_a.pretrain_final_sse == run_b.pretrain_final_sse,
               "pretraining losses differ");
  check.expect(run_a.best_validation_accuracy == run_b.best_validation_accuracy &&
                   run_a.finetune_epochs == run_b.finetune_epochs &&
                   run_a.best_epoch == run_b.best_epoch,
               "fine-tuning trajectory differs");
  bool weights_equal =
      run_a.pretrained.stack.layers.size() == run_b.pretrained.stack.layers.size() &&
      run_a.classifier.size() == run_b.classifier.size();
  if (weights_equal) {
    for (std::size_t k = 0; k < run_a.pretrained.stack.layers.size(); ++k) {
      const auto& la = run_a.pretrained.stack.layers[k];
      const auto& lb = run_b.pretrained.stack.layers[k];
      weights_equal = weights_equal && la.enc.W == lb.enc.W &&
                      la.enc.b == lb.enc.b && la.dec_b == lb.dec_b;
    }
    for (std::size_t k = 0; k < run_a.classifier.size(); ++k)
      weights_equal = weights_equal &&
                      run_a.classifier[k].W == run_b.classifier[k].W &&
                      run_a.classifier[k].b == run_b.classifier[k].b;
  }
  check.expect(weights_equal, "trained weights differ");
  check.note("plan enumerated; " + std::to_string(scrambled) +
             " scrambled recordings left training bit-identical");
}

// ---------------------------------------------------------------------------
// 9. End-to-end LOSO benchmark on the synthetic corpus.

double band_power(const Waveform& w, double lo_hz, double hi_hz) {
  constexpr double kTau = 6.28318530717958647692;
  const std::size_t window =
      std::min<std::size_t>(8192, w.samples.size());
  const std::size_t start = (w.samples.size() - window) / 2;
  const int probes = 24;
  double total = 0.0;
  for (int p = 0; p < probes; ++p) {
    const double hz = lo_hz + (hi_hz - lo_hz) * (p + 0.5) / probes;
    const double omega = kTau * hz / w.sample_rate;
    double re = 0.0, im = 0.0;
    for (std::size_t n = 0; n < window; ++n) {
      const double hann =
          0.5 - 0.5 * std::cos(kTau * static_cast<double>(n) /
                               static_cast<double>(window - 1));
      const double s = hann * static_cast<double>(w.samples[start + n]);
      re += s * std::cos(omega * static_cast<double>(n));
      im -= s * std::sin(omega * static_cast<double>(n));
    }
    total += re * re + im * im;
  }
  return total / probes;
}

void criterion_benchmark(Check& check, Shared& shared) {
  corpus::SyntheticSpec spec;  // 4 x 25 = 100 utterances
  spec.seed = 7;
  const fs::path corpus_dir = shared.scratch / "corpus100";
  corpus::gen_synthetic_corpus(spec, corpus_dir.string());
  const auto records =
      corpus::load_manifest((corpus_dir / "manifest.tsv").string());
  check.expect(records.size() == 100, "100 utterances");

  // Ground-truth attainability: band energies alone classify the corpus.
  eval::Confusion oracle_confusion{};
  for (const auto& record : records) {
    const auto label = corpus::resolve_label(record);
    const int truth = corpus::class_index(label.emotion.value()).value();
    const Waveform w = read_wav((corpus_dir / record.audio_path).string());
    int pick = 0;
    double best = -1.0;
    for (int c = 0; c < corpus::kNumClasses; ++c) {
      const corpus::ClassBand band = corpus::synthetic_class_band(c);
      const double power = band_power(w, band.lo_hz, band.hi_hz);
      if (power > best) {
        best = power;
        pick = c;
      }
    }
    ++oracle_confusion[static_cast<std::size_t>(truth)]
                      [static_cast<std::size_t>(pick)];
  }
  const double oracle_ua = eval::compute_metrics(oracle_confusion).ua;
  check.expect(oracle_ua >= 0.95,
               "band-energy oracle ua " + fmt("%.4f", oracle_ua) + " < 0.95");

  config::RunConfig cfg = config::parse_run_config(
      std::string(AFFECTREPR_PRESET_DIR) + "/TIED-128-5.cfg");
  cfg.corpus_dir = corpus_dir.string();
  cfg.work_dir = (shared.scratch / "work_benchmark").string();
  pipeline::run_featurize(cfg);
  const eval::LosoReport report = pipeline::run_evaluate(cfg);
  check.expect(report.macro_ua >= 0.80,
               "averaged ua " + fmt("%.4f", report.macro_ua) + " < 0.80");
  check.expect(check.seconds() < 1200.0, "runtime under 20 min");
  check.note("oracle ua " + fmt("%.4f", oracle_ua) + ", pipeline ua " +
             fmt("%.4f", report.macro_ua) + " wa " +
             fmt("%.4f", report.macro_wa));
}

// ---------------------------------------------------------------------------
// 10. Corpus-scale disclosure and the embedding-export stand-in.

void criterion_disclosure(Check& check, Shared& shared) {
  const std::string readme =
      slurp(fs::path(AFFECTREPR_SOURCE_DIR) / "README.md");
  for (const char* needle : {"50.39", "48.10", "49.09", "IEMOCAP"})
    check.expect(readme.find(needle) != std::string::npos,
                 std::string("README does not mention ") + needle);

  check.expect(shared.embed_cfgs.size() == 3,
               "trained models for all three presets");
  for (const auto& cfg : shared.embed_cfgs) {
    pipeline::run_embed(cfg);
    std::ifstream in(config::embeddings_path(cfg));
    check.expect(static_cast<bool>(in), cfg.preset + ": embeddings file");
    std::string line;
    std::size_t lines = 0;
    bool well_formed = true;
    while (std::getline(in, line)) {
      ++lines;
      std::stringstream ss(line);
      std::string field;
      std::vector<std::string> fields;
      while (std::getline(ss, field, ',')) fields.push_back(field);
      well_formed = well_formed && fields.size() == 4 + 16 &&
                    !fields[0].empty() && !fields[1].empty();
      if (well_formed)
        for (std::size_t k = 2; k < fields.size(); ++k)
          well_formed = well_formed && std::isfinite(std::stod(fields[k]));
    }
    check.expect(lines == shared.corpus20_size,
                 cfg.preset + ": one record per utterance");
    check.expect(well_formed, cfg.preset + ": records are id, label, "
                                           "activation, valence, 16 dims");
  }
  check.note("disclosure present; 3 presets exported 16-dim records");
}

}  // namespace

int main() {
  Shared shared;
  shared.scratch = fs::temp_directory_path() / "affectrepr_acceptance";
  fs::remove_all(shared.scratch);
  fs::create_directories(shared.scratch);

  struct Gate {
    const char* title;
    std::function<void(Check&, Shared&)> run;
  };
  const std::vector<Gate> gates = {
      {"gradient correctness", criterion_gradients},
      {"tied-weight invariant", criterion_tied_invariant},
      {"corruption statistics", criterion_corruption},
      {"dimension contracts", criterion_dimensions},
      {"training sanity", criterion_training},
      {"metric oracle", criterion_metrics},
      {"aggregation oracle", criterion_aggregation},
      {"fold integrity", criterion_folds},
      {"end-to-end synthetic benchmark", criterion_benchmark},
      {"disclosure and embedding export", criterion_disclosure},
  };

  int failures = 0;
  for (std::size_t i = 0; i < gates.size(); ++i) {
    Check check;
    try {
      gates[i].run(check, shared);
    } catch (const std::exception& e) {
      check.expect(false, std::string("exception: ") + e.what());
    }
    const bool ok = check.ok();
    failures += ok ? 0 : 1;
    std::printf("criterion %2zu (%s): %s  [%.1f s]  %s\n", i + 1,
                gates[i].title, ok ? "PASS" : "FAIL", check.seconds(),
                check.message().c_str());
    std::fflush(stdout);
  }
  std::printf("acceptance: %zu/%zu criteria passed\n", gates.size() - failures,
              gates.size());
  return failures == 0 ? 0 : 1;
}
