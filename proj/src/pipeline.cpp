// src/pipeline.cpp

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

#include "affectrepr/pipeline.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "affectrepr/blstm.hpp"
#include "affectrepr/dsp.hpp"

namespace affect::pipeline {

namespace fs = std::filesystem;

namespace {

corpus::ResolvedLabel label_of(const corpus::UtteranceRecord& record) {
  return corpus::resolve_label(record);
}

int class_of(const corpus::UtteranceRecord& record) {
  const auto label = label_of(record);
  if (!label.emotion.has_value()) return -1;
  const auto idx = corpus::class_index(*label.emotion);
  return idx.has_value() ? *idx : -1;
}

std::vector<corpus::UtteranceRecord> load_records(
    const config::RunConfig& cfg) {
  return corpus::load_manifest(cfg.corpus_dir + "/manifest.tsv");
}

// Normalization statistics travel as a 2-row feature file: mean then stddev.
void save_norm(const config::RunConfig& cfg, const dsp::NormStats& stats) {
  FeatureMatrix packed(2, stats.mean.size());
  packed.row(0) = stats.mean.transpose();
  packed.row(1) = stats.stddev.transpose();
  dsp::write_feature_file(config::norm_stats_path(cfg), packed,
                          config::feature_kind(cfg));
}

dsp::NormStats load_norm(const config::RunConfig& cfg) {
  const auto [packed, kind] =
      dsp::read_feature_file(config::norm_stats_path(cfg));
  if (kind != config::feature_kind(cfg) || packed.rows() != 2)
    throw std::runtime_error("stored normalization does not match this config");
  dsp::NormStats stats;
  stats.mean = packed.row(0).transpose();
  stats.stddev = packed.row(1).transpose();
  return stats;
}

void write_descriptor(const config::RunConfig& cfg) {
  std::ofstream out(config::pretrain_descriptor_path(cfg));
  if (!out)
    throw std::runtime_error("cannot write " +
                             config::pretrain_descriptor_path(cfg));
  out << "mode = " << ae::name_of(cfg.mode) << '\n';
  out << "arch = ";
  for (std::size_t i = 0; i < cfg.arch.size(); ++i)
    out << (i ? "," : "") << cfg.arch[i];
  out << '\n';
  out << "corruption = " << cfg.corruption << '\n';
  out << "config = " << config::config_hash_hex(cfg) << '\n';
  out << "seed = " << cfg.seed << '\n';
}

// The descriptor pins the model file to the config that produced it.
void check_descriptor(const config::RunConfig& cfg) {
  const std::string path = config::pretrain_descriptor_path(cfg);
  std::ifstream in(path);
  if (!in) throw MissingArtifactError("missing model descriptor: " + path);
  std::string line;
  while (std::getline(in, line)) {
    const std::string want = "config = " + config::config_hash_hex(cfg);
    if (line.rfind("config = ", 0) == 0) {
      if (line != want)
        throw std::runtime_error(path +
                                 ": model was produced by a different config");
      return;
    }
  }
  throw std::runtime_error(path + ": no config line");
}

ae::Pretrained load_pretrained_checked(const config::RunConfig& cfg) {
  check_descriptor(cfg);
  return ae::load_pretrained(config::pretrain_model_path(cfg), cfg.mode,
                             static_cast<int>(cfg.arch.size()) - 1);
}

// Per-utterance bottleneck activation sequences (columns = frames).
std::vector<Matrix<float>> bottleneck_sequences(
    const std::vector<eval::LosoUtterance>& data, const dsp::NormStats& norm,
    const ae::Pretrained& model) {
  std::vector<Matrix<float>> out;
  out.reserve(data.size());
  for (const auto& u : data)
    out.push_back(
        ae::encode_rows(model, dsp::apply_norm(u.frames, norm)).transpose());
  return out;
}

}  // namespace

FeatureMatrix featurize_waveform(const Waveform& w, DimKind kind) {
  const RowMatrix<float> frames = dsp::frame_signal(w);
  switch (kind) {
    case DimKind::kFft513:
      return dsp::magnitude_spectrogram(frames, 513);
    case DimKind::kFft128:
      return dsp::magnitude_spectrogram(frames, 128);
    case DimKind::kLogMel40:
      return dsp::logmel_spectrogram(frames);
    case DimKind::kCtx5Fft128:
      return dsp::build_context_windows(dsp::magnitude_spectrogram(frames, 128),
                                        2);
    case DimKind::kCtx5LogMel40:
      return dsp::build_context_windows(dsp::logmel_spectrogram(frames), 2);
  }
  throw std::invalid_argument("featurize_waveform: unknown dimension kind");
}

std::vector<eval::LosoUtterance> load_feature_set(
    const config::RunConfig& cfg,
    const std::vector<corpus::UtteranceRecord>& records) {
  const DimKind want = config::feature_kind(cfg);
  std::vector<eval::LosoUtterance> out;
  out.reserve(records.size());
  for (const auto& record : records) {
    const std::string path = config::feature_path(cfg, record.utterance_id);
    auto [frames, kind] = dsp::read_feature_file(path);
    if (kind != want)
      throw std::runtime_error(path + ": holds " + name_of(kind) +
                               " features, config wants " + name_of(want));
    eval::LosoUtterance u;
    u.id = record.utterance_id;
    u.session_id = record.session_id;
    u.speaker_id = record.speaker_id;
    u.class_index = class_of(record);
    u.frames = std::move(frames);
    out.push_back(std::move(u));
  }
  return out;
}

void run_featurize(const config::RunConfig& cfg) {
  config::validate(cfg);
  const auto records = load_records(cfg);
  const DimKind kind = config::feature_kind(cfg);
  fs::create_directories(cfg.work_dir + "/features");
  for (const auto& record : records) {
    const Waveform w = read_wav(cfg.corpus_dir + "/" + record.audio_path);
    dsp::write_feature_file(config::feature_path(cfg, record.utterance_id),
                            featurize_waveform(w, kind), kind);
  }
  config::append_run_log(cfg, "featurize");
  std::cout << "featurize: " << records.size() << " utterances ("
            << name_of(kind) << ") -> " << cfg.work_dir << "/features\n";
}

void run_pretrain(const config::RunConfig& cfg) {
  config::validate(cfg);
  const auto records = load_records(cfg);
  const auto data = load_feature_set(cfg, records);
  fs::create_directories(cfg.work_dir + "/models");

  std::vector<FeatureMatrix> all;
  all.reserve(data.size());
  for (const auto& u : data) all.push_back(u.frames);
  const dsp::NormStats norm = dsp::fit_norm_stats(all);
  save_norm(cfg, norm);

  Eigen::Index total = 0;
  for (const auto& u : data) total += u.frames.rows();
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
  ae::CorruptionConfig corruption{cfg.corruption, mix_seed(cfg.seed, 0x12)};
  const ae::PretrainResult trained =
      ae::train_pretrained(cols, cfg.mode, stack_cfg, corruption);
  ae::save_pretrained(config::pretrain_model_path(cfg), trained.model);
  write_descriptor(cfg);
  config::append_run_log(cfg, "pretrain");

  std::cout << "pretrain: " << total << " frames, mode " << ae::name_of(cfg.mode);
  for (const auto& curve : trained.epoch_mean_sse) {
    std::printf(", sse %.4f -> %.4f", curve.front(), curve.back());
  }
  std::cout << '\n';
}

void run_train_rnn(const config::RunConfig& cfg) {
  config::validate(cfg);
  const auto records = load_records(cfg);
  const auto data = load_feature_set(cfg, records);
  const dsp::NormStats norm = load_norm(cfg);
  const ae::Pretrained model = load_pretrained_checked(cfg);
  const auto sequences = bottleneck_sequences(data, norm, model);

  rnn::BlstmTrainConfig rnn_cfg = cfg.recurrent;
  rnn_cfg.seed = mix_seed(cfg.seed, 0x13);
  const auto trained = rnn::train_blstm_ae<float>(sequences, rnn_cfg);
  rnn::save_blstm(config::blstm_model_path(cfg), trained.model);
  config::append_run_log(cfg, "train-rnn");

  std::printf("train-rnn: %zu utterances, frame sse %.6f -> %.6f\n",
              sequences.size(), trained.epoch_mean_frame_sse.front(),
              trained.epoch_mean_frame_sse.back());
}

void run_finetune(const config::RunConfig& cfg, int held_out_session) {
  config::validate(cfg);
  const auto records = load_records(cfg);
  const auto data = load_feature_set(cfg, records);
  const dsp::NormStats norm = load_norm(cfg);
  const ae::Pretrained model = load_pretrained_checked(cfg);

  const corpus::FoldPlan plan = corpus::make_loso_folds(records);
  const corpus::Fold* fold = nullptr;
  for (const auto& f : plan.folds)
    if (f.held_out_session == held_out_session) fold = &f;
  if (fold == nullptr)
    throw std::invalid_argument("finetune: no session " +
                                std::to_string(held_out_session));

  Eigen::Index labeled = 0;
  for (const auto& u : data)
    if (u.session_id != held_out_session && u.class_index >= 0)
      labeled += u.frames.rows();
  if (labeled == 0) throw std::runtime_error("finetune: no labeled frames");
  Matrix<float> cols(cfg.arch.front(), labeled);
  std::vector<int> labels(static_cast<std::size_t>(labeled));
  Eigen::Index at = 0;
  std::vector<std::pair<Matrix<float>, int>> validation;
  for (const auto& u : data) {
    if (u.class_index < 0) continue;
    if (u.session_id == held_out_session) {
      if (u.speaker_id == fold->validation_speaker)
        validation.emplace_back(
            Matrix<float>(dsp::apply_norm(u.frames, norm).transpose()),
            u.class_index);
      continue;
    }
    const FeatureMatrix f = dsp::apply_norm(u.frames, norm);
    cols.middleCols(at, f.rows()) = f.transpose();
    std::fill_n(labels.begin() + at, f.rows(), u.class_index);
    at += f.rows();
  }

  eval::FinetuneConfig ft = cfg.finetune;
  ft.sgd.seed = mix_seed(cfg.seed, 0x15);
  const nn::Mlp<float> initial = eval::init_classifier(
      model, corpus::kNumClasses, mix_seed(cfg.seed, 0x14));
  const eval::FinetuneResult tuned =
      eval::finetune_classifier(initial, cols, labels, validation, ft);
  nn::save_mlp(config::finetune_model_path(cfg), tuned.net);
  config::append_run_log(cfg, "finetune");

  std::printf(
      "finetune: held-out session %d, %d epochs, best epoch %d "
      "(validation accuracy %.4f)\n",
      held_out_session, static_cast<int>(tuned.train_ce.size()),
      tuned.best_epoch + 1,
      tuned.validation_accuracy[static_cast<std::size_t>(tuned.best_epoch)]);
}

eval::LosoReport run_evaluate(const config::RunConfig& cfg) {
  config::validate(cfg);
  const auto records = load_records(cfg);
  const auto data = load_feature_set(cfg, records);
  const corpus::FoldPlan plan = corpus::make_loso_folds(records);

  eval::LosoConfig loso;
  loso.mode = cfg.mode;
  loso.layer_sizes = cfg.arch;
  loso.corruption = ae::CorruptionConfig{cfg.corruption, 0};
  loso.pretrain = cfg.pretrain;
  loso.finetune = cfg.finetune;
  loso.seed = cfg.seed;
  loso.num_threads = cfg.threads;
  const eval::LosoReport report = eval::run_loso(data, plan, loso);
  eval::write_report(config::report_txt_path(cfg),
                     config::report_csv_path(cfg), report);
  config::append_run_log(cfg, "evaluate");

  std::printf("evaluate: macro wa %.4f ua %.4f over %zu folds -> %s\n",
              report.macro_wa, report.macro_ua, report.folds.size(),
              config::report_txt_path(cfg).c_str());
  return report;
}

void run_embed(const config::RunConfig& cfg) {
  config::validate(cfg);
  const auto records = load_records(cfg);
  const auto data = load_feature_set(cfg, records);
  const dsp::NormStats norm = load_norm(cfg);
  const ae::Pretrained model = load_pretrained_checked(cfg);
  const rnn::BlstmAe<float> blstm =
      rnn::load_blstm(config::blstm_model_path(cfg));

  const std::string path = config::embeddings_path(cfg);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Matrix<float> bottleneck =
        ae::encode_rows(model, dsp::apply_norm(data[i].frames, norm))
            .transpose();
    const Vector<float> e = rnn::utterance_embedding(blstm, bottleneck);
    const corpus::ResolvedLabel label = label_of(records[i]);
    out << data[i].id << ','
        << (label.emotion.has_value() ? corpus::emotion_name(*label.emotion)
                                      : "-");
    char buf[32];
    std::snprintf(buf, sizeof buf, ",%.3f,%.3f", label.activation,
                  label.valence);
    out << buf;
    for (Eigen::Index k = 0; k < e.size(); ++k) {
      std::snprintf(buf, sizeof buf, ",%.8g", static_cast<double>(e(k)));
      out << buf;
    }
    out << '\n';
  }
  config::append_run_log(cfg, "embed");
  std::cout << "embed: " << data.size() << " utterances, "
            << 2 * cfg.recurrent.hidden_dim << "-dim -> " << path << '\n';
}

}  // namespace affect::pipeline
