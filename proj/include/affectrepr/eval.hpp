// affectrepr/eval.hpp

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

// Emotion classification on top of pretrained encoders, and the
// leave-one-session-out evaluation loop: per-fold normalization statistics,
// unsupervised pretraining, supervised fine-tuning with early stopping on the
// validation speaker, and confusion-matrix metrics on the test speaker.

#ifndef AFFECTREPR_EVAL_HPP
#define AFFECTREPR_EVAL_HPP

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "affectrepr/autoencoder.hpp"
#include "affectrepr/corpus.hpp"
#include "affectrepr/dsp.hpp"
#include "affectrepr/nn.hpp"

namespace affect::eval {

// ---------------------------------------------------------------------------
// Classifier

// Pretrained encoder layers plus a freshly initialized softmax head.
nn::Mlp<float> init_classifier(const ae::Pretrained& model, int num_classes,
                               std::uint64_t seed);

// Utterance decision: per-frame posteriors summed over frames (double
// accumulation, fixed loop order), argmax with lowest-index tie break.
int predict_utterance(const nn::Mlp<float>& net, const Matrix<float>& frames);

// Per-class posterior sums behind predict_utterance, exposed for inspection.
std::array<double, corpus::kNumClasses> posterior_sums(const nn::Mlp<float>& net,
                                               const Matrix<float>& frames);

struct FinetuneConfig {
  nn::SgdConfig sgd;  // sgd.epochs is the epoch cap
  int patience = 3;   // epochs without validation improvement before stopping
};

inline void validate(const FinetuneConfig& cfg) {
  nn::validate(cfg.sgd);
  if (cfg.patience < 1) throw std::invalid_argument("FinetuneConfig: patience");
}

struct FinetuneResult {
  nn::Mlp<float> net;  // parameters from the best validation epoch
  std::vector<double> train_ce;             // per epoch, frame mean
  std::vector<double> validation_accuracy;  // per epoch, utterance level
  int best_epoch = -1;                      // index into the curves
};

// Frame-level cross-entropy training; every frame of a labeled utterance
// carries the utterance label. Stops once validation utterance accuracy has
// not improved for `patience` consecutive epochs and restores the best net.
FinetuneResult finetune_classifier(
    nn::Mlp<float> net, const Matrix<float>& frames,
    const std::vector<int>& frame_labels,
    const std::vector<std::pair<Matrix<float>, int>>& validation,
    const FinetuneConfig& cfg);

// ---------------------------------------------------------------------------
// Metrics

using Confusion = std::array<std::array<int, corpus::kNumClasses>, corpus::kNumClasses>;

struct Metrics {
  double wa = 0.0;  // weighted accuracy: correct / total
  double ua = 0.0;  // unweighted accuracy: mean recall over non-empty classes
  std::array<double, corpus::kNumClasses> recall{};
  std::array<bool, corpus::kNumClasses> has_class{};
};

Metrics compute_metrics(const Confusion& confusion);

// ---------------------------------------------------------------------------
// Leave-one-session-out experiment

struct LosoUtterance {
  std::string id;
  int session_id = 0;
  std::string speaker_id;
  int class_index = -1;  // -1: no majority label; pretraining only
  FeatureMatrix frames;  // raw (un-normalized) features, frames x dim
};

struct LosoConfig {
  ae::ArchMode mode = ae::ArchMode::kTied;
  std::vector<int> layer_sizes;  // [0] must equal the feature dimension
  ae::CorruptionConfig corruption;
  nn::SgdConfig pretrain;
  FinetuneConfig finetune;
  std::uint64_t seed = 0;
  int num_threads = 0;  // 0: AFFECT_REPR_THREADS, else hardware
};

struct FoldResult {
  int held_out_session = 0;
  std::string validation_speaker, test_speaker;
  Confusion confusion{};
  Metrics metrics;
  // Everything the fold's training produced, so experiments can audit that
  // held-out data never influenced it.
  dsp::NormStats norm;
  ae::Pretrained pretrained;
  nn::Mlp<float> classifier;  // parameters from the best validation epoch
  std::vector<double> pretrain_final_sse;  // last-epoch mean SSE per layer
  double best_validation_accuracy = 0.0;
  int finetune_epochs = 0;
  int best_epoch = -1;
};

struct LosoReport {
  std::vector<FoldResult> folds;
  Confusion total_confusion{};
  Metrics pooled;      // over the summed confusion
  double macro_wa = 0.0;  // mean of per-fold metrics
  double macro_ua = 0.0;
};

// Number of worker threads a run will use (explicit > env > hardware).
int resolve_thread_count(int requested);

FoldResult run_fold(const std::vector<LosoUtterance>& data, const corpus::Fold& fold,
                    const LosoConfig& cfg, int fold_index);

LosoReport run_loso(const std::vector<LosoUtterance>& data,
                    const corpus::FoldPlan& plan, const LosoConfig& cfg);

// Plain-text and CSV renderings of a report.
std::string format_report(const LosoReport& report);
std::string format_report_csv(const LosoReport& report);
void write_report(const std::string& txt_path, const std::string& csv_path,
                  const LosoReport& report);

}  // namespace affect::eval

#endif  // AFFECTREPR_EVAL_HPP
