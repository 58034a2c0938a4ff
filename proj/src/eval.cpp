// src/eval.cpp

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

#include "affectrepr/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

namespace affect::eval {

namespace {

constexpr int kC = corpus::kNumClasses;

const char* class_name(int k) {
  return corpus::emotion_name(static_cast<corpus::Emotion>(k));
}

}  // namespace

nn::Mlp<float> init_classifier(const ae::Pretrained& model, int num_classes,
                               std::uint64_t seed) {
  if (num_classes < 2)
    throw std::invalid_argument("init_classifier: need at least two classes");
  nn::Mlp<float> net = ae::encoder_layers(model);
  Rng rng(mix_seed(seed, 0x4EAD));
  net.push_back(nn::init_dense<float>(num_classes, model.bottleneck_dim(),
                                      nn::Activation::kSoftmax, rng));
  return net;
}

std::array<double, kC> posterior_sums(const nn::Mlp<float>& net,
                                      const Matrix<float>& frames) {
  if (net.empty()) throw std::invalid_argument("posterior_sums: empty network");
  if (net.back().out_dim() != kC)
    throw std::invalid_argument("posterior_sums: head is not 4-way");
  if (frames.cols() == 0)
    throw std::invalid_argument("posterior_sums: no frames");
  Matrix<float> hidden = frames;
  for (std::size_t k = 0; k + 1 < net.size(); ++k)
    hidden = dense_forward(net[k], hidden);

  // Head logits, softmax, and the per-class sums all run in double with a
  // fixed loop order so the decision rule is reproducible to the last bit.
  const auto& head = net.back();
  std::array<double, kC> sums{};
  for (Eigen::Index t = 0; t < hidden.cols(); ++t) {
    double logits[kC];
    for (int k = 0; k < kC; ++k) {
      double acc = static_cast<double>(head.b(k));
      for (Eigen::Index j = 0; j < hidden.rows(); ++j)
        acc += static_cast<double>(head.W(k, j)) *
               static_cast<double>(hidden(j, t));
      logits[k] = acc;
    }
    double peak = logits[0];
    for (int k = 1; k < kC; ++k) peak = std::max(peak, logits[k]);
    double norm = 0.0;
    for (int k = 0; k < kC; ++k) norm += std::exp(logits[k] - peak);
    for (int k = 0; k < kC; ++k) sums[k] += std::exp(logits[k] - peak) / norm;
  }
  return sums;
}

int predict_utterance(const nn::Mlp<float>& net, const Matrix<float>& frames) {
  const auto sums = posterior_sums(net, frames);
  int best = 0;
  for (int k = 1; k < kC; ++k)
    if (sums[k] > sums[best]) best = k;  // ties keep the lowest index
  return best;
}

FinetuneResult finetune_classifier(
    nn::Mlp<float> net, const Matrix<float>& frames,
    const std::vector<int>& frame_labels,
    const std::vector<std::pair<Matrix<float>, int>>& validation,
    const FinetuneConfig& cfg) {
  validate(cfg);
  const Eigen::Index n = frames.cols();
  if (n == 0) throw std::invalid_argument("finetune_classifier: no frames");
  if (static_cast<Eigen::Index>(frame_labels.size()) != n)
    throw std::invalid_argument("finetune_classifier: label count mismatch");
  for (const int label : frame_labels)
    if (label < 0 || label >= kC)
      throw std::invalid_argument("finetune_classifier: label out of range");
  if (validation.empty())
    throw std::invalid_argument("finetune_classifier: empty validation set");
  if (net.back().act != nn::Activation::kSoftmax)
    throw std::invalid_argument("finetune_classifier: head must be softmax");

  const auto validation_accuracy = [&]() {
    int correct = 0;
    for (const auto& [utt, label] : validation)
      if (predict_utterance(net, utt) == label) ++correct;
    return static_cast<double>(correct) / static_cast<double>(validation.size());
  };

  FinetuneResult result;
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  Rng order_rng(mix_seed(cfg.sgd.seed, 0x0DDE));
  const Eigen::Index batch = std::min<Eigen::Index>(cfg.sgd.batch_size, n);
  Matrix<float> X(frames.rows(), batch);
  Matrix<float> T(kC, batch);
  double best_acc = -1.0;
  int stale_epochs = 0;
  for (int epoch = 0; epoch < cfg.sgd.epochs; ++epoch) {
    order_rng.shuffle(order);
    double ce_total = 0.0;
    for (Eigen::Index start = 0; start < n; start += batch) {
      const Eigen::Index b = std::min(batch, n - start);
      T.setZero();
      for (Eigen::Index i = 0; i < b; ++i) {
        const Eigen::Index src = order[static_cast<std::size_t>(start + i)];
        X.col(i) = frames.col(src);
        T(frame_labels[static_cast<std::size_t>(src)], i) = 1.0f;
      }
      double loss = 0.0;
      const auto grads = nn::backprop<float>(net, X.leftCols(b), T.leftCols(b),
                                             nn::Loss::kCrossEntropy, &loss);
      if (!std::isfinite(loss))
        throw NumericError("finetune_classifier: non-finite loss");
      ce_total += loss * static_cast<double>(b);
      nn::sgd_step(net, grads, cfg.sgd);
    }
    result.train_ce.push_back(ce_total / static_cast<double>(n));
    const double acc = validation_accuracy();
    result.validation_accuracy.push_back(acc);
    if (acc > best_acc) {
      best_acc = acc;
      result.best_epoch = epoch;
      result.net = net;
      stale_epochs = 0;
    } else if (++stale_epochs >= cfg.patience) {
      break;
    }
  }
  return result;
}

Metrics compute_metrics(const Confusion& confusion) {
  Metrics m;
  long total = 0, correct = 0;
  double recall_sum = 0.0;
  int classes_present = 0;
  for (int r = 0; r < kC; ++r) {
    long row = 0;
    for (int c = 0; c < kC; ++c) row += confusion[r][c];
    total += row;
    correct += confusion[r][r];
    m.has_class[r] = row > 0;
    if (row > 0) {
      m.recall[r] = static_cast<double>(confusion[r][r]) /
                    static_cast<double>(row);
      recall_sum += m.recall[r];
      ++classes_present;
    }
  }
  if (total == 0)
    throw std::invalid_argument("compute_metrics: empty confusion matrix");
  m.wa = static_cast<double>(correct) / static_cast<double>(total);
  m.ua = recall_sum / static_cast<double>(classes_present);
  return m;
}

int resolve_thread_count(int requested) {
  if (requested > 0) return std::min(requested, 5);
  if (const char* env = std::getenv("AFFECT_REPR_THREADS")) {
    const int parsed = std::atoi(env);
    if (parsed > 0) return std::min(parsed, 5);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return static_cast<int>(std::min<unsigned>(5, std::max<unsigned>(1, hw)));
}

FoldResult run_fold(const std::vector<LosoUtterance>& data,
                    const corpus::Fold& fold, const LosoConfig& cfg,
                    int fold_index) {
  if (cfg.layer_sizes.size() < 2)
    throw std::invalid_argument("run_fold: layer_sizes too short");
  std::vector<std::size_t> train_idx, val_idx, test_idx;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& u = data[i];
    if (u.session_id != fold.held_out_session)
      train_idx.push_back(i);
    else if (u.speaker_id == fold.validation_speaker)
      val_idx.push_back(i);
    else if (u.speaker_id == fold.test_speaker)
      test_idx.push_back(i);
    else
      throw std::invalid_argument("run_fold: utterance " + u.id +
                                  " matches neither held-out speaker");
  }
  if (train_idx.empty() || val_idx.empty() || test_idx.empty())
    throw std::invalid_argument("run_fold: a partition is empty");

  FoldResult result;
  result.held_out_session = fold.held_out_session;
  result.validation_speaker = fold.validation_speaker;
  result.test_speaker = fold.test_speaker;

  // Normalization statistics come from the training sessions only.
  {
    std::vector<FeatureMatrix> train_feats;
    train_feats.reserve(train_idx.size());
    for (const std::size_t i : train_idx) train_feats.push_back(data[i].frames);
    result.norm = dsp::fit_norm_stats(train_feats);
  }

  const Eigen::Index dim = data[train_idx.front()].frames.cols();
  if (dim != cfg.layer_sizes.front())
    throw std::invalid_argument("run_fold: feature dim != layer_sizes[0]");
  Eigen::Index total_frames = 0;
  for (const std::size_t i : train_idx) total_frames += data[i].frames.rows();
  Matrix<float> train_cols(dim, total_frames);
  std::vector<std::pair<Eigen::Index, Eigen::Index>> span(data.size());
  {
    Eigen::Index at = 0;
    for (const std::size_t i : train_idx) {
      const FeatureMatrix f = dsp::apply_norm(data[i].frames, result.norm);
      span[i] = {at, f.rows()};
      train_cols.middleCols(at, f.rows()) = f.transpose();
      at += f.rows();
    }
  }

  const std::uint64_t base = mix_seed(cfg.seed, static_cast<std::uint64_t>(fold_index));
  ae::StackConfig stack_cfg;
  stack_cfg.layer_sizes = cfg.layer_sizes;
  stack_cfg.tied = cfg.mode == ae::ArchMode::kTied;
  stack_cfg.sgd = cfg.pretrain;
  stack_cfg.sgd.seed = mix_seed(base, 2);
  ae::CorruptionConfig corruption = cfg.corruption;
  corruption.seed = mix_seed(base, 1);
  const ae::PretrainResult pretrained =
      ae::train_pretrained(train_cols, cfg.mode, stack_cfg, corruption);
  for (const auto& curve : pretrained.epoch_mean_sse)
    result.pretrain_final_sse.push_back(curve.back());

  // Labeled training frames, each tagged with its utterance's class.
  Eigen::Index labeled_frames = 0;
  for (const std::size_t i : train_idx)
    if (data[i].class_index >= 0) labeled_frames += data[i].frames.rows();
  if (labeled_frames == 0)
    throw std::invalid_argument("run_fold: no labeled training utterances");
  Matrix<float> ft_cols(dim, labeled_frames);
  std::vector<int> ft_labels(static_cast<std::size_t>(labeled_frames));
  {
    Eigen::Index at = 0;
    for (const std::size_t i : train_idx) {
      if (data[i].class_index < 0) continue;
      const auto [offset, rows] = span[i];
      ft_cols.middleCols(at, rows) = train_cols.middleCols(offset, rows);
      std::fill_n(ft_labels.begin() + at, rows, data[i].class_index);
      at += rows;
    }
  }

  std::vector<std::pair<Matrix<float>, int>> validation;
  for (const std::size_t i : val_idx) {
    if (data[i].class_index < 0) continue;
    validation.emplace_back(
        Matrix<float>(dsp::apply_norm(data[i].frames, result.norm).transpose()),
        data[i].class_index);
  }
  if (validation.empty())
    throw std::invalid_argument("run_fold: no labeled validation utterances");

  FinetuneConfig ft_cfg = cfg.finetune;
  ft_cfg.sgd.seed = mix_seed(base, 3);
  const nn::Mlp<float> initial =
      init_classifier(pretrained.model, kC, mix_seed(base, 4));
  const FinetuneResult tuned =
      finetune_classifier(initial, ft_cols, ft_labels, validation, ft_cfg);
  result.best_validation_accuracy =
      tuned.validation_accuracy[static_cast<std::size_t>(tuned.best_epoch)];
  result.finetune_epochs = static_cast<int>(tuned.train_ce.size());
  result.best_epoch = tuned.best_epoch;
  result.pretrained = pretrained.model;
  result.classifier = tuned.net;

  for (const std::size_t i : test_idx) {
    if (data[i].class_index < 0) continue;
    const Matrix<float> cols =
        dsp::apply_norm(data[i].frames, result.norm).transpose();
    const int predicted = predict_utterance(tuned.net, cols);
    ++result.confusion[static_cast<std::size_t>(data[i].class_index)]
                      [static_cast<std::size_t>(predicted)];
  }
  result.metrics = compute_metrics(result.confusion);
  return result;
}

LosoReport run_loso(const std::vector<LosoUtterance>& data,
                    const corpus::FoldPlan& plan, const LosoConfig& cfg) {
  LosoReport report;
  report.folds.resize(plan.folds.size());
  std::vector<std::exception_ptr> errors(plan.folds.size());
  const int workers =
      std::min<int>(resolve_thread_count(cfg.num_threads),
                    static_cast<int>(plan.folds.size()));
  std::atomic<std::size_t> next{0};
  const auto worker = [&]() {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= plan.folds.size()) return;
      try {
        report.folds[k] =
            run_fold(data, plan.folds[k], cfg, static_cast<int>(k));
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  double wa_sum = 0.0, ua_sum = 0.0;
  for (const auto& fold : report.folds) {
    wa_sum += fold.metrics.wa;
    ua_sum += fold.metrics.ua;
    for (int r = 0; r < kC; ++r)
      for (int c = 0; c < kC; ++c)
        report.total_confusion[r][c] += fold.confusion[r][c];
  }
  report.macro_wa = wa_sum / static_cast<double>(report.folds.size());
  report.macro_ua = ua_sum / static_cast<double>(report.folds.size());
  report.pooled = compute_metrics(report.total_confusion);
  return report;
}

namespace {

void format_confusion(std::ostream& out, const Confusion& confusion) {
  out << "  reference \\ hypothesis";
  for (int c = 0; c < kC; ++c) out << ' ' << std::setw(8) << class_name(c);
  out << '\n';
  for (int r = 0; r < kC; ++r) {
    out << "  " << std::setw(21) << class_name(r);
    for (int c = 0; c < kC; ++c) out << ' ' << std::setw(8) << confusion[r][c];
    out << '\n';
  }
}

void format_metrics(std::ostream& out, const Metrics& m) {
  out << "  wa " << std::fixed << std::setprecision(4) << m.wa << "  ua "
      << m.ua << "  recall";
  for (int k = 0; k < kC; ++k) {
    out << ' ' << class_name(k) << '=';
    if (m.has_class[k])
      out << std::setprecision(4) << m.recall[k];
    else
      out << "n/a";
  }
  out << '\n';
}

}  // namespace

std::string format_report(const LosoReport& report) {
  std::ostringstream out;
  for (std::size_t k = 0; k < report.folds.size(); ++k) {
    const auto& fold = report.folds[k];
    out << "fold " << (k + 1) << ": held-out session "
        << fold.held_out_session << ", validation " << fold.validation_speaker
        << ", test " << fold.test_speaker << '\n';
    format_confusion(out, fold.confusion);
    format_metrics(out, fold.metrics);
    out << "  pretrain final sse:";
    for (const double sse : fold.pretrain_final_sse)
      out << ' ' << std::setprecision(6) << sse;
    out << '\n';
    out << "  finetune: " << fold.finetune_epochs << " epochs, best epoch "
        << (fold.best_epoch + 1) << " (validation accuracy "
        << std::setprecision(4) << fold.best_validation_accuracy << ")\n\n";
  }
  out << "macro average: wa " << std::setprecision(4) << report.macro_wa
      << "  ua " << report.macro_ua << '\n';
  out << "pooled over folds:\n";
  format_confusion(out, report.total_confusion);
  format_metrics(out, report.pooled);
  return out.str();
}

std::string format_report_csv(const LosoReport& report) {
  std::ostringstream out;
  out << "fold,held_out_session,validation_speaker,test_speaker,wa,ua";
  for (int k = 0; k < kC; ++k) out << ",recall_" << class_name(k);
  out << '\n';
  out << std::fixed << std::setprecision(6);
  for (std::size_t k = 0; k < report.folds.size(); ++k) {
    const auto& fold = report.folds[k];
    out << (k + 1) << ',' << fold.held_out_session << ','
        << fold.validation_speaker << ',' << fold.test_speaker << ','
        << fold.metrics.wa << ',' << fold.metrics.ua;
    for (int c = 0; c < kC; ++c)
      if (fold.metrics.has_class[c])
        out << ',' << fold.metrics.recall[c];
      else
        out << ',';
    out << '\n';
  }
  out << "macro,,,," << report.macro_wa << ',' << report.macro_ua;
  for (int c = 0; c < kC; ++c) out << ',';
  out << '\n';
  out << "pooled,,,," << report.pooled.wa << ',' << report.pooled.ua;
  for (int c = 0; c < kC; ++c)
    if (report.pooled.has_class[c])
      out << ',' << report.pooled.recall[c];
    else
      out << ',';
  out << '\n';
  return out.str();
}

void write_report(const std::string& txt_path, const std::string& csv_path,
                  const LosoReport& report) {
  std::ofstream txt(txt_path);
  if (!txt) throw std::runtime_error("write_report: cannot open " + txt_path);
  txt << format_report(report);
  std::ofstream csv(csv_path);
  if (!csv) throw std::runtime_error("write_report: cannot open " + csv_path);
  csv << format_report_csv(report);
}

}  // namespace affect::eval
