// affectrepr/autoencoder.hpp

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

// Denoising autoencoders: masking corruption, tied/untied single layers with
// a tanh encoder and linear decoder, greedy stacked pretraining, and jointly
// trained deep (mirrored) autoencoders. Data batches are column-wise.

#ifndef AFFECTREPR_AUTOENCODER_HPP
#define AFFECTREPR_AUTOENCODER_HPP

#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "affectrepr/nn.hpp"
#include "affectrepr/rng.hpp"
#include "affectrepr/types.hpp"

namespace affect::ae {

struct CorruptionConfig {
  double drop_fraction = 0.2;  // in [0, 1)
  std::uint64_t seed = 0;
};

inline void validate(const CorruptionConfig& cfg) {
  if (cfg.drop_fraction < 0.0 || cfg.drop_fraction >= 1.0)
    throw std::invalid_argument("CorruptionConfig: fraction outside [0, 1)");
}

// Sets exactly round(fraction*dim) coordinates, chosen uniformly without
// replacement, to zero. Un-dropped coordinates are untouched.
template <typename S>
void corrupt_inplace(Eigen::Ref<Vector<S>> x, double fraction, Rng& rng) {
  const Eigen::Index dim = x.size();
  const Eigen::Index drop =
      static_cast<Eigen::Index>(std::lround(fraction * static_cast<double>(dim)));
  if (drop <= 0) return;
  // Partial Fisher-Yates over the index range picks the dropped positions.
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(dim));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  for (Eigen::Index i = 0; i < drop; ++i) {
    const Eigen::Index j =
        i + static_cast<Eigen::Index>(rng.uniform_int(
                static_cast<std::uint64_t>(dim - i)));
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
    x(idx[static_cast<std::size_t>(i)]) = S(0);
  }
}

template <typename S>
Vector<S> corrupt(const Vector<S>& x, double fraction, Rng& rng) {
  Vector<S> out = x;
  corrupt_inplace<S>(out, fraction, rng);
  return out;
}

// Stateful corruption stream: call k is deterministic under (seed, k), so a
// run can be reproduced or resumed from any counter value.
class Corruptor {
 public:
  explicit Corruptor(const CorruptionConfig& cfg) : cfg_(cfg) { validate(cfg); }

  template <typename S>
  void apply(Eigen::Ref<Vector<S>> x) {
    Rng rng(mix_seed(cfg_.seed, counter_++));
    corrupt_inplace<S>(x, cfg_.drop_fraction, rng);
  }

  std::uint64_t counter() const { return counter_; }

 private:
  CorruptionConfig cfg_;
  std::uint64_t counter_ = 0;
};

// ---------------------------------------------------------------------------
// Single denoising layer: y = tanh(W x~ + b), z = W' y + b' (linear output).
// Tied layers keep only W; the decoder weight is its transpose, so the tie
// holds structurally at every step.

template <typename S>
struct DaeLayer {
  nn::DenseLayer<S> enc;  // tanh
  Matrix<S> dec_W;        // in x hid; empty when tied
  Vector<S> dec_b;        // in
  bool tied = true;

  Matrix<S> decoder_weight() const {
    return tied ? Matrix<S>(enc.W.transpose()) : dec_W;
  }
  Eigen::Index in_dim() const { return enc.in_dim(); }
  Eigen::Index hid_dim() const { return enc.out_dim(); }
};

template <typename S>
Matrix<S> dae_encode(const DaeLayer<S>& layer, const Matrix<S>& X) {
  return dense_forward(layer.enc, X);
}

template <typename S>
Matrix<S> dae_reconstruct(const DaeLayer<S>& layer, const Matrix<S>& Y) {
  return (layer.decoder_weight() * Y).colwise() + layer.dec_b;
}

// Batch-mean SSE between the reconstruction of Xcorrupt and Xclean.
template <typename S>
double dae_loss(const DaeLayer<S>& layer, const Matrix<S>& Xcorrupt,
                const Matrix<S>& Xclean) {
  const Matrix<S> Z = dae_reconstruct(layer, dae_encode(layer, Xcorrupt));
  return nn::batch_loss(Z, Xclean, nn::Loss::kSse);
}

template <typename S>
struct DaeGradients {
  Matrix<S> enc_W;  // for tied layers this accumulates both paths
  Vector<S> enc_b;
  Matrix<S> dec_W;  // untied only
  Vector<S> dec_b;
};

template <typename S>
DaeGradients<S> dae_backprop(const DaeLayer<S>& layer, const Matrix<S>& Xcorrupt,
                             const Matrix<S>& Xclean,
                             double* loss_out = nullptr) {
  const S B = static_cast<S>(Xcorrupt.cols());
  const Matrix<S> Y = dae_encode(layer, Xcorrupt);
  const Matrix<S> Z = dae_reconstruct(layer, Y);
  if (!Z.allFinite()) throw NumericError("dae_backprop: non-finite reconstruction");
  if (loss_out != nullptr) *loss_out = nn::batch_loss(Z, Xclean, nn::Loss::kSse);

  const Matrix<S> dZ = S(2) * (Z - Xclean) / B;
  DaeGradients<S> g;
  Matrix<S> dec_W_grad;
  dec_W_grad.noalias() = dZ * Y.transpose();
  g.dec_b = dZ.rowwise().sum();
  Matrix<S> dY = layer.decoder_weight().transpose() * dZ;
  dY.array() *= (S(1) - Y.array().square());  // through tanh
  g.enc_W.noalias() = dY * Xcorrupt.transpose();
  g.enc_b = dY.rowwise().sum();
  if (layer.tied)
    g.enc_W += dec_W_grad.transpose();  // decoder path lands on the shared W
  else
    g.dec_W = std::move(dec_W_grad);
  return g;
}

// Central-difference check of dae_backprop; covers the tied double-path case.
template <typename S>
double grad_check_dae(const DaeLayer<S>& layer, const Matrix<S>& Xcorrupt,
                      const Matrix<S>& Xclean, double eps) {
  const DaeGradients<S> analytic = dae_backprop(layer, Xcorrupt, Xclean);
  DaeLayer<S> probe = layer;
  double worst = 0.0;
  auto probe_one = [&](S& param, double analytic_grad) {
    const S saved = param;
    param = saved + static_cast<S>(eps);
    const double up = dae_loss(probe, Xcorrupt, Xclean);
    param = saved - static_cast<S>(eps);
    const double down = dae_loss(probe, Xcorrupt, Xclean);
    param = saved;
    worst = std::max(worst, nn::relative_error(analytic_grad,
                                               (up - down) / (2.0 * eps)));
  };
  for (Eigen::Index i = 0; i < probe.enc.W.rows(); ++i)
    for (Eigen::Index j = 0; j < probe.enc.W.cols(); ++j)
      probe_one(probe.enc.W(i, j), static_cast<double>(analytic.enc_W(i, j)));
  for (Eigen::Index i = 0; i < probe.enc.b.size(); ++i)
    probe_one(probe.enc.b(i), static_cast<double>(analytic.enc_b(i)));
  if (!probe.tied)
    for (Eigen::Index i = 0; i < probe.dec_W.rows(); ++i)
      for (Eigen::Index j = 0; j < probe.dec_W.cols(); ++j)
        probe_one(probe.dec_W(i, j), static_cast<double>(analytic.dec_W(i, j)));
  for (Eigen::Index i = 0; i < probe.dec_b.size(); ++i)
    probe_one(probe.dec_b(i), static_cast<double>(analytic.dec_b(i)));
  return worst;
}

// ---------------------------------------------------------------------------
// Stack / deep configurations

enum class ArchMode : std::uint8_t { kTied = 0, kUntied = 1, kDeep = 2 };

inline const char* name_of(ArchMode m) {
  switch (m) {
    case ArchMode::kTied: return "tied";
    case ArchMode::kUntied: return "untied";
    case ArchMode::kDeep: return "deep";
  }
  throw std::invalid_argument("name_of: unknown ArchMode");
}

struct StackConfig {
  std::vector<int> layer_sizes;  // e.g. 640,320,160,80: input then hiddens
  bool tied = true;
  nn::SgdConfig sgd;
  bool allow_non_pyramidal = false;
};

// Pyramidal rule: each size is the integer half of the previous one.
inline bool is_pyramidal(const std::vector<int>& sizes) {
  for (std::size_t k = 1; k < sizes.size(); ++k)
    if (sizes[k] != sizes[k - 1] / 2) return false;
  return true;
}

inline void validate(const StackConfig& cfg) {
  nn::validate(cfg.sgd);
  if (cfg.layer_sizes.size() < 2)
    throw std::invalid_argument("StackConfig: need at least input and one hidden size");
  for (const int s : cfg.layer_sizes)
    if (s < 1) throw std::invalid_argument("StackConfig: sizes must be positive");
  if (!cfg.allow_non_pyramidal && !is_pyramidal(cfg.layer_sizes))
    throw std::invalid_argument(
        "StackConfig: sizes do not follow the halving rule "
        "(set allow_non_pyramidal to override)");
}

template <typename S>
struct DaeStack {
  std::vector<DaeLayer<S>> layers;

  Eigen::Index bottleneck_dim() const { return layers.back().hid_dim(); }
};

// Mirrored encoder-decoder trained jointly; net holds 2*(L-1) dense layers,
// all tanh except the final linear reconstruction.
template <typename S>
struct DeepAe {
  nn::Mlp<S> net;
  int encoder_layers = 0;

  Eigen::Index bottleneck_dim() const {
    return net[static_cast<std::size_t>(encoder_layers) - 1].out_dim();
  }
};

// ---------------------------------------------------------------------------
// Training. Epoch losses are per-sample SSE means, accumulated in double.

template <typename S>
struct LayerTrainResult {
  DaeLayer<S> layer;
  std::vector<double> epoch_mean_sse;
};

template <typename S>
LayerTrainResult<S> train_dae_layer(const Matrix<S>& data, int hid_dim,
                                    bool tied, const CorruptionConfig& corruption,
                                    const nn::SgdConfig& sgd);

template <typename S>
struct StackTrainResult {
  DaeStack<S> stack;
  std::vector<std::vector<double>> epoch_mean_sse;  // one curve per layer
};

// Greedy pretraining: layer k is a DAE over the clean activations of the
// layers below it, with corruption applied to that layer's own input.
// Layer k derives its seeds as mix_seed(seed, k), so a single-layer stack
// matches train_dae_layer bit for bit.
template <typename S>
StackTrainResult<S> stack_pretrain(const Matrix<S>& data, const StackConfig& cfg,
                                   const CorruptionConfig& corruption);

template <typename S>
struct DeepTrainResult {
  DeepAe<S> model;
  std::vector<double> epoch_mean_sse;
};

template <typename S>
DeepTrainResult<S> train_deep_ae(const Matrix<S>& data, const StackConfig& cfg,
                                 const CorruptionConfig& corruption);

// ---------------------------------------------------------------------------
// Encoding (no corruption at inference)

template <typename S>
Matrix<S> encode_columns(const DaeStack<S>& stack, Matrix<S> X) {
  for (const auto& layer : stack.layers) X = dae_encode(layer, X);
  return X;
}

template <typename S>
Matrix<S> encode_columns(const DeepAe<S>& model, Matrix<S> X) {
  for (int k = 0; k < model.encoder_layers; ++k)
    X = dense_forward(model.net[static_cast<std::size_t>(k)], X);
  return X;
}

// ---------------------------------------------------------------------------
// Pretrained-model wrapper used by the classification and recurrent stages.

struct Pretrained {
  ArchMode mode = ArchMode::kTied;
  DaeStack<float> stack;  // tied / untied
  DeepAe<float> deep;     // deep

  Eigen::Index input_dim() const {
    return mode == ArchMode::kDeep ? deep.net.front().in_dim()
                                   : stack.layers.front().in_dim();
  }
  Eigen::Index bottleneck_dim() const {
    return mode == ArchMode::kDeep ? deep.bottleneck_dim()
                                   : stack.bottleneck_dim();
  }
};

struct PretrainResult {
  Pretrained model;
  std::vector<std::vector<double>> epoch_mean_sse;  // per greedy layer, or one
};

PretrainResult train_pretrained(const Matrix<float>& data, ArchMode mode,
                                const StackConfig& cfg,
                                const CorruptionConfig& corruption);

// Encoder-only copies, e.g. to seed a classifier.
std::vector<nn::DenseLayer<float>> encoder_layers(const Pretrained& model);

// Rows of a FeatureMatrix mapped to bottleneck activations.
FeatureMatrix encode_rows(const Pretrained& model, const FeatureMatrix& f);

// Stack model file: AFM1 with encoder layers then linear decoder layers (the
// tied decoder is written as the materialized transpose).
void save_pretrained(const std::string& path, const Pretrained& model);
Pretrained load_pretrained(const std::string& path, ArchMode mode,
                           int encoder_layer_count);

// ---------------------------------------------------------------------------
// Implementation of the training templates

namespace detail {

template <typename S>
struct EpochState {
  std::vector<Eigen::Index> order;
  Rng order_rng;
  explicit EpochState(Eigen::Index n, std::uint64_t seed)
      : order(static_cast<std::size_t>(n)), order_rng(seed) {
    std::iota(order.begin(), order.end(), Eigen::Index{0});
  }
  void reshuffle() { order_rng.shuffle(order); }
};

}  // namespace detail

template <typename S>
LayerTrainResult<S> train_dae_layer(const Matrix<S>& data, int hid_dim,
                                    bool tied, const CorruptionConfig& corruption,
                                    const nn::SgdConfig& sgd) {
  nn::validate(sgd);
  validate(corruption);
  const Eigen::Index in_dim = data.rows();
  const Eigen::Index n = data.cols();
  if (n == 0) throw std::invalid_argument("train_dae_layer: no data");
  if (hid_dim < 1) throw std::invalid_argument("train_dae_layer: bad hidden dim");

  Rng init_rng(mix_seed(sgd.seed, 0x5EED));
  LayerTrainResult<S> result;
  DaeLayer<S>& layer = result.layer;
  layer.tied = tied;
  layer.enc = nn::init_dense<S>(hid_dim, in_dim, nn::Activation::kTanh, init_rng);
  if (!tied)
    layer.dec_W = nn::init_dense<S>(in_dim, hid_dim, nn::Activation::kLinear,
                                    init_rng).W;
  layer.dec_b = Vector<S>::Zero(in_dim);

  Corruptor corruptor(corruption);
  detail::EpochState<S> state(n, mix_seed(sgd.seed, 0x0DDE));
  const Eigen::Index batch = std::min<Eigen::Index>(sgd.batch_size, n);
  Matrix<S> clean(in_dim, batch);
  Matrix<S> noisy(in_dim, batch);
  for (int epoch = 0; epoch < sgd.epochs; ++epoch) {
    state.reshuffle();
    double sse_total = 0.0;
    for (Eigen::Index start = 0; start < n; start += batch) {
      const Eigen::Index b = std::min(batch, n - start);
      for (Eigen::Index i = 0; i < b; ++i) {
        clean.col(i) = data.col(state.order[static_cast<std::size_t>(start + i)]);
        noisy.col(i) = clean.col(i);
        corruptor.apply<S>(noisy.col(i));
      }
      double loss = 0.0;
      const auto grads = dae_backprop<S>(layer, noisy.leftCols(b),
                                         clean.leftCols(b), &loss);
      if (!std::isfinite(loss))
        throw NumericError("train_dae_layer: non-finite loss");
      sse_total += loss * static_cast<double>(b);
      nn::sgd_step(layer.enc, grads.enc_W, grads.enc_b, sgd);
      if (!tied) {
        const S lr = static_cast<S>(sgd.learning_rate);
        const S decay = static_cast<S>(sgd.weight_decay);
        layer.dec_W -= lr * (grads.dec_W + decay * layer.dec_W);
      }
      layer.dec_b -= static_cast<S>(sgd.learning_rate) * grads.dec_b;
    }
    result.epoch_mean_sse.push_back(sse_total / static_cast<double>(n));
  }
  return result;
}

template <typename S>
StackTrainResult<S> stack_pretrain(const Matrix<S>& data, const StackConfig& cfg,
                                   const CorruptionConfig& corruption) {
  validate(cfg);
  if (data.rows() != cfg.layer_sizes.front())
    throw std::invalid_argument("stack_pretrain: data dim != layer_sizes[0]");
  StackTrainResult<S> result;
  Matrix<S> activations = data;
  for (std::size_t k = 0; k + 1 < cfg.layer_sizes.size(); ++k) {
    nn::SgdConfig layer_sgd = cfg.sgd;
    layer_sgd.seed = mix_seed(cfg.sgd.seed, k);
    CorruptionConfig layer_corruption = corruption;
    layer_corruption.seed = mix_seed(corruption.seed, k);
    auto trained = train_dae_layer<S>(activations, cfg.layer_sizes[k + 1],
                                      cfg.tied, layer_corruption, layer_sgd);
    result.epoch_mean_sse.push_back(std::move(trained.epoch_mean_sse));
    result.stack.layers.push_back(std::move(trained.layer));
    if (k + 2 < cfg.layer_sizes.size())
      activations = dae_encode(result.stack.layers.back(), activations);
  }
  return result;
}

template <typename S>
DeepTrainResult<S> train_deep_ae(const Matrix<S>& data, const StackConfig& cfg,
                                 const CorruptionConfig& corruption) {
  validate(cfg);
  if (data.rows() != cfg.layer_sizes.front())
    throw std::invalid_argument("train_deep_ae: data dim != layer_sizes[0]");
  const Eigen::Index n = data.cols();
  if (n == 0) throw std::invalid_argument("train_deep_ae: no data");

  DeepTrainResult<S> result;
  DeepAe<S>& model = result.model;
  model.encoder_layers = static_cast<int>(cfg.layer_sizes.size()) - 1;
  Rng init_rng(mix_seed(cfg.sgd.seed, 0x5EED));
  for (std::size_t k = 0; k + 1 < cfg.layer_sizes.size(); ++k)
    model.net.push_back(nn::init_dense<S>(cfg.layer_sizes[k + 1],
                                          cfg.layer_sizes[k],
                                          nn::Activation::kTanh, init_rng));
  for (std::size_t k = cfg.layer_sizes.size() - 1; k-- > 0;)
    model.net.push_back(nn::init_dense<S>(
        cfg.layer_sizes[k], cfg.layer_sizes[k + 1],
        k == 0 ? nn::Activation::kLinear : nn::Activation::kTanh, init_rng));

  Corruptor corruptor(corruption);
  detail::EpochState<S> state(n, mix_seed(cfg.sgd.seed, 0x0DDE));
  const Eigen::Index in_dim = data.rows();
  const Eigen::Index batch = std::min<Eigen::Index>(cfg.sgd.batch_size, n);
  Matrix<S> clean(in_dim, batch);
  Matrix<S> noisy(in_dim, batch);
  for (int epoch = 0; epoch < cfg.sgd.epochs; ++epoch) {
    state.reshuffle();
    double sse_total = 0.0;
    for (Eigen::Index start = 0; start < n; start += batch) {
      const Eigen::Index b = std::min(batch, n - start);
      for (Eigen::Index i = 0; i < b; ++i) {
        clean.col(i) = data.col(state.order[static_cast<std::size_t>(start + i)]);
        noisy.col(i) = clean.col(i);
        corruptor.apply<S>(noisy.col(i));
      }
      double loss = 0.0;
      const auto grads = nn::backprop<S>(model.net, noisy.leftCols(b),
                                         clean.leftCols(b), nn::Loss::kSse,
                                         &loss);
      if (!std::isfinite(loss))
        throw NumericError("train_deep_ae: non-finite loss");
      sse_total += loss * static_cast<double>(b);
      nn::sgd_step(model.net, grads, cfg.sgd);
    }
    result.epoch_mean_sse.push_back(sse_total / static_cast<double>(n));
  }
  return result;
}

}  // namespace affect::ae

#endif  // AFFECTREPR_AUTOENCODER_HPP
