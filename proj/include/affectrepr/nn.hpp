// affectrepr/nn.hpp

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

// Minimal feedforward machinery: dense layers, SSE / cross-entropy losses,
// batched backprop, SGD with decoupled-from-bias weight decay, and a
// finite-difference gradient checker. Batches are stored column-wise
// (inputs are in x batch_size). Everything is templated on the scalar so
// training runs in float while gradient verification runs in double.

#ifndef AFFECTREPR_NN_HPP
#define AFFECTREPR_NN_HPP

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "affectrepr/rng.hpp"
#include "affectrepr/types.hpp"

namespace affect::nn {

enum class Activation : std::uint8_t { kLinear = 0, kTanh = 1, kSoftmax = 2 };
enum class Loss : std::uint8_t { kSse = 0, kCrossEntropy = 1 };

template <typename S>
struct DenseLayer {
  Matrix<S> W;  // out x in
  Vector<S> b;  // out
  Activation act = Activation::kLinear;

  Eigen::Index in_dim() const { return W.cols(); }
  Eigen::Index out_dim() const { return W.rows(); }
};

template <typename S>
using Mlp = std::vector<DenseLayer<S>>;

struct SgdConfig {
  double learning_rate = 1e-4;
  double weight_decay = 1e-4;
  int batch_size = 500;
  int epochs = 5;
  std::uint64_t seed = 0;
};

inline void validate(const SgdConfig& cfg) {
  if (cfg.learning_rate <= 0.0)
    throw std::invalid_argument("SgdConfig: learning_rate must be > 0");
  if (cfg.batch_size < 1)
    throw std::invalid_argument("SgdConfig: batch_size must be >= 1");
  if (cfg.epochs < 1)
    throw std::invalid_argument("SgdConfig: epochs must be >= 1");
}

// ---------------------------------------------------------------------------
// Forward

template <typename S>
Matrix<S> softmax_columns(Matrix<S> pre) {
  for (Eigen::Index j = 0; j < pre.cols(); ++j) {
    auto col = pre.col(j);
    col.array() -= col.maxCoeff();
    col = col.array().exp();
    col /= col.sum();
  }
  return pre;
}

template <typename S>
Matrix<S> apply_activation(Activation act, Matrix<S> pre) {
  switch (act) {
    case Activation::kLinear: return pre;
    case Activation::kTanh: return pre.array().tanh().matrix();
    case Activation::kSoftmax: return softmax_columns(std::move(pre));
  }
  throw std::invalid_argument("apply_activation: unknown activation");
}

template <typename S>
Matrix<S> dense_forward(const DenseLayer<S>& layer, const Matrix<S>& X) {
  if (X.rows() != layer.in_dim())
    throw std::invalid_argument("dense_forward: dimension mismatch");
  Matrix<S> pre = (layer.W * X).colwise() + layer.b;
  return apply_activation(layer.act, std::move(pre));
}

template <typename S>
Vector<S> dense_forward(const DenseLayer<S>& layer, const Vector<S>& x) {
  return dense_forward(layer, Matrix<S>(x));
}

// Activations for every layer; element 0 is the input, element L the output.
template <typename S>
std::vector<Matrix<S>> forward_all(const Mlp<S>& net, const Matrix<S>& X) {
  std::vector<Matrix<S>> acts;
  acts.reserve(net.size() + 1);
  acts.push_back(X);
  for (const auto& layer : net) acts.push_back(dense_forward(layer, acts.back()));
  return acts;
}

// ---------------------------------------------------------------------------
// Losses. Batch losses are means over the batch of per-sample losses;
// reductions accumulate in double.

// Per-sample SSE: loss = sum((x - z)^2), gradient wrt z = 2(z - x).
template <typename S>
std::pair<double, Vector<S>> sse_loss(const Vector<S>& z, const Vector<S>& x) {
  if (z.size() != x.size())
    throw std::invalid_argument("sse_loss: dimension mismatch");
  const Vector<S> diff = z - x;
  const double loss = diff.template cast<double>().squaredNorm();
  return {loss, S(2) * diff};
}

template <typename S>
double batch_loss(const Matrix<S>& output, const Matrix<S>& target,
                  Loss loss) {
  if (output.rows() != target.rows() || output.cols() != target.cols())
    throw std::invalid_argument("batch_loss: dimension mismatch");
  const double B = static_cast<double>(output.cols());
  switch (loss) {
    case Loss::kSse:
      return (output - target).template cast<double>().squaredNorm() / B;
    case Loss::kCrossEntropy: {
      // target is one-hot; clamp keeps log finite for saturated outputs.
      double total = 0.0;
      for (Eigen::Index j = 0; j < output.cols(); ++j)
        for (Eigen::Index i = 0; i < output.rows(); ++i)
          if (target(i, j) != S(0))
            total -= static_cast<double>(target(i, j)) *
                     std::log(std::max(static_cast<double>(output(i, j)),
                                       1e-300));
      return total / B;
    }
  }
  throw std::invalid_argument("batch_loss: unknown loss");
}

template <typename S>
double mlp_loss(const Mlp<S>& net, const Matrix<S>& X, const Matrix<S>& T,
                Loss loss) {
  Matrix<S> a = X;
  for (const auto& layer : net) a = dense_forward(layer, a);
  return batch_loss(a, T, loss);
}

// ---------------------------------------------------------------------------
// Backprop

template <typename S>
struct Gradients {
  std::vector<Matrix<S>> W;
  std::vector<Vector<S>> b;
};

// Batch-averaged gradients for every layer. Supported output pairings:
// softmax with cross-entropy, linear or tanh with SSE. Hidden layers must be
// tanh or linear. Throws NumericError when activations stop being finite.
template <typename S>
Gradients<S> backprop(const Mlp<S>& net, const Matrix<S>& X,
                      const Matrix<S>& T, Loss loss,
                      double* loss_out = nullptr) {
  if (net.empty()) throw std::invalid_argument("backprop: empty network");
  const auto acts = forward_all(net, X);
  const Matrix<S>& out = acts.back();
  if (!out.allFinite())
    throw NumericError("backprop: non-finite activations");
  if (loss_out != nullptr) *loss_out = batch_loss(out, T, loss);

  const S B = static_cast<S>(X.cols());
  const Activation out_act = net.back().act;
  Matrix<S> delta;  // dLoss/dPreactivation of the current layer
  if (loss == Loss::kCrossEntropy) {
    if (out_act != Activation::kSoftmax)
      throw std::invalid_argument("backprop: cross-entropy needs softmax output");
    delta = (out - T) / B;
  } else {
    if (out_act == Activation::kSoftmax)
      throw std::invalid_argument("backprop: SSE with softmax output is unsupported");
    delta = S(2) * (out - T) / B;
    if (out_act == Activation::kTanh)
      delta.array() *= (S(1) - out.array().square());
  }

  const std::size_t L = net.size();
  Gradients<S> grads;
  grads.W.resize(L);
  grads.b.resize(L);
  for (std::size_t k = L; k-- > 0;) {
    grads.W[k].noalias() = delta * acts[k].transpose();
    grads.b[k] = delta.rowwise().sum();
    if (k > 0) {
      Matrix<S> prev = net[k].W.transpose() * delta;
      switch (net[k - 1].act) {
        case Activation::kTanh:
          prev.array() *= (S(1) - acts[k].array().square());
          break;
        case Activation::kLinear:
          break;
        case Activation::kSoftmax:
          throw std::invalid_argument("backprop: softmax hidden layer unsupported");
      }
      delta = std::move(prev);
    }
  }
  return grads;
}

// w <- w - lr*(g + decay*w); biases are exempt from decay.
template <typename S>
void sgd_step(DenseLayer<S>& layer, const Matrix<S>& dW, const Vector<S>& db,
              const SgdConfig& cfg) {
  const S lr = static_cast<S>(cfg.learning_rate);
  const S decay = static_cast<S>(cfg.weight_decay);
  layer.W -= lr * (dW + decay * layer.W);
  layer.b -= lr * db;
}

template <typename S>
void sgd_step(Mlp<S>& net, const Gradients<S>& grads, const SgdConfig& cfg) {
  if (grads.W.size() != net.size())
    throw std::invalid_argument("sgd_step: gradient/layer count mismatch");
  for (std::size_t k = 0; k < net.size(); ++k)
    sgd_step(net[k], grads.W[k], grads.b[k], cfg);
}

// ---------------------------------------------------------------------------
// Initialization

// W uniform in +-sqrt(6/(fan_in+fan_out)), b zero.
template <typename S>
DenseLayer<S> init_dense(Eigen::Index out, Eigen::Index in, Activation act,
                         Rng& rng) {
  if (out < 1 || in < 1) throw std::invalid_argument("init_dense: bad shape");
  DenseLayer<S> layer;
  layer.act = act;
  const double bound = std::sqrt(6.0 / static_cast<double>(in + out));
  layer.W.resize(out, in);
  for (Eigen::Index i = 0; i < out; ++i)
    for (Eigen::Index j = 0; j < in; ++j)
      layer.W(i, j) = static_cast<S>(rng.uniform(-bound, bound));
  layer.b = Vector<S>::Zero(out);
  return layer;
}

// ---------------------------------------------------------------------------
// Finite-difference gradient verification

inline double relative_error(double a, double n) {
  const double denom = std::max({std::abs(a), std::abs(n), 1e-6});
  return std::abs(a - n) / denom;
}

// Central differences on every parameter; returns the max relative error
// against backprop. Intended for small instances and double scalars.
template <typename S>
double grad_check(const Mlp<S>& net, const Matrix<S>& X, const Matrix<S>& T,
                  Loss loss, double eps) {
  const Gradients<S> analytic = backprop(net, X, T, loss);
  Mlp<S> probe = net;
  double worst = 0.0;
  auto probe_one = [&](S& param, double analytic_grad) {
    const S saved = param;
    param = saved + static_cast<S>(eps);
    const double up = mlp_loss(probe, X, T, loss);
    param = saved - static_cast<S>(eps);
    const double down = mlp_loss(probe, X, T, loss);
    param = saved;
    const double numeric = (up - down) / (2.0 * eps);
    worst = std::max(worst, relative_error(analytic_grad, numeric));
  };
  for (std::size_t k = 0; k < probe.size(); ++k) {
    auto& layer = probe[k];
    for (Eigen::Index i = 0; i < layer.W.rows(); ++i)
      for (Eigen::Index j = 0; j < layer.W.cols(); ++j)
        probe_one(layer.W(i, j),
                  static_cast<double>(analytic.W[k](i, j)));
    for (Eigen::Index i = 0; i < layer.b.size(); ++i)
      probe_one(layer.b(i), static_cast<double>(analytic.b[k](i)));
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Serialization: magic "AFM1", u32 layer count, then per layer u32 out,
// u32 in, u8 activation tag, row-major f32 W, f32 b.

void save_mlp(const std::string& path, const Mlp<float>& net);
Mlp<float> load_mlp(const std::string& path);

}  // namespace affect::nn

#endif  // AFFECTREPR_NN_HPP
