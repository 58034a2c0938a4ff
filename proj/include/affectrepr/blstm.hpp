// affectrepr/blstm.hpp

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

// Bidirectional LSTM autoencoder over frame sequences: two LSTM cells (one
// per direction), concatenated hidden states, and a linear per-frame
// reconstruction head. Trained with BPTT, one utterance per SGD step, using
// the summed per-frame SSE of the utterance. The frame-mean of the
// concatenated hidden activations is the utterance embedding.

#ifndef AFFECTREPR_BLSTM_HPP
#define AFFECTREPR_BLSTM_HPP

#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "affectrepr/nn.hpp"
#include "affectrepr/rng.hpp"
#include "affectrepr/types.hpp"

namespace affect::rnn {

template <typename S>
struct LstmCell {
  Matrix<S> Wi, Wf, Wo, Wg;  // hid x in
  Matrix<S> Ui, Uf, Uo, Ug;  // hid x hid
  Vector<S> bi, bf, bo, bg;  // hid

  Eigen::Index in_dim() const { return Wi.cols(); }
  Eigen::Index hid_dim() const { return Wi.rows(); }
};

// Per-step caches in processing order, kept for BPTT.
template <typename S>
struct LstmTrace {
  Matrix<S> i, f, o, g, c, tanh_c, h;  // hid x T each
};

template <typename S>
Vector<S> logistic(const Vector<S>& v) {
  return ((-v.array()).exp() + S(1)).inverse().matrix();
}

// Runs the cell over X (in x T, already in this direction's processing
// order); returns hidden states h (hid x T) and fills the trace if given.
template <typename S>
Matrix<S> lstm_run(const LstmCell<S>& cell, const Matrix<S>& X,
                   LstmTrace<S>* trace = nullptr) {
  const Eigen::Index H = cell.hid_dim();
  const Eigen::Index T = X.cols();
  Matrix<S> out(H, T);
  if (trace != nullptr)
    for (Matrix<S>* m : {&trace->i, &trace->f, &trace->o, &trace->g, &trace->c,
                         &trace->tanh_c, &trace->h})
      m->resize(H, T);
  Vector<S> h = Vector<S>::Zero(H);
  Vector<S> c = Vector<S>::Zero(H);
  for (Eigen::Index t = 0; t < T; ++t) {
    const auto x = X.col(t);
    const Vector<S> i = logistic<S>(cell.Wi * x + cell.Ui * h + cell.bi);
    const Vector<S> f = logistic<S>(cell.Wf * x + cell.Uf * h + cell.bf);
    const Vector<S> o = logistic<S>(cell.Wo * x + cell.Uo * h + cell.bo);
    const Vector<S> g = (cell.Wg * x + cell.Ug * h + cell.bg).array().tanh();
    c = (f.array() * c.array() + i.array() * g.array()).matrix();
    const Vector<S> tc = c.array().tanh().matrix();
    h = (o.array() * tc.array()).matrix();
    out.col(t) = h;
    if (trace != nullptr) {
      trace->i.col(t) = i;
      trace->f.col(t) = f;
      trace->o.col(t) = o;
      trace->g.col(t) = g;
      trace->c.col(t) = c;
      trace->tanh_c.col(t) = tc;
      trace->h.col(t) = h;
    }
  }
  return out;
}

template <typename S>
struct BlstmAe {
  LstmCell<S> fwd, bwd;
  Matrix<S> head_W;  // in x 2*hid: linear reconstruction from [h_fwd; h_bwd]
  Vector<S> head_b;  // in

  Eigen::Index in_dim() const { return fwd.in_dim(); }
  Eigen::Index hid_dim() const { return fwd.hid_dim(); }
  Eigen::Index embed_dim() const { return 2 * fwd.hid_dim(); }
};

template <typename S>
struct BlstmForwardResult {
  Matrix<S> activations;  // 2*hid x T, natural time order
  Matrix<S> recon;        // in x T
};

template <typename S>
struct BlstmTraces {
  LstmTrace<S> fwd, bwd;  // bwd in its own (reversed) processing order
};

template <typename S>
BlstmForwardResult<S> blstm_forward(const BlstmAe<S>& model, const Matrix<S>& X,
                                    BlstmTraces<S>* traces = nullptr) {
  if (X.rows() != model.in_dim())
    throw std::invalid_argument("blstm_forward: input dim mismatch");
  if (X.cols() == 0) throw std::invalid_argument("blstm_forward: empty sequence");
  const Eigen::Index H = model.hid_dim();
  const Eigen::Index T = X.cols();
  const Matrix<S> X_rev = X.rowwise().reverse();
  const Matrix<S> h_fwd =
      lstm_run(model.fwd, X, traces != nullptr ? &traces->fwd : nullptr);
  const Matrix<S> h_bwd =
      lstm_run(model.bwd, X_rev, traces != nullptr ? &traces->bwd : nullptr);
  BlstmForwardResult<S> result;
  result.activations.resize(2 * H, T);
  result.activations.topRows(H) = h_fwd;
  result.activations.bottomRows(H) = h_bwd.rowwise().reverse();
  result.recon = (model.head_W * result.activations).colwise() + model.head_b;
  if (!result.recon.allFinite())
    throw NumericError("blstm_forward: non-finite reconstruction");
  return result;
}

// Summed per-frame SSE of one utterance.
template <typename S>
double blstm_loss(const BlstmAe<S>& model, const Matrix<S>& X) {
  const auto fwd = blstm_forward(model, X);
  return static_cast<double>(
      (fwd.recon - X).template cast<double>().array().square().sum());
}

template <typename S>
Vector<S> utterance_embedding(const BlstmAe<S>& model, const Matrix<S>& X) {
  const auto fwd = blstm_forward(model, X);
  return fwd.activations.rowwise().mean();
}

// ---------------------------------------------------------------------------
// BPTT

template <typename S>
struct LstmGradients {
  Matrix<S> Wi, Wf, Wo, Wg, Ui, Uf, Uo, Ug;
  Vector<S> bi, bf, bo, bg;

  static LstmGradients zeros_like(const LstmCell<S>& cell) {
    LstmGradients g;
    const Eigen::Index H = cell.hid_dim(), D = cell.in_dim();
    for (Matrix<S>* m : {&g.Wi, &g.Wf, &g.Wo, &g.Wg}) *m = Matrix<S>::Zero(H, D);
    for (Matrix<S>* m : {&g.Ui, &g.Uf, &g.Uo, &g.Ug}) *m = Matrix<S>::Zero(H, H);
    for (Vector<S>* v : {&g.bi, &g.bf, &g.bo, &g.bg}) *v = Vector<S>::Zero(H);
    return g;
  }
};

template <typename S>
struct BlstmGradients {
  LstmGradients<S> fwd, bwd;
  Matrix<S> head_W;
  Vector<S> head_b;

  static BlstmGradients zeros_like(const BlstmAe<S>& model) {
    BlstmGradients g;
    g.fwd = LstmGradients<S>::zeros_like(model.fwd);
    g.bwd = LstmGradients<S>::zeros_like(model.bwd);
    g.head_W = Matrix<S>::Zero(model.head_W.rows(), model.head_W.cols());
    g.head_b = Vector<S>::Zero(model.head_b.size());
    return g;
  }
};

// Backward pass through one direction. X and dH are in processing order.
template <typename S>
void lstm_bptt(const LstmCell<S>& cell, const Matrix<S>& X,
               const LstmTrace<S>& trace, const Matrix<S>& dH,
               LstmGradients<S>& grads) {
  const Eigen::Index H = cell.hid_dim();
  const Eigen::Index T = X.cols();
  Vector<S> dh_next = Vector<S>::Zero(H);  // via U from step t+1
  Vector<S> dc_next = Vector<S>::Zero(H);  // dc_{t+1} * f_{t+1}
  for (Eigen::Index t = T - 1; t >= 0; --t) {
    const auto i = trace.i.col(t).array();
    const auto f = trace.f.col(t).array();
    const auto o = trace.o.col(t).array();
    const auto g = trace.g.col(t).array();
    const auto tc = trace.tanh_c.col(t).array();
    const Vector<S> dh = dH.col(t) + dh_next;
    const Vector<S> dc =
        (dh.array() * o * (S(1) - tc.square()) + dc_next.array()).matrix();
    const Vector<S> c_prev =
        t > 0 ? Vector<S>(trace.c.col(t - 1)) : Vector<S>(Vector<S>::Zero(H));
    const Vector<S> h_prev =
        t > 0 ? Vector<S>(trace.h.col(t - 1)) : Vector<S>(Vector<S>::Zero(H));
    const Vector<S> dpre_i = (dc.array() * g * i * (S(1) - i)).matrix();
    const Vector<S> dpre_f =
        (dc.array() * c_prev.array() * f * (S(1) - f)).matrix();
    const Vector<S> dpre_o = (dh.array() * tc * o * (S(1) - o)).matrix();
    const Vector<S> dpre_g = (dc.array() * i * (S(1) - g.square())).matrix();
    const auto x_t = X.col(t);
    grads.Wi.noalias() += dpre_i * x_t.transpose();
    grads.Wf.noalias() += dpre_f * x_t.transpose();
    grads.Wo.noalias() += dpre_o * x_t.transpose();
    grads.Wg.noalias() += dpre_g * x_t.transpose();
    grads.Ui.noalias() += dpre_i * h_prev.transpose();
    grads.Uf.noalias() += dpre_f * h_prev.transpose();
    grads.Uo.noalias() += dpre_o * h_prev.transpose();
    grads.Ug.noalias() += dpre_g * h_prev.transpose();
    grads.bi += dpre_i;
    grads.bf += dpre_f;
    grads.bo += dpre_o;
    grads.bg += dpre_g;
    dh_next = cell.Ui.transpose() * dpre_i + cell.Uf.transpose() * dpre_f +
              cell.Uo.transpose() * dpre_o + cell.Ug.transpose() * dpre_g;
    dc_next = (dc.array() * f).matrix();
  }
}

// Gradients of blstm_loss (summed SSE) for one utterance.
template <typename S>
BlstmGradients<S> blstm_backprop(const BlstmAe<S>& model, const Matrix<S>& X,
                                 double* loss_out = nullptr) {
  const Eigen::Index H = model.hid_dim();
  const Eigen::Index T = X.cols();
  BlstmTraces<S> traces;
  const auto fwd = blstm_forward(model, X, &traces);
  if (loss_out != nullptr)
    *loss_out = static_cast<double>(
        (fwd.recon - X).template cast<double>().array().square().sum());

  BlstmGradients<S> grads = BlstmGradients<S>::zeros_like(model);
  const Matrix<S> dZ = S(2) * (fwd.recon - X);
  grads.head_W.noalias() = dZ * fwd.activations.transpose();
  grads.head_b = dZ.rowwise().sum();
  const Matrix<S> dA = model.head_W.transpose() * dZ;
  const Matrix<S> dH_fwd = dA.topRows(H);
  const Matrix<S> dH_bwd = dA.bottomRows(H).rowwise().reverse();
  const Matrix<S> X_rev = X.rowwise().reverse();
  lstm_bptt(model.fwd, X, traces.fwd, dH_fwd, grads.fwd);
  lstm_bptt(model.bwd, X_rev, traces.bwd, dH_bwd, grads.bwd);
  (void)T;
  return grads;
}

// ---------------------------------------------------------------------------
// Training

struct BlstmTrainConfig {
  int hidden_dim = 8;          // per direction
  double learning_rate = 1e-6;
  int epochs = 45;
  double grad_clip = 5.0;      // elementwise, training only
  double init_range = 0.08;    // uniform +-range for weights
  double forget_bias = 1.0;
  std::uint64_t seed = 0;
};

inline void validate(const BlstmTrainConfig& cfg) {
  if (cfg.hidden_dim < 1) throw std::invalid_argument("BlstmTrainConfig: hidden_dim");
  if (cfg.learning_rate <= 0) throw std::invalid_argument("BlstmTrainConfig: learning_rate");
  if (cfg.epochs < 1) throw std::invalid_argument("BlstmTrainConfig: epochs");
  if (cfg.grad_clip <= 0) throw std::invalid_argument("BlstmTrainConfig: grad_clip");
}

template <typename S>
BlstmAe<S> init_blstm(Eigen::Index in_dim, const BlstmTrainConfig& cfg) {
  validate(cfg);
  Rng rng(mix_seed(cfg.seed, 0x5EED));
  const auto uniform_mat = [&](Eigen::Index r, Eigen::Index c) {
    Matrix<S> m(r, c);
    for (Eigen::Index j = 0; j < c; ++j)  // column-major fill, stable order
      for (Eigen::Index i = 0; i < r; ++i)
        m(i, j) = static_cast<S>(rng.uniform(-cfg.init_range, cfg.init_range));
    return m;
  };
  const Eigen::Index H = cfg.hidden_dim;
  BlstmAe<S> model;
  for (LstmCell<S>* cell : {&model.fwd, &model.bwd}) {
    for (Matrix<S>* m : {&cell->Wi, &cell->Wf, &cell->Wo, &cell->Wg})
      *m = uniform_mat(H, in_dim);
    for (Matrix<S>* m : {&cell->Ui, &cell->Uf, &cell->Uo, &cell->Ug})
      *m = uniform_mat(H, H);
    cell->bi = Vector<S>::Zero(H);
    cell->bf = Vector<S>::Constant(H, static_cast<S>(cfg.forget_bias));
    cell->bo = Vector<S>::Zero(H);
    cell->bg = Vector<S>::Zero(H);
  }
  model.head_W = uniform_mat(in_dim, 2 * H);
  model.head_b = Vector<S>::Zero(in_dim);
  return model;
}

namespace detail {

template <typename S>
void clip_inplace(Matrix<S>& m, S bound) {
  m = m.cwiseMax(-bound).cwiseMin(bound);
}

template <typename S>
void clip_inplace(Vector<S>& v, S bound) {
  v = v.cwiseMax(-bound).cwiseMin(bound);
}

template <typename S>
void clip_gradients(BlstmGradients<S>& g, S bound) {
  for (LstmGradients<S>* c : {&g.fwd, &g.bwd}) {
    for (Matrix<S>* m : {&c->Wi, &c->Wf, &c->Wo, &c->Wg, &c->Ui, &c->Uf, &c->Uo,
                         &c->Ug})
      clip_inplace(*m, bound);
    for (Vector<S>* v : {&c->bi, &c->bf, &c->bo, &c->bg}) clip_inplace(*v, bound);
  }
  clip_inplace(g.head_W, bound);
  clip_inplace(g.head_b, bound);
}

template <typename S>
void apply_sgd(LstmCell<S>& cell, const LstmGradients<S>& g, S lr) {
  cell.Wi -= lr * g.Wi;
  cell.Wf -= lr * g.Wf;
  cell.Wo -= lr * g.Wo;
  cell.Wg -= lr * g.Wg;
  cell.Ui -= lr * g.Ui;
  cell.Uf -= lr * g.Uf;
  cell.Uo -= lr * g.Uo;
  cell.Ug -= lr * g.Ug;
  cell.bi -= lr * g.bi;
  cell.bf -= lr * g.bf;
  cell.bo -= lr * g.bo;
  cell.bg -= lr * g.bg;
}

}  // namespace detail

template <typename S>
struct BlstmTrainResult {
  BlstmAe<S> model;
  std::vector<double> epoch_mean_frame_sse;  // global per-frame mean
};

// One utterance per SGD step, elementwise gradient clipping, no weight decay.
template <typename S>
BlstmTrainResult<S> train_blstm_ae(const std::vector<Matrix<S>>& utterances,
                                   const BlstmTrainConfig& cfg) {
  validate(cfg);
  if (utterances.empty())
    throw std::invalid_argument("train_blstm_ae: no utterances");
  const Eigen::Index in_dim = utterances.front().rows();
  std::size_t total_frames = 0;
  for (const auto& u : utterances) {
    if (u.rows() != in_dim)
      throw std::invalid_argument("train_blstm_ae: inconsistent feature dim");
    if (u.cols() == 0)
      throw std::invalid_argument("train_blstm_ae: empty utterance");
    total_frames += static_cast<std::size_t>(u.cols());
  }

  BlstmTrainResult<S> result;
  result.model = init_blstm<S>(in_dim, cfg);
  std::vector<std::size_t> order(utterances.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng order_rng(mix_seed(cfg.seed, 0x0DDE));
  const S lr = static_cast<S>(cfg.learning_rate);
  const S bound = static_cast<S>(cfg.grad_clip);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    order_rng.shuffle(order);
    double sse_total = 0.0;
    for (const std::size_t u : order) {
      double loss = 0.0;
      BlstmGradients<S> grads =
          blstm_backprop(result.model, utterances[u], &loss);
      if (!std::isfinite(loss))
        throw NumericError("train_blstm_ae: non-finite loss");
      sse_total += loss;
      detail::clip_gradients(grads, bound);
      detail::apply_sgd(result.model.fwd, grads.fwd, lr);
      detail::apply_sgd(result.model.bwd, grads.bwd, lr);
      result.model.head_W -= lr * grads.head_W;
      result.model.head_b -= lr * grads.head_b;
    }
    result.epoch_mean_frame_sse.push_back(sse_total /
                                          static_cast<double>(total_frames));
  }
  return result;
}

// ---------------------------------------------------------------------------
// Finite-difference check over every parameter (unclipped gradients).

template <typename S>
double grad_check_blstm(const BlstmAe<S>& model, const Matrix<S>& X,
                        double eps) {
  const BlstmGradients<S> analytic = blstm_backprop(model, X);
  BlstmAe<S> probe = model;
  double worst = 0.0;
  auto probe_one = [&](S& param, double analytic_grad) {
    const S saved = param;
    param = saved + static_cast<S>(eps);
    const double up = blstm_loss(probe, X);
    param = saved - static_cast<S>(eps);
    const double down = blstm_loss(probe, X);
    param = saved;
    worst = std::max(worst, nn::relative_error(analytic_grad,
                                               (up - down) / (2.0 * eps)));
  };
  auto probe_mat = [&](Matrix<S>& m, const Matrix<S>& g) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j)
        probe_one(m(i, j), static_cast<double>(g(i, j)));
  };
  auto probe_vec = [&](Vector<S>& v, const Vector<S>& g) {
    for (Eigen::Index i = 0; i < v.size(); ++i)
      probe_one(v(i), static_cast<double>(g(i)));
  };
  LstmCell<S>* cells[2] = {&probe.fwd, &probe.bwd};
  const LstmGradients<S>* cell_grads[2] = {&analytic.fwd, &analytic.bwd};
  for (int k = 0; k < 2; ++k) {
    probe_mat(cells[k]->Wi, cell_grads[k]->Wi);
    probe_mat(cells[k]->Wf, cell_grads[k]->Wf);
    probe_mat(cells[k]->Wo, cell_grads[k]->Wo);
    probe_mat(cells[k]->Wg, cell_grads[k]->Wg);
    probe_mat(cells[k]->Ui, cell_grads[k]->Ui);
    probe_mat(cells[k]->Uf, cell_grads[k]->Uf);
    probe_mat(cells[k]->Uo, cell_grads[k]->Uo);
    probe_mat(cells[k]->Ug, cell_grads[k]->Ug);
    probe_vec(cells[k]->bi, cell_grads[k]->bi);
    probe_vec(cells[k]->bf, cell_grads[k]->bf);
    probe_vec(cells[k]->bo, cell_grads[k]->bo);
    probe_vec(cells[k]->bg, cell_grads[k]->bg);
  }
  probe_mat(probe.head_W, analytic.head_W);
  probe_vec(probe.head_b, analytic.head_b);
  return worst;
}

// Model file I/O (float models).
void save_blstm(const std::string& path, const BlstmAe<float>& model);
BlstmAe<float> load_blstm(const std::string& path);

}  // namespace affect::rnn

#endif  // AFFECTREPR_BLSTM_HPP
