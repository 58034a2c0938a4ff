// src/autoencoder.cpp

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

#include "affectrepr/autoencoder.hpp"

namespace affect::ae {

PretrainResult train_pretrained(const Matrix<float>& data, ArchMode mode,
                                const StackConfig& cfg,
                                const CorruptionConfig& corruption) {
  PretrainResult result;
  result.model.mode = mode;
  switch (mode) {
    case ArchMode::kTied:
    case ArchMode::kUntied: {
      StackConfig stack_cfg = cfg;
      stack_cfg.tied = (mode == ArchMode::kTied);
      auto trained = stack_pretrain<float>(data, stack_cfg, corruption);
      result.model.stack = std::move(trained.stack);
      result.epoch_mean_sse = std::move(trained.epoch_mean_sse);
      break;
    }
    case ArchMode::kDeep: {
      auto trained = train_deep_ae<float>(data, cfg, corruption);
      result.model.deep = std::move(trained.model);
      result.epoch_mean_sse.push_back(std::move(trained.epoch_mean_sse));
      break;
    }
  }
  return result;
}

std::vector<nn::DenseLayer<float>> encoder_layers(const Pretrained& model) {
  std::vector<nn::DenseLayer<float>> out;
  if (model.mode == ArchMode::kDeep) {
    for (int k = 0; k < model.deep.encoder_layers; ++k)
      out.push_back(model.deep.net[static_cast<std::size_t>(k)]);
  } else {
    for (const auto& layer : model.stack.layers) out.push_back(layer.enc);
  }
  return out;
}

FeatureMatrix encode_rows(const Pretrained& model, const FeatureMatrix& f) {
  Matrix<float> cols = f.transpose();
  cols = model.mode == ArchMode::kDeep ? encode_columns(model.deep, cols)
                                       : encode_columns(model.stack, cols);
  return FeatureMatrix(cols.transpose());
}

void save_pretrained(const std::string& path, const Pretrained& model) {
  nn::Mlp<float> net;
  if (model.mode == ArchMode::kDeep) {
    net = model.deep.net;
  } else {
    for (const auto& layer : model.stack.layers) net.push_back(layer.enc);
    for (auto it = model.stack.layers.rbegin(); it != model.stack.layers.rend();
         ++it) {
      nn::DenseLayer<float> dec;
      dec.W = it->decoder_weight();
      dec.b = it->dec_b;
      dec.act = nn::Activation::kLinear;
      net.push_back(std::move(dec));
    }
  }
  nn::save_mlp(path, net);
}

Pretrained load_pretrained(const std::string& path, ArchMode mode,
                           int encoder_layer_count) {
  const nn::Mlp<float> net = nn::load_mlp(path);
  if (static_cast<int>(net.size()) != 2 * encoder_layer_count)
    throw std::runtime_error("load_pretrained: layer count mismatch in " + path);
  Pretrained model;
  model.mode = mode;
  if (mode == ArchMode::kDeep) {
    model.deep.net = net;
    model.deep.encoder_layers = encoder_layer_count;
    return model;
  }
  for (int k = 0; k < encoder_layer_count; ++k) {
    DaeLayer<float> layer;
    layer.tied = (mode == ArchMode::kTied);
    layer.enc = net[static_cast<std::size_t>(k)];
    const auto& dec = net[static_cast<std::size_t>(2 * encoder_layer_count - 1 - k)];
    if (dec.W.rows() != layer.enc.W.cols() || dec.W.cols() != layer.enc.W.rows())
      throw std::runtime_error("load_pretrained: decoder shape mismatch in " +
                               path);
    if (layer.tied) {
      if (dec.W != Matrix<float>(layer.enc.W.transpose()))
        throw std::runtime_error(
            "load_pretrained: stored decoder is not the encoder transpose");
    } else {
      layer.dec_W = dec.W;
    }
    layer.dec_b = dec.b;
    model.stack.layers.push_back(std::move(layer));
  }
  return model;
}

}  // namespace affect::ae
