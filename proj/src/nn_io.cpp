// src/nn_io.cpp

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

#include <cstring>
#include <fstream>

#include "affectrepr/nn.hpp"

namespace affect::nn {

void save_mlp(const std::string& path, const Mlp<float>& net) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("save_mlp: cannot open " + path);
  out.write("AFM1", 4);
  const std::uint32_t count = static_cast<std::uint32_t>(net.size());
  out.write(reinterpret_cast<const char*>(&count), 4);
  for (const auto& layer : net) {
    const std::uint32_t rows = static_cast<std::uint32_t>(layer.W.rows());
    const std::uint32_t cols = static_cast<std::uint32_t>(layer.W.cols());
    const std::uint8_t act = static_cast<std::uint8_t>(layer.act);
    out.write(reinterpret_cast<const char*>(&rows), 4);
    out.write(reinterpret_cast<const char*>(&cols), 4);
    out.write(reinterpret_cast<const char*>(&act), 1);
    // W is stored row-major on disk.
    const RowMatrix<float> w = layer.W;
    out.write(reinterpret_cast<const char*>(w.data()),
              static_cast<std::streamsize>(sizeof(float)) * w.size());
    out.write(reinterpret_cast<const char*>(layer.b.data()),
              static_cast<std::streamsize>(sizeof(float)) * layer.b.size());
  }
  if (!out) throw std::runtime_error("save_mlp: write failed: " + path);
}

Mlp<float> load_mlp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingArtifactError("model file missing: " + path);
  char magic[4];
  std::uint32_t count = 0;
  in.read(magic, 4);
  in.read(reinterpret_cast<char*>(&count), 4);
  if (!in || std::memcmp(magic, "AFM1", 4) != 0)
    throw std::runtime_error("load_mlp: bad header: " + path);
  Mlp<float> net;
  net.reserve(count);
  for (std::uint32_t k = 0; k < count; ++k) {
    std::uint32_t rows = 0, cols = 0;
    std::uint8_t act = 0;
    in.read(reinterpret_cast<char*>(&rows), 4);
    in.read(reinterpret_cast<char*>(&cols), 4);
    in.read(reinterpret_cast<char*>(&act), 1);
    if (!in || act > static_cast<std::uint8_t>(Activation::kSoftmax))
      throw std::runtime_error("load_mlp: bad layer header: " + path);
    RowMatrix<float> w(rows, cols);
    in.read(reinterpret_cast<char*>(w.data()),
            static_cast<std::streamsize>(sizeof(float)) * w.size());
    DenseLayer<float> layer;
    layer.W = w;
    layer.b.resize(rows);
    in.read(reinterpret_cast<char*>(layer.b.data()),
            static_cast<std::streamsize>(sizeof(float)) * layer.b.size());
    layer.act = static_cast<Activation>(act);
    if (!in) throw std::runtime_error("load_mlp: truncated: " + path);
    net.push_back(std::move(layer));
  }
  return net;
}

}  // namespace affect::nn
