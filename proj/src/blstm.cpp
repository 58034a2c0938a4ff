// src/blstm.cpp

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

#include "affectrepr/blstm.hpp"

#include <cstring>
#include <fstream>

namespace affect::rnn {

namespace {

constexpr char kMagic[4] = {'A', 'F', 'B', '1'};

void write_mat(std::ofstream& out, const Matrix<float>& m) {
  const RowMatrix<float> row_major = m;
  out.write(reinterpret_cast<const char*>(row_major.data()),
            static_cast<std::streamsize>(sizeof(float) * row_major.size()));
}

void write_vec(std::ofstream& out, const Vector<float>& v) {
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(sizeof(float) * v.size()));
}

Matrix<float> read_mat(std::ifstream& in, Eigen::Index rows, Eigen::Index cols,
                       const std::string& path) {
  RowMatrix<float> row_major(rows, cols);
  in.read(reinterpret_cast<char*>(row_major.data()),
          static_cast<std::streamsize>(sizeof(float) * row_major.size()));
  if (!in) throw std::runtime_error("load_blstm: truncated file " + path);
  return row_major;
}

Vector<float> read_vec(std::ifstream& in, Eigen::Index n,
                       const std::string& path) {
  Vector<float> v(n);
  in.read(reinterpret_cast<char*>(v.data()),
          static_cast<std::streamsize>(sizeof(float) * n));
  if (!in) throw std::runtime_error("load_blstm: truncated file " + path);
  return v;
}

}  // namespace

void save_blstm(const std::string& path, const BlstmAe<float>& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_blstm: cannot open " + path);
  out.write(kMagic, 4);
  const std::uint32_t in_dim = static_cast<std::uint32_t>(model.in_dim());
  const std::uint32_t hid = static_cast<std::uint32_t>(model.hid_dim());
  out.write(reinterpret_cast<const char*>(&in_dim), 4);
  out.write(reinterpret_cast<const char*>(&hid), 4);
  for (const LstmCell<float>* cell : {&model.fwd, &model.bwd}) {
    for (const Matrix<float>* m :
         {&cell->Wi, &cell->Wf, &cell->Wo, &cell->Wg, &cell->Ui, &cell->Uf,
          &cell->Uo, &cell->Ug})
      write_mat(out, *m);
    for (const Vector<float>* v : {&cell->bi, &cell->bf, &cell->bo, &cell->bg})
      write_vec(out, *v);
  }
  write_mat(out, model.head_W);
  write_vec(out, model.head_b);
  if (!out) throw std::runtime_error("save_blstm: write failed for " + path);
}

BlstmAe<float> load_blstm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingArtifactError("load_blstm: cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("load_blstm: bad magic in " + path);
  std::uint32_t in_dim = 0, hid = 0;
  in.read(reinterpret_cast<char*>(&in_dim), 4);
  in.read(reinterpret_cast<char*>(&hid), 4);
  if (!in || in_dim == 0 || hid == 0)
    throw std::runtime_error("load_blstm: bad header in " + path);
  const Eigen::Index D = static_cast<Eigen::Index>(in_dim);
  const Eigen::Index H = static_cast<Eigen::Index>(hid);
  BlstmAe<float> model;
  for (LstmCell<float>* cell : {&model.fwd, &model.bwd}) {
    for (Matrix<float>* m : {&cell->Wi, &cell->Wf, &cell->Wo, &cell->Wg})
      *m = read_mat(in, H, D, path);
    for (Matrix<float>* m : {&cell->Ui, &cell->Uf, &cell->Uo, &cell->Ug})
      *m = read_mat(in, H, H, path);
    for (Vector<float>* v : {&cell->bi, &cell->bf, &cell->bo, &cell->bg})
      *v = read_vec(in, H, path);
  }
  model.head_W = read_mat(in, D, 2 * H, path);
  model.head_b = read_vec(in, D, path);
  return model;
}

}  // namespace affect::rnn
