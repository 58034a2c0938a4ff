// affectrepr/config.hpp

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

// Run configuration: a flat `key = value` text file describing the feature
// frontend, autoencoder architecture, and per-stage training hyperparameters.
// A canonical serialization of the scientific fields (everything except paths
// and thread count) is hashed into the provenance id stamped on artifacts.

#ifndef AFFECTREPR_CONFIG_HPP
#define AFFECTREPR_CONFIG_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "affectrepr/autoencoder.hpp"
#include "affectrepr/blstm.hpp"
#include "affectrepr/eval.hpp"
#include "affectrepr/types.hpp"

namespace affect::config {

struct RunConfig {
  std::string preset;  // informational name, may be empty
  std::uint64_t seed = 7;

  // Feature frontend. context counts neighbor frames per side (0 or 2);
  // fft513 supports context 0 only, since the feature files tag each
  // dimension layout and no five-frame 513-bin layout is defined.
  std::string feature = "fft128";  // fft513 | fft128 | logmel40
  int context = 2;

  std::vector<int> arch;  // e.g. 640,320,160,80: input then hidden sizes
  ae::ArchMode mode = ae::ArchMode::kTied;
  double corruption = 0.2;

  nn::SgdConfig pretrain;  // defaults: lr 1e-4, wd 1e-4, batch 500, 5 epochs
  // Fine-tuning pairs a larger step size with early stopping: the classifier
  // must register measurable validation gains inside the 3-epoch patience.
  eval::FinetuneConfig finetune{{1e-3, 1e-4, 500, 30, 0}, 3};
  rnn::BlstmTrainConfig recurrent;  // hidden 8, lr 1e-6, 45 epochs, clip 5

  std::string corpus_dir;  // contains manifest.tsv and wav/
  std::string work_dir;    // receives features/, models/, reports, run.log
  int threads = 0;         // 0: AFFECT_REPR_THREADS or hardware count
};

RunConfig parse_run_config_text(const std::string& text,
                                const std::string& origin);
RunConfig parse_run_config(const std::string& path);

void validate(const RunConfig& cfg);

// Dimension layout implied by feature + context.
DimKind feature_kind(const RunConfig& cfg);

// Canonical `key = value` rendering of the hash-relevant fields.
std::string canonical_config(const RunConfig& cfg);

std::uint64_t fnv1a64(const std::string& text);

// 16 lowercase hex digits of fnv1a64(canonical_config(cfg)).
std::string config_hash_hex(const RunConfig& cfg);

// Appends "stage=<stage> config=<hash> seed=<seed>" to <work_dir>/run.log.
void append_run_log(const RunConfig& cfg, const std::string& stage);

// Standard artifact locations under work_dir.
std::string feature_path(const RunConfig& cfg, const std::string& utterance_id);
std::string norm_stats_path(const RunConfig& cfg);
std::string pretrain_model_path(const RunConfig& cfg);
std::string pretrain_descriptor_path(const RunConfig& cfg);
std::string blstm_model_path(const RunConfig& cfg);
std::string finetune_model_path(const RunConfig& cfg);
std::string embeddings_path(const RunConfig& cfg);
std::string report_txt_path(const RunConfig& cfg);
std::string report_csv_path(const RunConfig& cfg);

}  // namespace affect::config

#endif  // AFFECTREPR_CONFIG_HPP
