// affectrepr/pipeline.hpp

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

// Pipeline stages behind the command-line tool. Each stage reads its
// upstream artifacts from the work directory, writes its own, and appends a
// provenance line to run.log. The LOSO evaluation is self-contained (it
// fits statistics and pretrains per fold); the pretrain/train-rnn/embed
// chain shares one whole-corpus model for representation export.

#ifndef AFFECTREPR_PIPELINE_HPP
#define AFFECTREPR_PIPELINE_HPP

#include <string>
#include <vector>

#include "affectrepr/config.hpp"
#include "affectrepr/corpus.hpp"
#include "affectrepr/eval.hpp"
#include "affectrepr/wav.hpp"

namespace affect::pipeline {

// Frame + spectrogram + context windows for one waveform.
FeatureMatrix featurize_waveform(const Waveform& w, DimKind kind);

// Manifest records joined with their feature files; class_index is -1 when
// no two annotators agree on a classifier target.
std::vector<eval::LosoUtterance> load_feature_set(
    const config::RunConfig& cfg,
    const std::vector<corpus::UtteranceRecord>& records);

void run_featurize(const config::RunConfig& cfg);
void run_pretrain(const config::RunConfig& cfg);
void run_train_rnn(const config::RunConfig& cfg);
void run_finetune(const config::RunConfig& cfg, int held_out_session);
eval::LosoReport run_evaluate(const config::RunConfig& cfg);
void run_embed(const config::RunConfig& cfg);

}  // namespace affect::pipeline

#endif  // AFFECTREPR_PIPELINE_HPP
