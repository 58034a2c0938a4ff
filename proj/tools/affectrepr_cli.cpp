// tools/affectrepr_cli.cpp

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

// Command-line front end. Exit codes: 0 success, 2 usage or bad config,
// 3 missing upstream artifact, 4 numeric failure during training.

#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "affectrepr/config.hpp"
#include "affectrepr/corpus.hpp"
#include "affectrepr/pipeline.hpp"

namespace {

struct StageArgs {
  std::string config_path;
  std::string corpus_dir;
  std::string work_dir;
  int threads = -1;
  int session = 1;
};

void add_stage_options(CLI::App* cmd, StageArgs* args) {
  cmd->add_option("--config", args->config_path, "run configuration file")
      ->required();
  cmd->add_option("--corpus", args->corpus_dir,
                  "corpus directory (overrides paths.corpus)");
  cmd->add_option("--work", args->work_dir,
                  "artifact directory (overrides paths.work)");
  cmd->add_option("--threads", args->threads,
                  "worker cap (overrides config and AFFECT_REPR_THREADS)");
}

affect::config::RunConfig resolve(const StageArgs& args) {
  affect::config::RunConfig cfg =
      affect::config::parse_run_config(args.config_path);
  if (!args.corpus_dir.empty()) cfg.corpus_dir = args.corpus_dir;
  if (!args.work_dir.empty()) cfg.work_dir = args.work_dir;
  if (args.threads >= 0) cfg.threads = args.threads;
  if (cfg.corpus_dir.empty())
    throw std::invalid_argument("no corpus directory (paths.corpus or --corpus)");
  if (cfg.work_dir.empty())
    throw std::invalid_argument("no work directory (paths.work or --work)");
  affect::config::validate(cfg);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"unsupervised affect representations: pipeline driver"};
  app.require_subcommand(1);

  auto* synth = app.add_subcommand("synth", "generate the synthetic corpus");
  affect::corpus::SyntheticSpec spec;
  std::string synth_out;
  synth->add_option("--classes", spec.class_count, "number of classes (4)");
  synth->add_option("--per-class", spec.utterances_per_class,
                    "utterances per class");
  synth->add_option("--seed", spec.seed, "corpus seed");
  synth->add_option("--out", synth_out, "output directory")->required();

  StageArgs featurize_args, pretrain_args, rnn_args, finetune_args,
      evaluate_args, embed_args;
  auto* featurize =
      app.add_subcommand("featurize", "extract features for every utterance");
  add_stage_options(featurize, &featurize_args);
  auto* pretrain = app.add_subcommand(
      "pretrain", "train the denoising autoencoder on the whole corpus");
  add_stage_options(pretrain, &pretrain_args);
  auto* train_rnn = app.add_subcommand(
      "train-rnn", "train the recurrent autoencoder on bottleneck sequences");
  add_stage_options(train_rnn, &rnn_args);
  auto* finetune = app.add_subcommand(
      "finetune", "fine-tune a classifier from the shared pretrained model");
  add_stage_options(finetune, &finetune_args);
  finetune->add_option("--session", finetune_args.session,
                       "held-out session (1-5)");
  auto* evaluate = app.add_subcommand(
      "evaluate", "leave-one-session-out evaluation (self-contained)");
  add_stage_options(evaluate, &evaluate_args);
  auto* embed = app.add_subcommand(
      "embed", "export utterance embeddings from the recurrent autoencoder");
  add_stage_options(embed, &embed_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (synth->parsed()) {
      affect::corpus::gen_synthetic_corpus(spec, synth_out);
      std::cout << "synth: " << spec.class_count * spec.utterances_per_class
                << " utterances -> " << synth_out << '\n';
    } else if (featurize->parsed()) {
      affect::pipeline::run_featurize(resolve(featurize_args));
    } else if (pretrain->parsed()) {
      affect::pipeline::run_pretrain(resolve(pretrain_args));
    } else if (train_rnn->parsed()) {
      affect::pipeline::run_train_rnn(resolve(rnn_args));
    } else if (finetune->parsed()) {
      affect::pipeline::run_finetune(resolve(finetune_args),
                                     finetune_args.session);
    } else if (evaluate->parsed()) {
      affect::pipeline::run_evaluate(resolve(evaluate_args));
    } else if (embed->parsed()) {
      affect::pipeline::run_embed(resolve(embed_args));
    }
  } catch (const affect::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return 4;
  } catch (const affect::MissingArtifactError& e) {
    std::cerr << "missing artifact: " << e.what() << '\n';
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
