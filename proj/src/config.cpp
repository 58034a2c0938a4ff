// src/config.cpp

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

#include "affectrepr/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace affect::config {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void fail(const std::string& origin, std::size_t line,
                       const std::string& what) {
  throw std::invalid_argument(origin + ":" + std::to_string(line) + ": " + what);
}

double parse_double(const std::string& v, const std::string& origin,
                    std::size_t line) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    fail(origin, line, "expected a number, got '" + v + "'");
  }
}

long parse_long(const std::string& v, const std::string& origin,
                std::size_t line) {
  long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    fail(origin, line, "expected an integer, got '" + v + "'");
  return out;
}

std::vector<int> parse_int_list(const std::string& v, const std::string& origin,
                                std::size_t line) {
  std::vector<int> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) fail(origin, line, "empty list entry");
    out.push_back(static_cast<int>(parse_long(item, origin, line)));
  }
  if (out.empty()) fail(origin, line, "empty list");
  return out;
}

std::string format_double(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

RunConfig parse_run_config_text(const std::string& text,
                                const std::string& origin) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  std::vector<std::string> seen;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto comment = raw.find('#');
    if (comment != std::string::npos) raw.erase(comment);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(origin, line_no, "missing '='");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail(origin, line_no, "empty key");
    if (value.empty()) fail(origin, line_no, "empty value for '" + key + "'");
    for (const auto& s : seen)
      if (s == key) fail(origin, line_no, "duplicate key '" + key + "'");
    seen.push_back(key);

    if (key == "preset") {
      cfg.preset = value;
    } else if (key == "seed") {
      cfg.seed = static_cast<std::uint64_t>(parse_long(value, origin, line_no));
    } else if (key == "feature") {
      cfg.feature = value;
    } else if (key == "context") {
      cfg.context = static_cast<int>(parse_long(value, origin, line_no));
    } else if (key == "arch") {
      cfg.arch = parse_int_list(value, origin, line_no);
    } else if (key == "mode") {
      if (value == "tied") cfg.mode = ae::ArchMode::kTied;
      else if (value == "untied") cfg.mode = ae::ArchMode::kUntied;
      else if (value == "deep") cfg.mode = ae::ArchMode::kDeep;
      else fail(origin, line_no, "mode must be tied, untied, or deep");
    } else if (key == "corruption") {
      cfg.corruption = parse_double(value, origin, line_no);
    } else if (key == "pretrain.learning_rate") {
      cfg.pretrain.learning_rate = parse_double(value, origin, line_no);
    } else if (key == "pretrain.weight_decay") {
      cfg.pretrain.weight_decay = parse_double(value, origin, line_no);
    } else if (key == "pretrain.batch_size") {
      cfg.pretrain.batch_size = static_cast<int>(parse_long(value, origin, line_no));
    } else if (key == "pretrain.epochs") {
      cfg.pretrain.epochs = static_cast<int>(parse_long(value, origin, line_no));
    } else if (key == "finetune.learning_rate") {
      cfg.finetune.sgd.learning_rate = parse_double(value, origin, line_no);
    } else if (key == "finetune.weight_decay") {
      cfg.finetune.sgd.weight_decay = parse_double(value, origin, line_no);
    } else if (key == "finetune.batch_size") {
      cfg.finetune.sgd.batch_size = static_cast<int>(parse_long(value, origin, line_no));
    } else if (key == "finetune.epochs") {
      cfg.finetune.sgd.epochs = static_cast<int>(parse_long(value, origin, line_no));
    } else if (key == "finetune.patience") {
      cfg.finetune.patience = static_cast<int>(parse_long(value, origin, line_no));
    } else if (key == "recurrent.hidden_dim") {
      cfg.recurrent.hidden_dim = static_cast<int>(parse_long(value, origin, line_no));
    } else if (key == "recurrent.learning_rate") {
      cfg.recurrent.learning_rate = parse_double(value, origin, line_no);
    } else if (key == "recurrent.epochs") {
      cfg.recurrent.epochs = static_cast<int>(parse_long(value, origin, line_no));
    } else if (key == "recurrent.grad_clip") {
      cfg.recurrent.grad_clip = parse_double(value, origin, line_no);
    } else if (key == "paths.corpus") {
      cfg.corpus_dir = value;
    } else if (key == "paths.work") {
      cfg.work_dir = value;
    } else if (key == "threads") {
      cfg.threads = static_cast<int>(parse_long(value, origin, line_no));
    } else {
      fail(origin, line_no, "unknown key '" + key + "'");
    }
  }
  return cfg;
}

RunConfig parse_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MissingArtifactError("config file not found: " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_run_config_text(text.str(), path);
}

DimKind feature_kind(const RunConfig& cfg) {
  if (cfg.feature == "fft513") {
    if (cfg.context == 0) return DimKind::kFft513;
    throw std::invalid_argument("config: fft513 supports context = 0 only");
  }
  if (cfg.feature == "fft128") {
    if (cfg.context == 0) return DimKind::kFft128;
    if (cfg.context == 2) return DimKind::kCtx5Fft128;
  } else if (cfg.feature == "logmel40") {
    if (cfg.context == 0) return DimKind::kLogMel40;
    if (cfg.context == 2) return DimKind::kCtx5LogMel40;
  } else {
    throw std::invalid_argument("config: feature must be fft513, fft128, or logmel40");
  }
  throw std::invalid_argument("config: context must be 0 or 2");
}

void validate(const RunConfig& cfg) {
  const DimKind kind = feature_kind(cfg);
  if (cfg.arch.empty())
    throw std::invalid_argument("config: arch is required");
  if (cfg.arch.front() != static_cast<int>(dim_of(kind)))
    throw std::invalid_argument(
        "config: arch[0] = " + std::to_string(cfg.arch.front()) +
        " does not match " + std::string(name_of(kind)) + " dimension " +
        std::to_string(dim_of(kind)));
  if (cfg.arch.size() < 2)
    throw std::invalid_argument("config: arch needs at least one hidden size");
  if (cfg.corruption < 0.0 || cfg.corruption >= 1.0)
    throw std::invalid_argument("config: corruption outside [0, 1)");
  nn::validate(cfg.pretrain);
  eval::validate(cfg.finetune);
  rnn::validate(cfg.recurrent);
  if (cfg.threads < 0)
    throw std::invalid_argument("config: threads must be >= 0");
}

std::string canonical_config(const RunConfig& cfg) {
  std::ostringstream out;
  out << "arch = ";
  for (std::size_t i = 0; i < cfg.arch.size(); ++i)
    out << (i ? "," : "") << cfg.arch[i];
  out << '\n';
  out << "context = " << cfg.context << '\n';
  out << "corruption = " << format_double(cfg.corruption) << '\n';
  out << "feature = " << cfg.feature << '\n';
  out << "finetune.batch_size = " << cfg.finetune.sgd.batch_size << '\n';
  out << "finetune.epochs = " << cfg.finetune.sgd.epochs << '\n';
  out << "finetune.learning_rate = " << format_double(cfg.finetune.sgd.learning_rate) << '\n';
  out << "finetune.patience = " << cfg.finetune.patience << '\n';
  out << "finetune.weight_decay = " << format_double(cfg.finetune.sgd.weight_decay) << '\n';
  out << "mode = " << ae::name_of(cfg.mode) << '\n';
  out << "pretrain.batch_size = " << cfg.pretrain.batch_size << '\n';
  out << "pretrain.epochs = " << cfg.pretrain.epochs << '\n';
  out << "pretrain.learning_rate = " << format_double(cfg.pretrain.learning_rate) << '\n';
  out << "pretrain.weight_decay = " << format_double(cfg.pretrain.weight_decay) << '\n';
  out << "recurrent.epochs = " << cfg.recurrent.epochs << '\n';
  out << "recurrent.grad_clip = " << format_double(cfg.recurrent.grad_clip) << '\n';
  out << "recurrent.hidden_dim = " << cfg.recurrent.hidden_dim << '\n';
  out << "recurrent.learning_rate = " << format_double(cfg.recurrent.learning_rate) << '\n';
  out << "seed = " << cfg.seed << '\n';
  return out.str();
}

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t hash = 0xCBF29CE484222325ULL;
  for (const unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001B3ULL;
  }
  return hash;
}

std::string config_hash_hex(const RunConfig& cfg) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(canonical_config(cfg))));
  return buf;
}

void append_run_log(const RunConfig& cfg, const std::string& stage) {
  std::ofstream out(cfg.work_dir + "/run.log", std::ios::app);
  if (!out)
    throw std::runtime_error("cannot open run log in " + cfg.work_dir);
  out << "stage=" << stage << " config=" << config_hash_hex(cfg)
      << " seed=" << cfg.seed << '\n';
}

std::string feature_path(const RunConfig& cfg, const std::string& utterance_id) {
  return cfg.work_dir + "/features/" + utterance_id + ".afr";
}
std::string norm_stats_path(const RunConfig& cfg) {
  return cfg.work_dir + "/models/norm.afr";
}
std::string pretrain_model_path(const RunConfig& cfg) {
  return cfg.work_dir + "/models/pretrain.afm";
}
std::string pretrain_descriptor_path(const RunConfig& cfg) {
  return cfg.work_dir + "/models/pretrain.desc";
}
std::string blstm_model_path(const RunConfig& cfg) {
  return cfg.work_dir + "/models/blstm.afb";
}
std::string finetune_model_path(const RunConfig& cfg) {
  return cfg.work_dir + "/models/finetune.afm";
}
std::string embeddings_path(const RunConfig& cfg) {
  return cfg.work_dir + "/embeddings.txt";
}
std::string report_txt_path(const RunConfig& cfg) {
  return cfg.work_dir + "/report.txt";
}
std::string report_csv_path(const RunConfig& cfg) {
  return cfg.work_dir + "/report.csv";
}

}  // namespace affect::config
