// src/corpus.cpp

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

#include "affectrepr/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "affectrepr/rng.hpp"
#include "affectrepr/types.hpp"
#include "affectrepr/wav.hpp"

namespace affect::corpus {

namespace {

const char* const kEmotionNames[] = {"neutral",    "angry",    "sad",
                                     "happy",      "excitement", "surprise",
                                     "other"};

[[noreturn]] void manifest_error(const std::string& path, int line,
                                 const std::string& what) {
  std::ostringstream os;
  os << "manifest " << path << " line " << line << ": " << what;
  throw std::runtime_error(os.str());
}

int parse_int_field(const std::string& value, const std::string& key,
                    const std::string& path, int line) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    manifest_error(path, line, "field " + key + " is not an integer: '" +
                                   value + "'");
  }
}

}  // namespace

const char* emotion_name(Emotion e) {
  return kEmotionNames[static_cast<int>(e)];
}

std::optional<Emotion> parse_emotion(const std::string& name) {
  for (int i = 0; i < 7; ++i)
    if (name == kEmotionNames[i]) return static_cast<Emotion>(i);
  return std::nullopt;
}

std::optional<int> class_index(Emotion e) {
  const int i = static_cast<int>(e);
  if (i < kNumClasses) return i;
  return std::nullopt;
}

std::vector<UtteranceRecord> load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MissingArtifactError("load_manifest: cannot open " + path);
  std::vector<UtteranceRecord> records;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::map<std::string, std::string> kv;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, '\t')) {
      if (field.empty()) continue;
      const std::size_t eq = field.find('=');
      if (eq == std::string::npos)
        manifest_error(path, line_no, "field without '=': '" + field + "'");
      kv[field.substr(0, eq)] = field.substr(eq + 1);
    }
    UtteranceRecord rec;
    auto require = [&](const char* key) -> const std::string& {
      auto it = kv.find(key);
      if (it == kv.end())
        manifest_error(path, line_no, std::string("missing field ") + key);
      return it->second;
    };
    rec.utterance_id = require("id");
    rec.audio_path = require("path");
    rec.session_id = parse_int_field(require("session"), "session", path,
                                     line_no);
    if (rec.session_id < 1 || rec.session_id > 5)
      manifest_error(path, line_no,
                     "unknown session id " + std::to_string(rec.session_id));
    rec.speaker_id = require("speaker");
    // Exactly three votes per annotation dimension. A missing emoN/actN/valN
    // key is a vote-list length violation.
    for (int i = 0; i < 3; ++i) {
      const std::string n = std::to_string(i + 1);
      {
        auto it = kv.find("emo" + n);
        if (it == kv.end())
          manifest_error(path, line_no,
                         "expected 3 emotion votes, emo" + n + " missing");
        const auto emo = parse_emotion(it->second);
        if (!emo)
          manifest_error(path, line_no,
                         "unknown emotion label '" + it->second + "'");
        rec.emotion_votes[i] = *emo;
      }
      for (const char* prefix : {"act", "val"}) {
        auto it = kv.find(prefix + n);
        if (it == kv.end())
          manifest_error(path, line_no, std::string("expected 3 ") + prefix +
                                            " votes, " + prefix + n +
                                            " missing");
        const int v = parse_int_field(it->second, prefix + n, path, line_no);
        if (v < 1 || v > 5)
          manifest_error(path, line_no, std::string(prefix) + n +
                                            " outside Likert range 1..5");
        (prefix[0] == 'a' ? rec.activation_votes : rec.valence_votes)[i] = v;
      }
    }
    records.push_back(std::move(rec));
  }
  return records;
}

void write_manifest(const std::string& path,
                    const std::vector<UtteranceRecord>& records) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("write_manifest: cannot open " + path);
  for (const auto& r : records) {
    out << "id=" << r.utterance_id << "\tpath=" << r.audio_path
        << "\tsession=" << r.session_id << "\tspeaker=" << r.speaker_id;
    for (int i = 0; i < 3; ++i)
      out << "\temo" << i + 1 << '=' << emotion_name(r.emotion_votes[i]);
    for (int i = 0; i < 3; ++i)
      out << "\tact" << i + 1 << '=' << r.activation_votes[i];
    for (int i = 0; i < 3; ++i)
      out << "\tval" << i + 1 << '=' << r.valence_votes[i];
    out << '\n';
  }
  if (!out) throw std::runtime_error("write_manifest: write failed: " + path);
}

ResolvedLabel resolve_label(const UtteranceRecord& record) {
  ResolvedLabel out;
  // Majority = some target category collecting at least 2 of the 3 votes.
  for (int c = 0; c < kNumClasses; ++c) {
    int votes = 0;
    for (const Emotion e : record.emotion_votes)
      if (static_cast<int>(e) == c) ++votes;
    if (votes >= 2) {
      out.emotion = static_cast<Emotion>(c);
      break;
    }
  }
  double act = 0.0, val = 0.0;
  for (int i = 0; i < 3; ++i) {
    act += record.activation_votes[i];
    val += record.valence_votes[i];
  }
  out.activation = act / 3.0;
  out.valence = val / 3.0;
  return out;
}

FoldPlan make_loso_folds(const std::vector<UtteranceRecord>& records) {
  std::map<int, std::set<std::string>> speakers_by_session;
  for (const auto& r : records)
    speakers_by_session[r.session_id].insert(r.speaker_id);
  if (speakers_by_session.size() != 5)
    throw std::runtime_error("make_loso_folds: expected 5 sessions, found " +
                             std::to_string(speakers_by_session.size()));
  for (const auto& [session, speakers] : speakers_by_session)
    if (speakers.size() != 2)
      throw std::runtime_error("make_loso_folds: session " +
                               std::to_string(session) + " has " +
                               std::to_string(speakers.size()) +
                               " speakers, expected 2");
  FoldPlan plan;
  int i = 0;
  for (const auto& [session, speakers] : speakers_by_session) {
    Fold& fold = plan.folds[static_cast<std::size_t>(i++)];
    fold.held_out_session = session;
    for (const auto& [other, _] : speakers_by_session)
      if (other != session) fold.train_sessions.insert(other);
    // std::set iterates in lexicographic order: first is validation.
    auto it = speakers.begin();
    fold.validation_speaker = *it++;
    fold.test_speaker = *it;
  }
  return plan;
}

// ---------------------------------------------------------------------------
// Synthetic corpus

ClassBand synthetic_class_band(int c) {
  // Disjoint bands with generous gaps plus distinct AM rates.
  static const ClassBand kBands[4] = {
      {400.0, 800.0, 2.0},     // pseudo-neutral
      {1200.0, 1700.0, 5.0},   // pseudo-angry
      {2300.0, 2900.0, 8.5},   // pseudo-sad
      {3600.0, 4400.0, 13.0},  // pseudo-happy
  };
  if (c < 0 || c >= 4)
    throw std::invalid_argument("synthetic_class_band: class out of range");
  return kBands[c];
}

namespace {

// Dimension-rating templates per pseudo-class: {activation, valence}.
// High activation for angry/happy, low for sad; valence negative for
// angry/sad, positive for happy.
constexpr int kDimTemplate[4][2] = {{3, 3}, {5, 1}, {2, 2}, {4, 5}};

Waveform synth_utterance(int cls, double pitch_factor, Rng& rng) {
  const int rate = 16000;
  const ClassBand band = synthetic_class_band(cls);
  const double duration = 2.2 + rng.uniform() * 2.6;  // within [2, 5] s
  const double lead = 0.15 + rng.uniform() * 0.15;
  const double tail = 0.15 + rng.uniform() * 0.15;
  const int n = static_cast<int>(std::lround(duration * rate));
  const int voiced_begin = static_cast<int>(std::lround(lead * rate));
  const int voiced_end = n - static_cast<int>(std::lround(tail * rate));

  // Three formant-like carriers at fixed positions inside the class band.
  // The speaker pitch factor stays small enough to keep them in-band.
  const double carrier_fracs[3] = {0.10, 0.40, 0.70};
  const double carrier_amps[3] = {1.0, 0.6, 0.4};
  double carriers[3];
  double phases[3];
  for (int j = 0; j < 3; ++j) {
    carriers[j] =
        (band.lo_hz + carrier_fracs[j] * (band.hi_hz - band.lo_hz)) *
        pitch_factor;
    phases[j] = rng.uniform() * 2.0 * std::numbers::pi;
  }
  const double am_phase = rng.uniform() * 2.0 * std::numbers::pi;
  const double peak = 0.45 + rng.uniform() * 0.15;
  const int ramp = rate / 20;  // 50 ms onset/offset

  Waveform w;
  w.sample_rate = rate;
  w.samples.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double x = (rng.uniform() - 0.5) * 0.02;  // noise floor everywhere
    if (i >= voiced_begin && i < voiced_end) {
      const double t = static_cast<double>(i) / rate;
      double tone = 0.0;
      for (int j = 0; j < 3; ++j)
        tone += carrier_amps[j] *
                std::sin(2.0 * std::numbers::pi * carriers[j] * t + phases[j]);
      const double am =
          0.55 + 0.45 * std::sin(2.0 * std::numbers::pi * band.am_rate_hz * t +
                                 am_phase);
      double env = 1.0;
      if (i - voiced_begin < ramp)
        env = static_cast<double>(i - voiced_begin) / ramp;
      else if (voiced_end - 1 - i < ramp)
        env = static_cast<double>(voiced_end - 1 - i) / ramp;
      x += peak / 2.0 * am * env * tone;
    }
    w.samples[static_cast<std::size_t>(i)] = static_cast<float>(x);
  }
  return w;
}

}  // namespace

void gen_synthetic_corpus(const SyntheticSpec& spec,
                          const std::string& out_dir) {
  if (spec.class_count != 4)
    throw std::invalid_argument("gen_synthetic_corpus: class_count must be 4");
  if (spec.utterances_per_class < 1)
    throw std::invalid_argument(
        "gen_synthetic_corpus: utterances_per_class must be >= 1");
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(fs::path(out_dir) / "wav", ec);
  if (ec)
    throw std::runtime_error("gen_synthetic_corpus: cannot create " + out_dir +
                             ": " + ec.message());

  Rng rng(spec.seed);
  std::vector<UtteranceRecord> records;
  int counter = 0;
  for (int cls = 0; cls < spec.class_count; ++cls) {
    for (int u = 0; u < spec.utterances_per_class; ++u, ++counter) {
      // Round-robin over the 10 pseudo-speaker slots so every speaker sees
      // utterances from every class once there are enough of them.
      const int slot = counter % 10;
      const int session = slot / 2 + 1;
      const bool second_speaker = (slot % 2) == 1;
      const double pitch_factor = second_speaker ? 1.04 : 1.0;

      char id[32];
      std::snprintf(id, sizeof(id), "c%d_u%03d", cls, u);
      char speaker[16];
      std::snprintf(speaker, sizeof(speaker), "s%d%c", session,
                    second_speaker ? 'm' : 'f');

      UtteranceRecord rec;
      rec.utterance_id = id;
      rec.audio_path = std::string("wav/") + id + ".wav";
      rec.session_id = session;
      rec.speaker_id = speaker;
      const Emotion emo = static_cast<Emotion>(cls);
      rec.emotion_votes = {emo, emo, emo};  // unanimous by construction
      for (int i = 0; i < 3; ++i) {
        const int jitter = static_cast<int>(rng.uniform_int(3)) - 1;
        rec.activation_votes[i] =
            std::clamp(kDimTemplate[cls][0] + jitter, 1, 5);
        const int jitter2 = static_cast<int>(rng.uniform_int(3)) - 1;
        rec.valence_votes[i] = std::clamp(kDimTemplate[cls][1] + jitter2, 1, 5);
      }
      const Waveform w = synth_utterance(cls, pitch_factor, rng);
      write_wav((fs::path(out_dir) / rec.audio_path).string(), w);
      records.push_back(std::move(rec));
    }
  }
  write_manifest((fs::path(out_dir) / "manifest.tsv").string(), records);
}

}  // namespace affect::corpus
