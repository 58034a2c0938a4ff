// affectrepr/corpus.hpp

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

#ifndef AFFECTREPR_CORPUS_HPP
#define AFFECTREPR_CORPUS_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace affect::corpus {

// Annotator vote categories. Only the first four are classification targets;
// the rest occur in votes and keep an utterance in the pretraining pool.
enum class Emotion : int {
  kNeutral = 0,
  kAngry = 1,
  kSad = 2,
  kHappy = 3,
  kExcitement = 4,
  kSurprise = 5,
  kOther = 6,
};

constexpr int kNumClasses = 4;  // classifier targets, order above

const char* emotion_name(Emotion e);
std::optional<Emotion> parse_emotion(const std::string& name);

// Index 0..3 for classification targets, nullopt for the rest.
std::optional<int> class_index(Emotion e);

// One manifest line: an audio reference plus three annotators' labels.
struct UtteranceRecord {
  std::string utterance_id;
  std::string audio_path;  // relative to the manifest's directory
  int session_id = 0;      // 1..5
  std::string speaker_id;
  std::array<Emotion, 3> emotion_votes{};
  std::array<int, 3> activation_votes{};  // Likert 1..5
  std::array<int, 3> valence_votes{};     // Likert 1..5
};

struct ResolvedLabel {
  // Present iff at least 2 of 3 votes agree on one of the four targets.
  std::optional<Emotion> emotion;
  double activation = 0.0;  // mean of the three votes
  double valence = 0.0;
};

struct Fold {
  int held_out_session = 0;
  std::set<int> train_sessions;
  std::string validation_speaker;
  std::string test_speaker;
};

// Five leave-one-session-out splits; each session held out exactly once.
struct FoldPlan {
  std::array<Fold, 5> folds;
};

// Parses a tab-separated key=value manifest. Errors name the 1-based line.
std::vector<UtteranceRecord> load_manifest(const std::string& path);

void write_manifest(const std::string& path,
                    const std::vector<UtteranceRecord>& records);

ResolvedLabel resolve_label(const UtteranceRecord& record);

// Requires records spanning exactly 5 sessions with 2 distinct speakers each.
// The lexicographically smaller held-out speaker becomes the validation
// speaker, the other the test speaker.
FoldPlan make_loso_folds(const std::vector<UtteranceRecord>& records);

// ---------------------------------------------------------------------------
// Synthetic stand-in corpus. Each pseudo-emotion class occupies a frequency
// band disjoint from the others and carries its own amplitude-modulation
// rate, so the classes are separable in mel space by construction.

struct SyntheticSpec {
  int class_count = 4;  // must be 4
  int utterances_per_class = 25;
  std::uint64_t seed = 7;
};

struct ClassBand {
  double lo_hz = 0.0;
  double hi_hz = 0.0;
  double am_rate_hz = 0.0;
};

// Construction parameters for pseudo-emotion class c (0..3).
ClassBand synthetic_class_band(int c);

// Writes <out_dir>/manifest.tsv and <out_dir>/wav/*.wav (mono 16 kHz PCM16,
// 2-5 s with leading/trailing silence). Deterministic under spec.seed.
void gen_synthetic_corpus(const SyntheticSpec& spec,
                          const std::string& out_dir);

}  // namespace affect::corpus

#endif  // AFFECTREPR_CORPUS_HPP
