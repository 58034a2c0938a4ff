// affectrepr/wav.hpp

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

#ifndef AFFECTREPR_WAV_HPP
#define AFFECTREPR_WAV_HPP

#include <string>
#include <vector>

namespace affect {

// Mono speech waveform, samples scaled to [-1, 1].
struct Waveform {
  std::vector<float> samples;
  int sample_rate = 16000;
};

// Reads a RIFF WAV file. Requires PCM signed 16-bit little-endian, mono.
Waveform read_wav(const std::string& path);

// Writes samples as mono 16-bit PCM. Values are clamped to [-1, 1].
void write_wav(const std::string& path, const Waveform& w);

}  // namespace affect

#endif  // AFFECTREPR_WAV_HPP
