// affectrepr/dsp.hpp

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

#ifndef AFFECTREPR_DSP_HPP
#define AFFECTREPR_DSP_HPP

#include <complex>
#include <string>
#include <utility>
#include <vector>

#include "affectrepr/types.hpp"
#include "affectrepr/wav.hpp"

namespace affect::dsp {

// Log floor applied to magnitudes and mel energies.
constexpr double kLogEps = 1e-6;
// Standard deviation floor for z-scoring.
constexpr float kStdFloor = 1e-8f;

enum class Window { kHamming };

struct FrameConfig {
  double width_ms = 20.0;
  double hop_ms = 10.0;
  Window window = Window::kHamming;
};

// Splits a waveform into tapered frames. Frame t covers samples
// [t*hop, t*hop + width); the final partial frame is zero-padded.
// Throws if the waveform is shorter than one frame.
RowMatrix<float> frame_signal(const Waveform& w, const FrameConfig& cfg = {});

// In-place iterative radix-2 FFT (forward, e^{-2*pi*i*k*n/N}); size must be a
// power of two. Exposed so tests can check it against a direct DFT.
void fft_radix2(std::vector<std::complex<double>>& data);

// Log-compressed magnitude spectrogram. bins selects the transform:
// 513 bins keep indices 0..512 of a 1024-point transform, 128 bins keep
// indices 0..127 of a 256-point transform (Nyquist bin dropped). Frames are
// truncated or zero-padded to the transform length.
FeatureMatrix magnitude_spectrogram(const RowMatrix<float>& frames, int bins);

// One triangular mel filter over FFT bins [first_bin, first_bin + size).
struct MelFilter {
  int first_bin = 0;
  std::vector<float> weights;  // all >= 0, positive total
  double center_hz = 0.0;      // the triangle's peak
};

// Triangular filters with peaks evenly spaced on the mel scale
// m = 2595*log10(1 + f/700) between f_min and f_max.
std::vector<MelFilter> make_mel_filterbank(int num_filters, int nfft,
                                           double sample_rate, double f_min,
                                           double f_max);

// 40-channel log-mel spectrogram from a 1024-point magnitude spectrum,
// filters spanning 0-8000 Hz.
FeatureMatrix logmel_spectrogram(const RowMatrix<float>& frames);

// Output row t is the concatenation of rows t-K..t+K; rows past either edge
// replicate the edge frame, so the row count is unchanged.
FeatureMatrix build_context_windows(const FeatureMatrix& f, int K);

struct NormStats {
  Vector<float> mean;
  Vector<float> stddev;  // floored at kStdFloor
};

// Per-dimension mean/std over every row of the training matrices.
NormStats fit_norm_stats(const std::vector<FeatureMatrix>& train);

FeatureMatrix apply_norm(const FeatureMatrix& f, const NormStats& stats);

// Feature file: magic "AFR1", u32 rows, u32 cols, u8 dim-kind tag, then
// row-major 32-bit floats, little-endian.
void write_feature_file(const std::string& path, const FeatureMatrix& f,
                        DimKind kind);
std::pair<FeatureMatrix, DimKind> read_feature_file(const std::string& path);

}  // namespace affect::dsp

#endif  // AFFECTREPR_DSP_HPP
