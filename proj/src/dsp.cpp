// src/dsp.cpp

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

#include "affectrepr/dsp.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numbers>
#include <stdexcept>

namespace affect::dsp {

namespace {

int samples_from_ms(double ms, int rate) {
  return static_cast<int>(std::lround(ms * rate / 1000.0));
}

std::vector<double> make_taper(Window window, int len) {
  std::vector<double> taper(static_cast<std::size_t>(len));
  switch (window) {
    case Window::kHamming:
      for (int n = 0; n < len; ++n)
        taper[static_cast<std::size_t>(n)] =
            0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * n / (len - 1));
      break;
  }
  return taper;
}

// Frame count so that every sample is covered by at least one frame.
Eigen::Index frame_count(Eigen::Index n, int width, int hop) {
  if (n <= width) return 1;
  return (n - width + hop - 1) / hop + 1;
}

// Magnitudes of the nfft-point transform of one tapered frame. The frame is
// truncated or zero-padded to nfft.
void frame_magnitudes(const RowMatrix<float>& frames, Eigen::Index t, int nfft,
                      std::vector<std::complex<double>>& scratch,
                      std::vector<double>& mags) {
  scratch.assign(static_cast<std::size_t>(nfft), {0.0, 0.0});
  const int copy = static_cast<int>(
      std::min<Eigen::Index>(frames.cols(), nfft));
  for (int i = 0; i < copy; ++i)
    scratch[static_cast<std::size_t>(i)] = {static_cast<double>(frames(t, i)),
                                            0.0};
  fft_radix2(scratch);
  mags.resize(static_cast<std::size_t>(nfft));
  for (int k = 0; k < nfft; ++k)
    mags[static_cast<std::size_t>(k)] = std::abs(scratch[static_cast<std::size_t>(k)]);
}

double hz_to_mel(double f) { return 2595.0 * std::log10(1.0 + f / 700.0); }
double mel_to_hz(double m) {
  return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0);
}

}  // namespace

RowMatrix<float> frame_signal(const Waveform& w, const FrameConfig& cfg) {
  if (w.samples.empty()) throw std::invalid_argument("frame_signal: empty waveform");
  if (cfg.width_ms <= cfg.hop_ms || cfg.hop_ms <= 0.0)
    throw std::invalid_argument("frame_signal: need width > hop > 0");
  const int width = samples_from_ms(cfg.width_ms, w.sample_rate);
  const int hop = samples_from_ms(cfg.hop_ms, w.sample_rate);
  const Eigen::Index n = static_cast<Eigen::Index>(w.samples.size());
  if (n < width)
    throw std::invalid_argument("frame_signal: waveform shorter than one frame");
  const std::vector<double> taper = make_taper(cfg.window, width);
  const Eigen::Index T = frame_count(n, width, hop);
  RowMatrix<float> frames(T, width);
  for (Eigen::Index t = 0; t < T; ++t) {
    const Eigen::Index start = t * hop;
    for (int i = 0; i < width; ++i) {
      const Eigen::Index src = start + i;
      const double s =
          src < n ? static_cast<double>(w.samples[static_cast<std::size_t>(src)])
                  : 0.0;
      frames(t, i) = static_cast<float>(s * taper[static_cast<std::size_t>(i)]);
    }
  }
  return frames;
}

void fft_radix2(std::vector<std::complex<double>>& data) {
  const std::size_t n = data.size();
  if (n == 0 || (n & (n - 1)) != 0)
    throw std::invalid_argument("fft_radix2: size must be a power of two");
  // Bit-reversal permutation.
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(data[i], data[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double angle = -2.0 * std::numbers::pi / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(angle), std::sin(angle));
    for (std::size_t base = 0; base < n; base += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = data[base + k];
        const std::complex<double> v = data[base + k + len / 2] * w;
        data[base + k] = u + v;
        data[base + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

FeatureMatrix magnitude_spectrogram(const RowMatrix<float>& frames, int bins) {
  int nfft = 0;
  if (bins == 513)
    nfft = 1024;
  else if (bins == 128)
    nfft = 256;
  else
    throw std::invalid_argument("magnitude_spectrogram: bins must be 513 or 128");
  FeatureMatrix out(frames.rows(), bins);
  std::vector<std::complex<double>> scratch;
  std::vector<double> mags;
  for (Eigen::Index t = 0; t < frames.rows(); ++t) {
    frame_magnitudes(frames, t, nfft, scratch, mags);
    for (int k = 0; k < bins; ++k)
      out(t, k) = static_cast<float>(
          std::log(mags[static_cast<std::size_t>(k)] + kLogEps));
  }
  return out;
}

std::vector<MelFilter> make_mel_filterbank(int num_filters, int nfft,
                                           double sample_rate, double f_min,
                                           double f_max) {
  if (num_filters < 1) throw std::invalid_argument("make_mel_filterbank: bad count");
  const double mel_lo = hz_to_mel(f_min);
  const double mel_hi = hz_to_mel(f_max);
  // num_filters + 2 boundary points; filter m peaks at point m+1.
  std::vector<double> hz(static_cast<std::size_t>(num_filters) + 2);
  for (int j = 0; j < num_filters + 2; ++j)
    hz[static_cast<std::size_t>(j)] = mel_to_hz(
        mel_lo + (mel_hi - mel_lo) * j / (num_filters + 1));
  const double bin_hz = sample_rate / nfft;
  std::vector<MelFilter> filters;
  filters.reserve(static_cast<std::size_t>(num_filters));
  for (int m = 0; m < num_filters; ++m) {
    const double lo = hz[static_cast<std::size_t>(m)];
    const double mid = hz[static_cast<std::size_t>(m) + 1];
    const double hi = hz[static_cast<std::size_t>(m) + 2];
    MelFilter filter;
    filter.center_hz = mid;
    const int first = static_cast<int>(std::ceil(lo / bin_hz));
    const int last = static_cast<int>(std::floor(hi / bin_hz));
    filter.first_bin = first;
    for (int k = first; k <= last; ++k) {
      const double f = k * bin_hz;
      double wgt = 0.0;
      if (f <= mid)
        wgt = (f - lo) / (mid - lo);
      else
        wgt = (hi - f) / (hi - mid);
      filter.weights.push_back(static_cast<float>(std::max(wgt, 0.0)));
    }
    // Trim zero-weight edge bins so first_bin is the first active one.
    while (!filter.weights.empty() && filter.weights.front() == 0.0f) {
      filter.weights.erase(filter.weights.begin());
      ++filter.first_bin;
    }
    while (!filter.weights.empty() && filter.weights.back() == 0.0f)
      filter.weights.pop_back();
    if (filter.weights.empty())
      throw std::runtime_error("make_mel_filterbank: filter with no bins; "
                               "increase nfft");
    filters.push_back(std::move(filter));
  }
  return filters;
}

FeatureMatrix logmel_spectrogram(const RowMatrix<float>& frames) {
  constexpr int kNfft = 1024;
  constexpr int kNumFilters = 40;
  static const std::vector<MelFilter> filters =
      make_mel_filterbank(kNumFilters, kNfft, 16000.0, 0.0, 8000.0);
  FeatureMatrix out(frames.rows(), kNumFilters);
  std::vector<std::complex<double>> scratch;
  std::vector<double> mags;
  for (Eigen::Index t = 0; t < frames.rows(); ++t) {
    frame_magnitudes(frames, t, kNfft, scratch, mags);
    for (int m = 0; m < kNumFilters; ++m) {
      const MelFilter& filter = filters[static_cast<std::size_t>(m)];
      double energy = 0.0;
      for (std::size_t i = 0; i < filter.weights.size(); ++i)
        energy += filter.weights[i] *
                  mags[static_cast<std::size_t>(filter.first_bin) + i];
      out(t, m) = static_cast<float>(std::log(energy + kLogEps));
    }
  }
  return out;
}

FeatureMatrix build_context_windows(const FeatureMatrix& f, int K) {
  if (K < 0) throw std::invalid_argument("build_context_windows: K < 0");
  if (K == 0) return f;
  const Eigen::Index T = f.rows();
  const Eigen::Index d = f.cols();
  FeatureMatrix out(T, (2 * K + 1) * d);
  for (Eigen::Index t = 0; t < T; ++t)
    for (int k = -K; k <= K; ++k) {
      const Eigen::Index src = std::clamp<Eigen::Index>(t + k, 0, T - 1);
      out.block(t, (k + K) * d, 1, d) = f.row(src);
    }
  return out;
}

NormStats fit_norm_stats(const std::vector<FeatureMatrix>& train) {
  if (train.empty())
    throw std::invalid_argument("fit_norm_stats: empty training set");
  const Eigen::Index d = train.front().cols();
  Vector<double> sum = Vector<double>::Zero(d);
  Vector<double> sumsq = Vector<double>::Zero(d);
  std::int64_t n = 0;
  for (const FeatureMatrix& f : train) {
    if (f.cols() != d)
      throw std::invalid_argument("fit_norm_stats: inconsistent dimensions");
    sum += f.colwise().sum().transpose().cast<double>();
    sumsq += f.array().square().colwise().sum().transpose().matrix().cast<double>();
    n += f.rows();
  }
  if (n == 0) throw std::invalid_argument("fit_norm_stats: no frames");
  NormStats stats;
  stats.mean = (sum / static_cast<double>(n)).cast<float>();
  Vector<double> var =
      sumsq / static_cast<double>(n) -
      (sum / static_cast<double>(n)).array().square().matrix();
  stats.stddev = var.array()
                     .max(0.0)
                     .sqrt()
                     .max(static_cast<double>(kStdFloor))
                     .cast<float>();
  return stats;
}

FeatureMatrix apply_norm(const FeatureMatrix& f, const NormStats& stats) {
  if (f.cols() != stats.mean.size())
    throw std::invalid_argument("apply_norm: dimension mismatch");
  FeatureMatrix out = f;
  out.rowwise() -= stats.mean.transpose();
  out.array().rowwise() /= stats.stddev.transpose().array();
  return out;
}

void write_feature_file(const std::string& path, const FeatureMatrix& f,
                        DimKind kind) {
  if (f.cols() != dim_of(kind))
    throw std::invalid_argument("write_feature_file: column count does not "
                                "match dim kind");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("write_feature_file: cannot open " + path);
  out.write("AFR1", 4);
  const std::uint32_t rows = static_cast<std::uint32_t>(f.rows());
  const std::uint32_t cols = static_cast<std::uint32_t>(f.cols());
  const std::uint8_t tag = static_cast<std::uint8_t>(kind);
  out.write(reinterpret_cast<const char*>(&rows), 4);
  out.write(reinterpret_cast<const char*>(&cols), 4);
  out.write(reinterpret_cast<const char*>(&tag), 1);
  out.write(reinterpret_cast<const char*>(f.data()),
            static_cast<std::streamsize>(sizeof(float)) * f.size());
  if (!out)
    throw std::runtime_error("write_feature_file: write failed: " + path);
}

std::pair<FeatureMatrix, DimKind> read_feature_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingArtifactError("feature file missing: " + path);
  char magic[4];
  std::uint32_t rows = 0, cols = 0;
  std::uint8_t tag = 0;
  in.read(magic, 4);
  in.read(reinterpret_cast<char*>(&rows), 4);
  in.read(reinterpret_cast<char*>(&cols), 4);
  in.read(reinterpret_cast<char*>(&tag), 1);
  if (!in || std::memcmp(magic, "AFR1", 4) != 0)
    throw std::runtime_error("read_feature_file: bad header: " + path);
  if (tag > static_cast<std::uint8_t>(DimKind::kCtx5LogMel40))
    throw std::runtime_error("read_feature_file: unknown dim kind: " + path);
  const DimKind kind = static_cast<DimKind>(tag);
  FeatureMatrix f(rows, cols);
  in.read(reinterpret_cast<char*>(f.data()),
          static_cast<std::streamsize>(sizeof(float)) * f.size());
  if (!in) throw std::runtime_error("read_feature_file: truncated: " + path);
  return {std::move(f), kind};
}

}  // namespace affect::dsp
