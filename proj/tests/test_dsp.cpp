// tests/test_dsp.cpp

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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <vector>

#include "affectrepr/dsp.hpp"
#include "affectrepr/rng.hpp"
#include "affectrepr/types.hpp"
#include "affectrepr/wav.hpp"
#include "doctest.h"

namespace fs = std::filesystem;
using namespace affect;
using namespace affect::dsp;

namespace {

constexpr double kPi = std::numbers::pi;

fs::path test_dir(const char* leaf) {
  const fs::path dir = fs::temp_directory_path() / "affectrepr_test_dsp" / leaf;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

Waveform tone(double freq_hz, double seconds = 1.0, int rate = 16000) {
  Waveform w;
  w.sample_rate = rate;
  const auto n = static_cast<std::size_t>(seconds * rate);
  w.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    w.samples[i] =
        static_cast<float>(std::sin(2.0 * kPi * freq_hz * i / rate));
  return w;
}

// O(N^2) reference transform, same sign convention as the library FFT.
std::vector<std::complex<double>> direct_dft(
    const std::vector<std::complex<double>>& x) {
  const std::size_t n = x.size();
  std::vector<std::complex<double>> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<double> acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double ang =
          -2.0 * kPi * static_cast<double>(k * j) / static_cast<double>(n);
      acc += x[j] * std::complex<double>(std::cos(ang), std::sin(ang));
    }
    out[k] = acc;
  }
  return out;
}

// Reference log-magnitude of one frame row: truncate/zero-pad to nfft, DFT,
// log(|X_k| + eps).
std::vector<double> frame_log_mags(const RowMatrix<float>& frames,
                                   Eigen::Index t, int nfft) {
  std::vector<std::complex<double>> buf(static_cast<std::size_t>(nfft),
                                        {0.0, 0.0});
  for (Eigen::Index i = 0; i < std::min<Eigen::Index>(frames.cols(), nfft);
       ++i)
    buf[static_cast<std::size_t>(i)] = {static_cast<double>(frames(t, i)),
                                        0.0};
  const auto spec = direct_dft(buf);
  std::vector<double> out(static_cast<std::size_t>(nfft));
  for (int k = 0; k < nfft; ++k)
    out[static_cast<std::size_t>(k)] =
        std::log(std::abs(spec[static_cast<std::size_t>(k)]) + kLogEps);
  return out;
}

double ref_hz_to_mel(double f) { return 2595.0 * std::log10(1.0 + f / 700.0); }
double ref_mel_to_hz(double m) {
  return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0);
}

RowMatrix<float> random_frames(Eigen::Index rows, Eigen::Index cols,
                               std::uint64_t seed) {
  Rng rng(seed);
  RowMatrix<float> f(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c)
      f(r, c) = static_cast<float>(rng.uniform(-1.0, 1.0));
  return f;
}

}  // namespace

TEST_CASE("frame count covers every sample exactly per the contract") {
  const int rate = 16000;
  const int width = 320;  // 20 ms
  const int hop = 160;    // 10 ms
  for (const int n : {320, 321, 479, 480, 481, 640, 16000, 35200}) {
    Waveform w;
    w.sample_rate = rate;
    w.samples.assign(static_cast<std::size_t>(n), 0.25f);
    const auto frames = frame_signal(w);
    // Independent count: one frame if everything fits, otherwise the smallest
    // T with (T-1)*hop + width >= n.
    Eigen::Index want = 1;
    while ((want - 1) * hop + width < n) ++want;
    CAPTURE(n);
    CHECK(frames.rows() == want);
    CHECK(frames.cols() == width);
  }
  Waveform one_second = tone(440.0, 1.0);
  CHECK(frame_signal(one_second).rows() == 99);

  Waveform too_short;
  too_short.samples.assign(319, 0.0f);
  CHECK_THROWS_AS(frame_signal(too_short), std::invalid_argument);
  Waveform empty;
  CHECK_THROWS_AS(frame_signal(empty), std::invalid_argument);
}

TEST_CASE("frames are Hamming-tapered slices with zero-padded tail") {
  Waveform w;
  w.sample_rate = 16000;
  w.samples.resize(500);
  Rng rng(11);
  for (auto& s : w.samples) s = static_cast<float>(rng.uniform(-0.9, 0.9));
  const auto frames = frame_signal(w);
  REQUIRE(frames.rows() == 3);  // (3-1)*160 + 320 = 640 >= 500
  const int width = 320;
  for (Eigen::Index t = 0; t < frames.rows(); ++t)
    for (int i = 0; i < width; ++i) {
      const long src = static_cast<long>(t) * 160 + i;
      const double taper = 0.54 - 0.46 * std::cos(2.0 * kPi * i / (width - 1));
      const double want =
          src < 500 ? taper * static_cast<double>(
                                  w.samples[static_cast<std::size_t>(src)])
                    : 0.0;
      REQUIRE(frames(t, i) == doctest::Approx(want).epsilon(1e-6));
    }
  // Hamming endpoints are 0.54 - 0.46 = 0.08, peak is 1 at the middle.
  CHECK(frames(0, 0) ==
        doctest::Approx(0.08 * static_cast<double>(w.samples[0])));
}

TEST_CASE("fft matches a direct DFT and satisfies Parseval") {
  Rng rng(5);
  std::vector<std::complex<double>> x(16);
  for (auto& v : x) v = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
  std::vector<std::complex<double>> got = x;
  fft_radix2(got);
  const auto want = direct_dft(x);
  REQUIRE(got.size() == want.size());
  for (std::size_t k = 0; k < got.size(); ++k)
    CHECK(std::abs(got[k] - want[k]) < 1e-10);

  double time_energy = 0.0, freq_energy = 0.0;
  for (const auto& v : x) time_energy += std::norm(v);
  for (const auto& v : got) freq_energy += std::norm(v);
  CHECK(freq_energy / static_cast<double>(x.size()) ==
        doctest::Approx(time_energy).epsilon(1e-12));

  std::vector<std::complex<double>> bad(12);
  CHECK_THROWS_AS(fft_radix2(bad), std::invalid_argument);
  std::vector<std::complex<double>> none;
  CHECK_THROWS_AS(fft_radix2(none), std::invalid_argument);
}

TEST_CASE("magnitude spectrogram equals the direct-DFT reference") {
  const auto frames = random_frames(4, 320, 17);
  for (const int bins : {513, 128}) {
    const int nfft = bins == 513 ? 1024 : 256;
    const FeatureMatrix got = magnitude_spectrogram(frames, bins);
    REQUIRE(got.rows() == frames.rows());
    REQUIRE(got.cols() == bins);
    for (Eigen::Index t = 0; t < frames.rows(); ++t) {
      const auto want = frame_log_mags(frames, t, nfft);
      for (int k = 0; k < bins; ++k) {
        CAPTURE(bins);
        CAPTURE(t);
        CAPTURE(k);
        REQUIRE(std::abs(static_cast<double>(got(t, k)) -
                         want[static_cast<std::size_t>(k)]) < 2e-4);
      }
    }
  }
  CHECK_THROWS_AS(magnitude_spectrogram(frames, 512), std::invalid_argument);
}

TEST_CASE("silence hits the log floor everywhere") {
  RowMatrix<float> frames = RowMatrix<float>::Zero(2, 320);
  const FeatureMatrix out = magnitude_spectrogram(frames, 128);
  const float floor_val = static_cast<float>(std::log(kLogEps));
  for (Eigen::Index t = 0; t < out.rows(); ++t)
    for (Eigen::Index k = 0; k < out.cols(); ++k)
      REQUIRE(out(t, k) == floor_val);
}

TEST_CASE("a pure tone peaks in its exact FFT bin") {
  // 1000 Hz is bin 64 of a 1024-point transform at 16 kHz (and bin 16 of a
  // 256-point one) with no remainder, so the argmax is unambiguous.
  const auto frames = frame_signal(tone(1000.0));
  const FeatureMatrix wide = magnitude_spectrogram(frames, 513);
  const FeatureMatrix narrow = magnitude_spectrogram(frames, 128);
  for (Eigen::Index t = 1; t + 1 < frames.rows(); ++t) {
    Eigen::Index peak_wide = 0, peak_narrow = 0;
    wide.row(t).maxCoeff(&peak_wide);
    narrow.row(t).maxCoeff(&peak_narrow);
    CHECK(peak_wide == 64);
    CHECK(peak_narrow == 16);
  }
}

TEST_CASE("mel filterbank matches the analytic triangle construction") {
  const int num_filters = 10;
  const int nfft = 512;
  const double rate = 16000.0;
  const auto filters = make_mel_filterbank(num_filters, nfft, rate, 0.0, 8000.0);
  REQUIRE(filters.size() == static_cast<std::size_t>(num_filters));

  // Boundary frequencies recomputed from scratch: num+2 points evenly spaced
  // on the mel axis; filter m spans points m..m+2 and peaks at m+1.
  std::vector<double> boundary(num_filters + 2);
  const double mel_hi = ref_hz_to_mel(8000.0);
  for (int j = 0; j < num_filters + 2; ++j)
    boundary[static_cast<std::size_t>(j)] =
        ref_mel_to_hz(mel_hi * j / (num_filters + 1));

  const double bin_hz = rate / nfft;
  for (int m = 0; m < num_filters; ++m) {
    const double lo = boundary[static_cast<std::size_t>(m)];
    const double mid = boundary[static_cast<std::size_t>(m) + 1];
    const double hi = boundary[static_cast<std::size_t>(m) + 2];
    CHECK(filters[static_cast<std::size_t>(m)].center_hz ==
          doctest::Approx(mid).epsilon(1e-9));

    // Expand the sparse filter to a dense vector over all bins.
    std::vector<double> dense(static_cast<std::size_t>(nfft / 2 + 1), 0.0);
    const MelFilter& filt = filters[static_cast<std::size_t>(m)];
    REQUIRE(filt.first_bin >= 0);
    REQUIRE(filt.first_bin + static_cast<int>(filt.weights.size()) <=
            nfft / 2 + 1);
    double total = 0.0;
    for (std::size_t i = 0; i < filt.weights.size(); ++i) {
      REQUIRE(filt.weights[i] >= 0.0f);
      dense[static_cast<std::size_t>(filt.first_bin) + i] = filt.weights[i];
      total += filt.weights[i];
    }
    CHECK(total > 0.0);

    for (int k = 0; k <= nfft / 2; ++k) {
      const double f = k * bin_hz;
      double want = 0.0;
      if (f > lo && f <= mid)
        want = (f - lo) / (mid - lo);
      else if (f > mid && f < hi)
        want = (hi - f) / (hi - mid);
      CAPTURE(m);
      CAPTURE(k);
      REQUIRE(dense[static_cast<std::size_t>(k)] ==
              doctest::Approx(want).epsilon(1e-5));
    }
  }
  CHECK_THROWS_AS(make_mel_filterbank(0, 512, 16000.0, 0.0, 8000.0),
                  std::invalid_argument);
}

TEST_CASE("log-mel features have 40 channels and peak at the tone's filter") {
  // Recompute the center of filter 20 and drive a tone at exactly that
  // frequency; no other triangle overlaps its peak.
  const double center =
      ref_mel_to_hz(ref_hz_to_mel(8000.0) * 21.0 / 41.0);
  const auto frames = frame_signal(tone(center));
  const FeatureMatrix mel = logmel_spectrogram(frames);
  REQUIRE(mel.cols() == 40);
  REQUIRE(mel.rows() == frames.rows());
  for (Eigen::Index t = 1; t + 1 < mel.rows(); ++t) {
    Eigen::Index peak = 0;
    mel.row(t).maxCoeff(&peak);
    CHECK(peak == 20);
  }
  const float floor_val = static_cast<float>(std::log(kLogEps));
  for (Eigen::Index t = 0; t < mel.rows(); ++t)
    for (Eigen::Index m = 0; m < mel.cols(); ++m)
      REQUIRE(mel(t, m) >= floor_val);
}

TEST_CASE("context windows replicate edges and keep the row count") {
  const FeatureMatrix f = random_frames(5, 3, 23);
  CHECK(build_context_windows(f, 0) == f);

  const int K = 2;
  const FeatureMatrix out = build_context_windows(f, K);
  REQUIRE(out.rows() == f.rows());
  REQUIRE(out.cols() == (2 * K + 1) * f.cols());
  for (Eigen::Index t = 0; t < f.rows(); ++t)
    for (int k = -K; k <= K; ++k)
      for (Eigen::Index j = 0; j < f.cols(); ++j) {
        Eigen::Index src = t + k;
        if (src < 0) src = 0;
        if (src >= f.rows()) src = f.rows() - 1;
        REQUIRE(out(t, (k + K) * f.cols() + j) == f(src, j));
      }
  CHECK_THROWS_AS(build_context_windows(f, -1), std::invalid_argument);

  // The two production context sizes: 5x128 = 640 and 5x40 = 200.
  CHECK(build_context_windows(random_frames(4, 128, 1), 2).cols() == 640);
  CHECK(build_context_windows(random_frames(4, 40, 1), 2).cols() == 200);
}

TEST_CASE("normalization stats match hand-computed population moments") {
  FeatureMatrix a(2, 2);
  a << 1.0f, 2.0f, 3.0f, 6.0f;
  FeatureMatrix b(1, 2);
  b << 5.0f, 10.0f;
  const NormStats stats = fit_norm_stats({a, b});
  REQUIRE(stats.mean.size() == 2);
  CHECK(stats.mean(0) == doctest::Approx(3.0));
  CHECK(stats.mean(1) == doctest::Approx(6.0));
  CHECK(stats.stddev(0) == doctest::Approx(std::sqrt(8.0 / 3.0)));
  CHECK(stats.stddev(1) == doctest::Approx(std::sqrt(32.0 / 3.0)));

  const FeatureMatrix z = apply_norm(a, stats);
  CHECK(z(0, 0) == doctest::Approx((1.0 - 3.0) / std::sqrt(8.0 / 3.0)));
  CHECK(z(1, 1) == doctest::Approx((6.0 - 6.0) / std::sqrt(32.0 / 3.0)));

  FeatureMatrix constant(3, 1);
  constant << 4.0f, 4.0f, 4.0f;
  const NormStats flat = fit_norm_stats({constant});
  CHECK(flat.stddev(0) == kStdFloor);  // variance floor keeps z finite
  const FeatureMatrix zc = apply_norm(constant, flat);
  CHECK(std::isfinite(zc(0, 0)));

  CHECK_THROWS_AS(fit_norm_stats({}), std::invalid_argument);
  FeatureMatrix wrong(1, 3);
  wrong.setZero();
  CHECK_THROWS_AS(fit_norm_stats({a, wrong}), std::invalid_argument);
  CHECK_THROWS_AS(apply_norm(wrong, stats), std::invalid_argument);
}

TEST_CASE("feature files round-trip exactly and fail loudly") {
  const fs::path dir = test_dir("afr");
  FeatureMatrix f = random_frames(7, 40, 31);
  const std::string path = (dir / "x.afr").string();
  write_feature_file(path, f, DimKind::kLogMel40);
  const auto [loaded, kind] = read_feature_file(path);
  CHECK(kind == DimKind::kLogMel40);
  REQUIRE(loaded.rows() == f.rows());
  REQUIRE(loaded.cols() == f.cols());
  CHECK(loaded == f);

  CHECK_THROWS_AS(read_feature_file((dir / "absent.afr").string()),
                  MissingArtifactError);
  CHECK_THROWS_AS(write_feature_file(path, f, DimKind::kFft128),
                  std::invalid_argument);  // 40 cols is not a 128-dim record

  const std::string garbage = (dir / "bad.afr").string();
  std::ofstream(garbage, std::ios::binary) << "not a feature file";
  CHECK_THROWS_AS(read_feature_file(garbage), std::runtime_error);

  // Truncate the valid file: header survives, payload does not.
  std::vector<char> bytes;
  {
    std::ifstream in(path, std::ios::binary);
    bytes.assign(std::istreambuf_iterator<char>(in), {});
  }
  const std::string cut = (dir / "cut.afr").string();
  std::ofstream(cut, std::ios::binary)
      .write(bytes.data(), static_cast<std::streamsize>(bytes.size() / 2));
  CHECK_THROWS_AS(read_feature_file(cut), std::runtime_error);
}
