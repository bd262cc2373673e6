// Copyright 2026 The MSASB Vocoder Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Analysis stage: pitch-adaptive Hanning windows, DFT magnitude, and the
// per-band maxima with separate 0 Hz / fs/2 anchors.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "msasb/error.hpp"
#include "msasb/fft.hpp"
#include "msasb/parallel.hpp"
#include "msasb/types.hpp"

namespace msasb {

struct AnalysisConfig {
  int n_bands = 100;
  double frame_shift_ms = 5.0;
  std::size_t fft_size = 1024;
  int voiced_periods = 3;
  double unvoiced_window_ms = 15.0;

  void Validate() const {
    if (n_bands <= 0) throw Error(ErrorCode::kInvalidConfig, "n_bands must be positive");
    if (!(frame_shift_ms > 0.0)) {
      throw Error(ErrorCode::kInvalidConfig, "frame shift must be positive");
    }
    if (!IsPowerOfTwo(fft_size) || fft_size < 4) {
      throw Error(ErrorCode::kInvalidConfig,
                  "fft size " + std::to_string(fft_size) + " is not a power of two >= 4");
    }
    if (voiced_periods <= 0) {
      throw Error(ErrorCode::kInvalidConfig, "voiced_periods must be positive");
    }
    if (!(unvoiced_window_ms > 0.0)) {
      throw Error(ErrorCode::kInvalidConfig, "unvoiced window must be positive");
    }
  }
};

// Smallest power of two holding the longest window the analysis can ask
// for (voiced_periods periods at `min_f0_hz`, or the unvoiced window).
inline std::size_t DefaultFftSize(int sample_rate_hz, const AnalysisConfig& config = {},
                                  double min_f0_hz = 50.0) {
  const double longest = std::max(config.voiced_periods * sample_rate_hz / min_f0_hz,
                                  config.unvoiced_window_ms * sample_rate_hz / 1000.0);
  std::size_t n = 4;
  while (static_cast<double>(n) < longest + 1.0) n *= 2;
  return n;
}

// Fixed-width bands of W = fs / (2 N_b) Hz over the interior DFT bins
// 1 .. fft_size/2 - 1. Band b covers [b W, (b+1) W) and is centred at
// (b + 0.5) W.
struct BandLayout {
  int n_bands = 0;
  int sample_rate_hz = 0;
  std::size_t fft_size = 0;
  double width_hz = 0.0;
  std::vector<std::pair<std::size_t, std::size_t>> band_bins;  // inclusive
  std::vector<double> centre_hz;

  double bin_hz(std::size_t k) const {
    return static_cast<double>(k) * sample_rate_hz / static_cast<double>(fft_size);
  }
  std::size_t num_bins() const { return fft_size / 2 + 1; }
};

// Bin k goes to band floor(k fs / fft_size / W) = floor(2 N_b k / fft_size),
// clamped to N_b - 1.
inline BandLayout MakeBandLayout(int n_bands, int sample_rate_hz, std::size_t fft_size) {
  if (n_bands <= 0) throw Error(ErrorCode::kInvalidConfig, "n_bands must be positive");
  if (sample_rate_hz <= 0) throw Error(ErrorCode::kInvalidConfig, "sample rate must be positive");
  if (!IsPowerOfTwo(fft_size) || fft_size < 4) {
    throw Error(ErrorCode::kInvalidConfig, "fft size must be a power of two >= 4");
  }
  BandLayout layout;
  layout.n_bands = n_bands;
  layout.sample_rate_hz = sample_rate_hz;
  layout.fft_size = fft_size;
  layout.width_hz = sample_rate_hz / (2.0 * n_bands);
  const auto nb = static_cast<std::size_t>(n_bands);
  const std::size_t none = fft_size;  // sentinel
  layout.band_bins.assign(nb, {none, none});
  for (std::size_t k = 1; k < fft_size / 2; ++k) {
    const std::size_t band = std::min(2 * nb * k / fft_size, nb - 1);
    auto& range = layout.band_bins[band];
    if (range.first == none) range.first = k;
    range.second = k;
  }
  for (std::size_t b = 0; b < nb; ++b) {
    if (layout.band_bins[b].first == none) {
      throw Error(ErrorCode::kTooManyBands,
                  std::to_string(n_bands) + " bands leave band " + std::to_string(b) +
                      " without a DFT bin at fft size " + std::to_string(fft_size));
    }
  }
  layout.centre_hz.resize(nb);
  for (std::size_t b = 0; b < nb; ++b) {
    layout.centre_hz[b] = (static_cast<double>(b) + 0.5) * layout.width_hz;
  }
  return layout;
}

inline BandLayout MakeBandLayout(const AnalysisConfig& config, int sample_rate_hz) {
  config.Validate();
  return MakeBandLayout(config.n_bands, sample_rate_hz, config.fft_size);
}

// Hanning window (no zero endpoints) of odd length, scaled to sum to 2 so a
// sinusoid of amplitude A peaks near A in the magnitude spectrum.
inline std::vector<double> HanningWindow(std::size_t length) {
  std::vector<double> w(length);
  double sum = 0.0;
  for (std::size_t n = 0; n < length; ++n) {
    w[n] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(n + 1) /
                                 static_cast<double>(length + 1)));
    sum += w[n];
  }
  for (double& v : w) v *= 2.0 / sum;
  return w;
}

inline std::size_t WindowLength(double f0_hz, bool voiced, const AnalysisConfig& config,
                                int sample_rate_hz) {
  if (voiced && !(f0_hz > 0.0)) {
    throw Error(ErrorCode::kInvalidF0, "voiced frame with f0 " + std::to_string(f0_hz));
  }
  const double exact = voiced ? config.voiced_periods * sample_rate_hz / f0_hz
                              : config.unvoiced_window_ms * sample_rate_hz / 1000.0;
  auto length = static_cast<std::size_t>(std::max<long long>(1, std::llround(exact)));
  if (length % 2 == 0) ++length;
  // Capped at the largest odd length that fits the DFT.
  return std::min(length, config.fft_size - 1);
}

inline std::vector<double> WindowForFrame(double f0_hz, bool voiced, const AnalysisConfig& config,
                                          int sample_rate_hz) {
  return HanningWindow(WindowLength(f0_hz, voiced, config, sample_rate_hz));
}

constexpr double kRelativeFloor = 1e-5;
constexpr double kAbsoluteFloor = 1e-10;

// Floored DFT magnitude (bins 0 .. fft_size/2) of the audio segment centred
// at `centre_sample`, weighted by `window`. Samples outside the buffer are
// zero.
inline std::vector<double> FrameSpectrum(const AudioBuffer& audio, std::int64_t centre_sample,
                                         const std::vector<double>& window,
                                         std::size_t fft_size) {
  if (window.size() > fft_size) {
    throw Error(ErrorCode::kInvalidConfig, "window longer than fft size");
  }
  RealFft& fft = RealFftFor(fft_size);
  auto buf = fft.time();
  std::fill(buf.begin(), buf.end(), 0.0);
  const auto total = static_cast<std::int64_t>(audio.samples.size());
  const std::int64_t start = centre_sample - static_cast<std::int64_t>((window.size() - 1) / 2);
  for (std::size_t n = 0; n < window.size(); ++n) {
    const std::int64_t idx = start + static_cast<std::int64_t>(n);
    if (idx >= 0 && idx < total) buf[n] = audio.samples[static_cast<std::size_t>(idx)] * window[n];
  }
  fft.Forward();
  const auto spec = fft.freq();
  std::vector<double> mag(spec.size());
  double peak = 0.0;
  for (std::size_t k = 0; k < spec.size(); ++k) {
    mag[k] = std::abs(spec[k]);
    peak = std::max(peak, mag[k]);
  }
  const double floor = std::max(kRelativeFloor * peak, kAbsoluteFloor);
  for (double& v : mag) v = std::max(v, floor);
  return mag;
}

// Band maxima and anchors taken from a floored magnitude spectrum.
inline MsasbFrame FrameFromSpectrum(const std::vector<double>& magnitude,
                                    const BandLayout& layout) {
  if (magnitude.size() != layout.num_bins()) {
    throw Error(ErrorCode::kGridMismatch, "spectrum size does not match band layout");
  }
  MsasbFrame frame;
  frame.dc = magnitude.front();
  frame.nyquist = magnitude.back();
  frame.band_max.resize(layout.band_bins.size());
  for (std::size_t b = 0; b < layout.band_bins.size(); ++b) {
    const auto [first, last] = layout.band_bins[b];
    frame.band_max[b] = *std::max_element(magnitude.begin() + static_cast<std::ptrdiff_t>(first),
                                          magnitude.begin() + static_cast<std::ptrdiff_t>(last) + 1);
  }
  return frame;
}

inline MsasbFrame AnalyzeFrame(const AudioBuffer& audio, std::int64_t centre_sample,
                               const std::vector<double>& window, const BandLayout& layout,
                               const AnalysisConfig& config) {
  if (layout.fft_size != config.fft_size || layout.n_bands != config.n_bands ||
      layout.sample_rate_hz != audio.sample_rate_hz) {
    throw Error(ErrorCode::kInvalidConfig, "band layout does not match config and audio");
  }
  return FrameFromSpectrum(FrameSpectrum(audio, centre_sample, window, config.fft_size), layout);
}

inline void CheckShift(double contour_shift_ms, double config_shift_ms) {
  if (std::abs(contour_shift_ms - config_shift_ms) > 1e-6 * config_shift_ms) {
    throw Error(ErrorCode::kFrameShiftMismatch,
                "F0 contour shift " + std::to_string(contour_shift_ms) +
                    " ms differs from analysis shift " + std::to_string(config_shift_ms) +
                    " ms");
  }
}

// One MsasbFrame per F0 frame; frame k centred at round(k * shift * fs / 1000).
inline FeatureTrack Analyze(const AudioBuffer& audio, const F0Contour& f0,
                            const AnalysisConfig& config, const ExecPolicy& policy = {}) {
  config.Validate();
  CheckShift(f0.frame_shift_ms, config.frame_shift_ms);
  if (audio.samples.empty()) throw Error(ErrorCode::kAudioTooShort, "empty audio");
  const BandLayout layout = MakeBandLayout(config, audio.sample_rate_hz);

  FeatureTrack track;
  track.frame_shift_ms = config.frame_shift_ms;
  track.n_bands = config.n_bands;
  track.sample_rate_hz = audio.sample_rate_hz;
  track.log_domain = false;
  track.frames.resize(f0.size());
  ParallelFor(f0.size(), policy, [&](std::size_t k) {
    const auto& fr = f0.frames[k];
    const auto window = WindowForFrame(fr.f0_hz, fr.voiced, config, audio.sample_rate_hz);
    const auto centre = FrameInstant(k, config.frame_shift_ms, audio.sample_rate_hz);
    track.frames[k] = AnalyzeFrame(audio, centre, window, layout, config);
  });
  return track;
}

}  // namespace msasb
