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

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "msasb/error.hpp"
#include "msasb/parallel.hpp"
#include "msasb/types.hpp"

namespace msasb {

struct PitchTrackerConfig {
  double min_f0_hz = 50.0;
  double max_f0_hz = 500.0;
  double window_ms = 40.0;
  double voicing_threshold = 0.3;
  // Frame RMS must reach this fraction of the utterance RMS to be voiced.
  double energy_gate = 0.01;
  // Octave guard: the shortest lag whose peak reaches this fraction of the
  // global maximum wins over longer (sub-harmonic) lags.
  double octave_ratio = 0.95;
  int median_width = 5;
};

namespace pitch_detail {

struct LagEstimate {
  double period_samples = 0.0;
  double peak = 0.0;
};

// Normalized autocorrelation
//   r(t) = sum x[n] x[n+t] / sqrt(sum x[n]^2 * sum x[n+t]^2)
// over the overlapping part of the segment.
inline std::vector<double> NormalizedAutocorrelation(const std::vector<double>& x,
                                                      std::size_t min_lag,
                                                      std::size_t max_lag) {
  const std::size_t n = x.size();
  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + x[i] * x[i];
  std::vector<double> r(max_lag + 2, 0.0);
  for (std::size_t lag = min_lag > 0 ? min_lag - 1 : 0; lag <= max_lag + 1 && lag < n; ++lag) {
    double cross = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) cross += x[i] * x[i + lag];
    const double e0 = prefix[n - lag];
    const double e1 = prefix[n] - prefix[lag];
    const double denom = std::sqrt(e0 * e1);
    r[lag] = denom > 0.0 ? cross / denom : 0.0;
  }
  return r;
}

inline LagEstimate PickLag(const std::vector<double>& r, std::size_t min_lag,
                           std::size_t max_lag, double octave_ratio) {
  double best = -1.0;
  for (std::size_t lag = min_lag; lag <= max_lag; ++lag) best = std::max(best, r[lag]);
  if (best <= 0.0) return {};
  std::size_t chosen = max_lag;
  for (std::size_t lag = min_lag; lag <= max_lag; ++lag) {
    const bool left_ok = lag == min_lag || r[lag] >= r[lag - 1];
    const bool right_ok = lag == max_lag || r[lag] >= r[lag + 1];
    if (left_ok && right_ok && r[lag] >= octave_ratio * best) {
      chosen = lag;
      break;
    }
  }
  double offset = 0.0;
  if (chosen > min_lag && chosen < max_lag) {
    const double a = r[chosen - 1], b = r[chosen], c = r[chosen + 1];
    const double curvature = a - 2.0 * b + c;
    if (curvature < 0.0) offset = std::clamp(0.5 * (a - c) / curvature, -0.5, 0.5);
  }
  return {static_cast<double>(chosen) + offset, best};
}

inline std::vector<double> MedianFilter(const std::vector<double>& values, int width) {
  const auto n = static_cast<std::ptrdiff_t>(values.size());
  const std::ptrdiff_t half = width / 2;
  std::vector<double> out(values.size());
  std::vector<double> window(static_cast<std::size_t>(2 * half + 1));
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    for (std::ptrdiff_t j = -half; j <= half; ++j) {
      window[static_cast<std::size_t>(j + half)] =
          values[static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(i + j, 0, n - 1))];
    }
    std::nth_element(window.begin(), window.begin() + half, window.end());
    out[static_cast<std::size_t>(i)] = window[static_cast<std::size_t>(half)];
  }
  return out;
}

}  // namespace pitch_detail

// Autocorrelation pitch tracker. Frame k is centred at k * frame_shift_ms
// with a zero-padded analysis window; the raw contour is median filtered.
inline F0Contour EstimateF0(const AudioBuffer& audio, double frame_shift_ms,
                            const PitchTrackerConfig& config = {},
                            const ExecPolicy& policy = {}) {
  using namespace pitch_detail;
  if (!(frame_shift_ms > 0.0)) {
    throw Error(ErrorCode::kInvalidConfig, "frame shift must be positive");
  }
  const int fs = audio.sample_rate_hz;
  const auto window_len =
      static_cast<std::size_t>(std::llround(config.window_ms * fs / 1000.0));
  if (audio.samples.size() < window_len) {
    throw Error(ErrorCode::kAudioTooShort,
                std::to_string(audio.samples.size()) + " samples; at least " +
                    std::to_string(window_len) + " required");
  }
  const auto min_lag = static_cast<std::size_t>(std::ceil(fs / config.max_f0_hz));
  const auto max_lag = std::min(static_cast<std::size_t>(std::floor(fs / config.min_f0_hz)),
                                window_len - 2);

  double energy = 0.0;
  for (double s : audio.samples) energy += s * s;
  const double utterance_rms = std::sqrt(energy / audio.samples.size());

  const std::size_t n_frames = FrameCount(audio.samples.size(), frame_shift_ms, fs);
  std::vector<double> raw(n_frames, 0.0);
  const auto total = static_cast<std::int64_t>(audio.samples.size());
  const auto half = static_cast<std::int64_t>(window_len / 2);

  ParallelFor(n_frames, policy, [&](std::size_t k) {
    const std::int64_t start = FrameInstant(k, frame_shift_ms, fs) - half;
    std::vector<double> segment(window_len, 0.0);
    double seg_energy = 0.0;
    for (std::size_t i = 0; i < window_len; ++i) {
      const std::int64_t idx = start + static_cast<std::int64_t>(i);
      if (idx >= 0 && idx < total) {
        segment[i] = audio.samples[static_cast<std::size_t>(idx)];
        seg_energy += segment[i] * segment[i];
      }
    }
    const double frame_rms = std::sqrt(seg_energy / window_len);
    if (utterance_rms <= 0.0 || frame_rms < config.energy_gate * utterance_rms) return;
    const auto r = NormalizedAutocorrelation(segment, min_lag, max_lag);
    const auto est = PickLag(r, min_lag, max_lag, config.octave_ratio);
    if (est.peak < config.voicing_threshold || est.period_samples <= 0.0) return;
    raw[k] = std::clamp(fs / est.period_samples, config.min_f0_hz, config.max_f0_hz);
  });

  const auto smoothed = MedianFilter(raw, config.median_width);
  F0Contour contour;
  contour.frame_shift_ms = frame_shift_ms;
  contour.frames.reserve(n_frames);
  for (double f0 : smoothed) contour.frames.push_back({f0, f0 > 0.0});
  return contour;
}

}  // namespace msasb
