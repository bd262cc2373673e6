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

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace msasb {

// Mono waveform. Samples are nominally in [-1, 1].
struct AudioBuffer {
  std::vector<double> samples;
  int sample_rate_hz = 16000;

  double duration_s() const {
    return static_cast<double>(samples.size()) / sample_rate_hz;
  }
  bool operator==(const AudioBuffer&) const = default;
};

struct F0Frame {
  double f0_hz = 0.0;
  bool voiced = false;
  bool operator==(const F0Frame&) const = default;
};

// Per-frame fundamental frequency; frame k sits at t = k * frame_shift_ms.
struct F0Contour {
  double frame_shift_ms = 5.0;
  std::vector<F0Frame> frames;

  std::size_t size() const { return frames.size(); }
  bool operator==(const F0Contour&) const = default;
};

// The N_b band maxima plus the 0 Hz and fs/2 anchors of one analysis frame.
struct MsasbFrame {
  double dc = 0.0;
  std::vector<double> band_max;
  double nyquist = 0.0;

  std::size_t n_bands() const { return band_max.size(); }

  // Values in storage order: [dc, band 0 .. band N_b-1, nyquist].
  std::vector<double> values() const {
    std::vector<double> out;
    out.reserve(band_max.size() + 2);
    out.push_back(dc);
    out.insert(out.end(), band_max.begin(), band_max.end());
    out.push_back(nyquist);
    return out;
  }

  bool operator==(const MsasbFrame&) const = default;
};

struct FeatureTrack {
  double frame_shift_ms = 5.0;
  int n_bands = 0;
  int sample_rate_hz = 16000;
  bool log_domain = false;
  std::vector<MsasbFrame> frames;

  bool operator==(const FeatureTrack&) const = default;
};

// Number of samples in one frame shift, possibly fractional.
inline double ShiftSamples(double frame_shift_ms, int sample_rate_hz) {
  return frame_shift_ms * sample_rate_hz / 1000.0;
}

// Sample index of the instant k * shift.
inline std::int64_t FrameInstant(std::size_t k, double frame_shift_ms,
                                 int sample_rate_hz) {
  return std::llround(static_cast<double>(k) *
                      ShiftSamples(frame_shift_ms, sample_rate_hz));
}

// floor(duration / shift) + 1.
inline std::size_t FrameCount(std::size_t num_samples, double frame_shift_ms,
                              int sample_rate_hz) {
  const double ratio = static_cast<double>(num_samples) /
                       ShiftSamples(frame_shift_ms, sample_rate_hz);
  return static_cast<std::size_t>(std::floor(ratio + 1e-9)) + 1;
}

// A track in natural-log values converted back to magnitudes, or vice versa.
inline FeatureTrack ToLogDomain(FeatureTrack track) {
  if (track.log_domain) return track;
  for (auto& f : track.frames) {
    f.dc = std::log(f.dc);
    f.nyquist = std::log(f.nyquist);
    for (auto& v : f.band_max) v = std::log(v);
  }
  track.log_domain = true;
  return track;
}

inline FeatureTrack ToLinearDomain(FeatureTrack track) {
  if (!track.log_domain) return track;
  for (auto& f : track.frames) {
    f.dc = std::exp(f.dc);
    f.nyquist = std::exp(f.nyquist);
    for (auto& v : f.band_max) v = std::exp(v);
  }
  track.log_domain = false;
  return track;
}

}  // namespace msasb
