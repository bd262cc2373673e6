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

// Impulse/noise excitation and frame-wise minimum-phase filtering with
// full-tail overlap-add.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "msasb/envelope_reconstruction.hpp"
#include "msasb/error.hpp"
#include "msasb/msasb_analysis.hpp"
#include "msasb/parallel.hpp"
#include "msasb/pitch_tracking.hpp"
#include "msasb/types.hpp"

namespace msasb {

struct ExcitationPlan {
  std::vector<double> samples;
  double frame_shift_ms = 5.0;
  std::uint64_t seed = 0;
};

constexpr double kPeakLimit = 0.9;

// Segment k of the synthesis timeline is [FrameInstant(k), FrameInstant(k+1)),
// the last one running to `total_samples`.
inline std::size_t SegmentBegin(std::size_t k, double frame_shift_ms, int fs,
                                std::size_t total_samples) {
  return std::min<std::size_t>(static_cast<std::size_t>(FrameInstant(k, frame_shift_ms, fs)),
                               total_samples);
}

inline std::size_t SegmentEnd(std::size_t k, std::size_t n_frames, double frame_shift_ms, int fs,
                              std::size_t total_samples) {
  if (k + 1 >= n_frames) return total_samples;
  return SegmentBegin(k + 1, frame_shift_ms, fs, total_samples);
}

// Default output length for a synthesis of `n_frames` frames: the longest
// length whose frame count is still `n_frames`.
inline std::size_t SynthesisLength(std::size_t n_frames, double frame_shift_ms, int fs) {
  if (n_frames == 0) return 0;
  const auto end = FrameInstant(n_frames, frame_shift_ms, fs);
  return static_cast<std::size_t>(std::max<std::int64_t>(end - 1, 0));
}

inline void CheckLength(const F0Contour& f0, int fs, std::size_t total_samples) {
  const bool ok = f0.frames.empty()
                      ? total_samples == 0
                      : FrameCount(total_samples, f0.frame_shift_ms, fs) == f0.size();
  if (!ok) {
    throw Error(ErrorCode::kLengthMismatch,
                std::to_string(total_samples) + " samples do not match " +
                    std::to_string(f0.size()) + " frames at " +
                    std::to_string(f0.frame_shift_ms) + " ms");
  }
}

// Unit-power source. Voiced samples: a phase accumulator advancing by f0/fs
// fires an impulse of height sqrt(fs/f0) on each wrap. Unvoiced samples:
// uniform noise on [-sqrt(3), sqrt(3)]. The phase resets at every voicing
// change.
inline ExcitationPlan BuildExcitation(const F0Contour& f0, int sample_rate_hz,
                                      std::size_t total_samples, std::uint64_t seed) {
  CheckLength(f0, sample_rate_hz, total_samples);
  ExcitationPlan plan;
  plan.frame_shift_ms = f0.frame_shift_ms;
  plan.seed = seed;
  plan.samples.assign(total_samples, 0.0);

  std::mt19937_64 rng(seed);
  const double noise_scale = std::sqrt(3.0);
  double phase = 0.0;
  bool prev_voiced = false;
  const double fs = sample_rate_hz;
  for (std::size_t k = 0; k < f0.size(); ++k) {
    const auto& frame = f0.frames[k];
    const bool voiced = frame.voiced && frame.f0_hz > 0.0;
    if (voiced != prev_voiced) phase = 0.0;
    prev_voiced = voiced;
    const std::size_t begin = SegmentBegin(k, f0.frame_shift_ms, sample_rate_hz, total_samples);
    const std::size_t end = SegmentEnd(k, f0.size(), f0.frame_shift_ms, sample_rate_hz,
                                       total_samples);
    if (voiced) {
      const double step = frame.f0_hz / fs;
      const double height = std::sqrt(fs / frame.f0_hz);
      for (std::size_t n = begin; n < end; ++n) {
        phase += step;
        if (phase >= 1.0 - 1e-9) {
          plan.samples[n] = height;
          phase -= 1.0;
        }
      }
    } else {
      for (std::size_t n = begin; n < end; ++n) {
        // 53 random bits -> [0, 1); independent of the standard library's
        // distribution implementations.
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        plan.samples[n] = (2.0 * u - 1.0) * noise_scale;
      }
    }
  }
  return plan;
}

struct RenderOptions {
  // Samples of excitation to synthesize; defaults to SynthesisLength().
  std::optional<std::size_t> total_samples;
  // Minimum-phase response length; defaults to fft_size / 2.
  std::optional<std::size_t> impulse_length;
  // Skip peak limiting (used to inspect the raw filter output).
  bool peak_normalize = true;
};

struct RenderResult {
  AudioBuffer audio;
  double gain = 1.0;  // applied by peak limiting
};

inline RenderResult RenderWithGain(const FeatureTrack& track, const BandLayout& layout,
                                   const F0Contour& f0, InterpMethod method, std::uint64_t seed,
                                   const RenderOptions& options = {},
                                   const ExecPolicy& policy = {}) {
  if (track.log_domain) {
    throw Error(ErrorCode::kLogDomainMismatch, "render needs linear magnitudes");
  }
  if (track.frames.size() != f0.size()) {
    throw Error(ErrorCode::kFrameCountMismatch,
                std::to_string(track.frames.size()) + " feature frames vs " +
                    std::to_string(f0.size()) + " F0 frames");
  }
  CheckShift(f0.frame_shift_ms, track.frame_shift_ms);
  if (track.n_bands != layout.n_bands || track.sample_rate_hz != layout.sample_rate_hz) {
    throw Error(ErrorCode::kGridMismatch, "band layout does not match feature track");
  }
  RenderResult result;
  result.audio.sample_rate_hz = track.sample_rate_hz;
  if (track.frames.empty()) return result;

  const int fs = track.sample_rate_hz;
  const std::size_t total =
      options.total_samples.value_or(SynthesisLength(f0.size(), f0.frame_shift_ms, fs));
  const std::size_t ir_len = options.impulse_length.value_or(layout.fft_size / 2);
  const ExcitationPlan excitation = BuildExcitation(f0, fs, total, seed);

  // Filtered segments are computed per frame, then summed in frame order so
  // the result is independent of the thread count.
  const std::size_t n_frames = track.frames.size();
  std::vector<std::vector<double>> pieces(n_frames);
  ParallelFor(n_frames, policy, [&](std::size_t k) {
    const std::size_t begin = SegmentBegin(k, f0.frame_shift_ms, fs, total);
    const std::size_t end = SegmentEnd(k, n_frames, f0.frame_shift_ms, fs, total);
    if (begin >= end) return;
    const auto env = ReconstructEnvelope(track.frames[k], layout, method);
    const auto h = MinPhaseImpulseResponse(env, ir_len);
    auto& out = pieces[k];
    out.assign(end - begin + ir_len - 1, 0.0);
    for (std::size_t n = begin; n < end; ++n) {
      const double e = excitation.samples[n];
      if (e == 0.0) continue;
      double* dst = out.data() + (n - begin);
      for (std::size_t j = 0; j < ir_len; ++j) dst[j] += e * h[j];
    }
  });

  auto& samples = result.audio.samples;
  samples.assign(total + ir_len, 0.0);
  for (std::size_t k = 0; k < n_frames; ++k) {
    const std::size_t begin = SegmentBegin(k, f0.frame_shift_ms, fs, total);
    const auto& piece = pieces[k];
    for (std::size_t i = 0; i < piece.size(); ++i) samples[begin + i] += piece[i];
  }

  double peak = 0.0;
  for (double s : samples) {
    if (!std::isfinite(s)) throw Error(ErrorCode::kNonPositiveEnvelope, "non-finite output");
    peak = std::max(peak, std::abs(s));
  }
  if (options.peak_normalize && peak > kPeakLimit) {
    result.gain = kPeakLimit / peak;
    for (double& s : samples) s *= result.gain;
  }
  return result;
}

inline AudioBuffer Render(const FeatureTrack& track, const BandLayout& layout,
                          const F0Contour& f0, InterpMethod method, std::uint64_t seed,
                          const RenderOptions& options = {}, const ExecPolicy& policy = {}) {
  return RenderWithGain(track, layout, f0, method, seed, options, policy).audio;
}

// Pitch tracking, analysis and resynthesis of one utterance. The output has
// audio.samples.size() + fft_size / 2 samples.
inline RenderResult CopySynthesisWithGain(const AudioBuffer& audio, const AnalysisConfig& config,
                                          InterpMethod method, std::uint64_t seed,
                                          const ExecPolicy& policy = {}) {
  config.Validate();
  const F0Contour f0 = EstimateF0(audio, config.frame_shift_ms, {}, policy);
  const FeatureTrack track = Analyze(audio, f0, config, policy);
  const BandLayout layout = MakeBandLayout(config, audio.sample_rate_hz);
  RenderOptions options;
  options.total_samples = audio.samples.size();
  return RenderWithGain(track, layout, f0, method, seed, options, policy);
}

inline AudioBuffer CopySynthesis(const AudioBuffer& audio, const AnalysisConfig& config,
                                 InterpMethod method, std::uint64_t seed,
                                 const ExecPolicy& policy = {}) {
  return CopySynthesisWithGain(audio, config, method, seed, policy).audio;
}

}  // namespace msasb
