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

// Log-spectral distortion and the band-count sweep built on it.

#include <cmath>
#include <cstddef>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "msasb/envelope_reconstruction.hpp"
#include "msasb/error.hpp"
#include "msasb/msasb_analysis.hpp"
#include "msasb/parallel.hpp"
#include "msasb/pitch_tracking.hpp"
#include "msasb/types.hpp"

namespace msasb {

// sqrt(mean((20 log10 a - 20 log10 b)^2)) in dB.
inline double LsdDb(std::span<const double> reference, std::span<const double> test) {
  if (reference.size() != test.size() || reference.empty()) {
    throw Error(ErrorCode::kGridMismatch, "LSD needs equal, non-empty grids");
  }
  double acc = 0.0;
  for (std::size_t k = 0; k < reference.size(); ++k) {
    if (!(reference[k] > 0.0) || !(test[k] > 0.0)) {
      throw Error(ErrorCode::kNonPositiveInput, "LSD of a non-positive magnitude");
    }
    const double d = 20.0 * std::log10(reference[k] / test[k]);
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(reference.size()));
}

inline double LogSpectralDistortion(const SpectralEnvelope& reference,
                                    const SpectralEnvelope& test) {
  if (reference.fft_size != test.fft_size || reference.sample_rate_hz != test.sample_rate_hz ||
      reference.magnitudes.size() != test.magnitudes.size()) {
    throw Error(ErrorCode::kGridMismatch, "envelopes are on different grids");
  }
  return LsdDb(reference.magnitudes, test.magnitudes);
}

struct DistortionReport {
  std::vector<double> per_frame_lsd_db;
  double mean_lsd_db = 0.0;
  int n_frames = 0;
  int n_bands = 0;
  InterpMethod method = InterpMethod::kLinear;

  bool operator==(const DistortionReport&) const = default;
};

// Per-frame LSD between the floored spectrum at each band's argmax bin and
// the reconstructed envelope at the same bins.
inline double FrameFidelity(const std::vector<double>& spectrum, const BandLayout& layout,
                            InterpMethod method) {
  const MsasbFrame frame = FrameFromSpectrum(spectrum, layout);
  const SpectralEnvelope env = ReconstructEnvelope(frame, layout, method);
  std::vector<double> ref, test;
  ref.reserve(layout.band_bins.size());
  test.reserve(layout.band_bins.size());
  for (const auto& [first, last] : layout.band_bins) {
    std::size_t best = first;
    for (std::size_t k = first + 1; k <= last; ++k) {
      if (spectrum[k] > spectrum[best]) best = k;
    }
    ref.push_back(spectrum[best]);
    test.push_back(env.magnitudes[best]);
  }
  return LsdDb(ref, test);
}

inline DistortionReport EnvelopeFidelity(const AudioBuffer& audio, const F0Contour& f0,
                                         const AnalysisConfig& config, InterpMethod method,
                                         const ExecPolicy& policy = {}) {
  config.Validate();
  CheckShift(f0.frame_shift_ms, config.frame_shift_ms);
  const BandLayout layout = MakeBandLayout(config, audio.sample_rate_hz);
  DistortionReport report;
  report.n_bands = config.n_bands;
  report.method = method;
  report.n_frames = static_cast<int>(f0.size());
  report.per_frame_lsd_db.resize(f0.size());
  ParallelFor(f0.size(), policy, [&](std::size_t k) {
    const auto& fr = f0.frames[k];
    const auto window = WindowForFrame(fr.f0_hz, fr.voiced, config, audio.sample_rate_hz);
    const auto centre = FrameInstant(k, config.frame_shift_ms, audio.sample_rate_hz);
    const auto spectrum = FrameSpectrum(audio, centre, window, config.fft_size);
    report.per_frame_lsd_db[k] = FrameFidelity(spectrum, layout, method);
  });
  double sum = 0.0;
  for (double v : report.per_frame_lsd_db) sum += v;
  report.mean_lsd_db = f0.size() > 0 ? sum / static_cast<double>(f0.size()) : 0.0;
  return report;
}

inline DistortionReport EnvelopeFidelity(const AudioBuffer& audio, const AnalysisConfig& config,
                                         InterpMethod method, const ExecPolicy& policy = {}) {
  const F0Contour f0 = EstimateF0(audio, config.frame_shift_ms, {}, policy);
  return EnvelopeFidelity(audio, f0, config, method, policy);
}

// One report per band count, all sharing one F0 contour and frame grid.
inline std::vector<DistortionReport> Sweep(const AudioBuffer& audio,
                                           const std::vector<int>& band_counts,
                                           InterpMethod method, const AnalysisConfig& base = {},
                                           const ExecPolicy& policy = {}) {
  std::vector<DistortionReport> reports;
  if (band_counts.empty()) return reports;
  for (int n : band_counts) {
    AnalysisConfig config = base;
    config.n_bands = n;
    MakeBandLayout(config, audio.sample_rate_hz);  // fail before any work
  }
  const F0Contour f0 = EstimateF0(audio, base.frame_shift_ms, {}, policy);
  reports.reserve(band_counts.size());
  for (int n : band_counts) {
    AnalysisConfig config = base;
    config.n_bands = n;
    reports.push_back(EnvelopeFidelity(audio, f0, config, method, policy));
  }
  return reports;
}

constexpr const char* kReportCsvHeader = "n_bands,method,n_frames,mean_lsd_db";

inline std::string ReportCsvRow(const DistortionReport& r) {
  std::ostringstream os;
  os.precision(10);
  os << r.n_bands << ',' << InterpName(r.method) << ',' << r.n_frames << ',' << r.mean_lsd_db;
  return os.str();
}

inline std::string ReportsCsv(const std::vector<DistortionReport>& reports) {
  std::string out = std::string(kReportCsvHeader) + "\n";
  for (const auto& r : reports) out += ReportCsvRow(r) + "\n";
  return out;
}

inline std::string PerFrameCsv(const std::vector<DistortionReport>& reports,
                               double frame_shift_ms) {
  std::ostringstream os;
  os.precision(10);
  os << "n_bands,method,frame,time_s,lsd_db\n";
  for (const auto& r : reports) {
    for (std::size_t k = 0; k < r.per_frame_lsd_db.size(); ++k) {
      os << r.n_bands << ',' << InterpName(r.method) << ',' << k << ','
         << static_cast<double>(k) * frame_shift_ms / 1000.0 << ',' << r.per_frame_lsd_db[k]
         << '\n';
    }
  }
  return os.str();
}

}  // namespace msasb
