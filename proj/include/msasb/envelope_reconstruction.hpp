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

// Dense envelope from the N_b + 2 stored samples, and its minimum-phase
// impulse response.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "msasb/error.hpp"
#include "msasb/fft.hpp"
#include "msasb/msasb_analysis.hpp"
#include "msasb/types.hpp"

namespace msasb {

enum class InterpMethod { kLinear, kCubic };

constexpr std::string_view InterpName(InterpMethod m) {
  return m == InterpMethod::kLinear ? "linear" : "cubic";
}

inline std::optional<InterpMethod> ParseInterp(std::string_view name) {
  if (name == "linear") return InterpMethod::kLinear;
  if (name == "cubic") return InterpMethod::kCubic;
  return std::nullopt;
}

// Magnitudes on the grid k * fs / fft_size, k = 0 .. fft_size / 2.
struct SpectralEnvelope {
  std::vector<double> magnitudes;
  std::size_t fft_size = 0;
  int sample_rate_hz = 0;

  double bin_hz(std::size_t k) const {
    return static_cast<double>(k) * sample_rate_hz / static_cast<double>(fft_size);
  }
};

// Natural cubic spline (zero second derivative at both ends) through knots
// with strictly increasing abscissae.
class NaturalCubicSpline {
 public:
  NaturalCubicSpline(std::vector<double> x, std::vector<double> y)
      : x_(std::move(x)), y_(std::move(y)), m_(x_.size(), 0.0) {
    const std::size_t n = x_.size();
    if (n < 2 || y_.size() != n) {
      throw Error(ErrorCode::kInvalidConfig, "spline needs >= 2 matching knots");
    }
    if (n == 2) return;
    // Tridiagonal system for interior second derivatives m_[1..n-2].
    std::vector<double> diag(n - 2), upper(n - 2), rhs(n - 2);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double h0 = x_[i] - x_[i - 1];
      const double h1 = x_[i + 1] - x_[i];
      diag[i - 1] = 2.0 * (h0 + h1);
      upper[i - 1] = h1;
      rhs[i - 1] = 6.0 * ((y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0);
    }
    // Thomas algorithm; lower[i] == upper[i - 1] by symmetry.
    for (std::size_t i = 1; i < n - 2; ++i) {
      const double w = upper[i - 1] / diag[i - 1];
      diag[i] -= w * upper[i - 1];
      rhs[i] -= w * rhs[i - 1];
    }
    m_[n - 2] = rhs[n - 3] / diag[n - 3];
    for (std::size_t i = n - 3; i-- > 0;) {
      m_[i + 1] = (rhs[i] - upper[i] * m_[i + 2]) / diag[i];
    }
  }

  double operator()(double t) const { return Eval(t, Segment(t)); }

  // Second derivative at knot i.
  double curvature(std::size_t i) const { return m_[i]; }

  // The s-th segment [x_s, x_{s+1}] containing t (clamped to the ends).
  std::size_t Segment(double t) const {
    const auto it = std::upper_bound(x_.begin(), x_.end(), t);
    const auto idx = static_cast<std::size_t>(std::distance(x_.begin(), it));
    return std::clamp<std::size_t>(idx == 0 ? 0 : idx - 1, 0, x_.size() - 2);
  }

  double Eval(double t, std::size_t s) const {
    const double h = x_[s + 1] - x_[s];
    const double a = (x_[s + 1] - t) / h;
    const double b = (t - x_[s]) / h;
    return a * y_[s] + b * y_[s + 1] +
           ((a * a * a - a) * m_[s] + (b * b * b - b) * m_[s + 1]) * h * h / 6.0;
  }

 private:
  std::vector<double> x_, y_, m_;
};

// Piecewise linear interpolation through (x, y), x strictly increasing,
// evaluated at each query; queries outside the knot span extrapolate the
// end segments.
inline std::vector<double> InterpolateLinear(std::span<const double> x, std::span<const double> y,
                                             std::span<const double> query) {
  std::vector<double> out(query.size());
  for (std::size_t q = 0; q < query.size(); ++q) {
    const double t = query[q];
    const auto it = std::upper_bound(x.begin(), x.end(), t);
    auto s = static_cast<std::size_t>(std::distance(x.begin(), it));
    s = std::clamp<std::size_t>(s == 0 ? 0 : s - 1, 0, x.size() - 2);
    const double frac = (t - x[s]) / (x[s + 1] - x[s]);
    out[q] = y[s] + frac * (y[s + 1] - y[s]);
  }
  return out;
}

inline std::vector<double> InterpolateCubic(std::span<const double> x, std::span<const double> y,
                                            std::span<const double> query) {
  const NaturalCubicSpline spline({x.begin(), x.end()}, {y.begin(), y.end()});
  std::vector<double> out(query.size());
  for (std::size_t q = 0; q < query.size(); ++q) out[q] = spline(query[q]);
  return out;
}

// Anchors: (0, dc), (centre_hz[b], band_max[b]), (fs/2, nyquist). The stored
// maxima are placed at their band centres; interpolation runs on natural-log
// magnitude and the result is exponentiated on the DFT grid.
inline SpectralEnvelope ReconstructEnvelope(const MsasbFrame& frame, const BandLayout& layout,
                                            InterpMethod method) {
  if (frame.band_max.size() != static_cast<std::size_t>(layout.n_bands)) {
    throw Error(ErrorCode::kGridMismatch, "frame band count differs from layout");
  }
  const auto values = frame.values();
  std::vector<double> x(values.size()), y(values.size());
  x.front() = 0.0;
  for (std::size_t b = 0; b < layout.centre_hz.size(); ++b) x[b + 1] = layout.centre_hz[b];
  x.back() = layout.sample_rate_hz / 2.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] > 0.0) || !std::isfinite(values[i])) {
      throw Error(ErrorCode::kNonPositiveInput,
                  "anchor " + std::to_string(i) + " is " + std::to_string(values[i]));
    }
    y[i] = std::log(values[i]);
  }

  std::vector<double> grid(layout.num_bins());
  for (std::size_t k = 0; k < grid.size(); ++k) grid[k] = layout.bin_hz(k);
  auto log_env = method == InterpMethod::kLinear ? InterpolateLinear(x, y, grid)
                                                 : InterpolateCubic(x, y, grid);
  SpectralEnvelope env;
  env.fft_size = layout.fft_size;
  env.sample_rate_hz = layout.sample_rate_hz;
  env.magnitudes.resize(log_env.size());
  for (std::size_t k = 0; k < log_env.size(); ++k) env.magnitudes[k] = std::exp(log_env[k]);
  return env;
}

// Minimum-phase impulse response with magnitude response `envelope`, by
// causal folding of the real cepstrum:
//   c = IDFT(log|E|),  c'[0] = c[0],  c'[n] = 2 c[n] (0 < n < N/2),
//   c'[N/2] = c[N/2],  c'[n] = 0 (n > N/2),  h = IDFT(exp(DFT(c'))).
inline std::vector<double> MinPhaseImpulseResponse(const SpectralEnvelope& envelope,
                                                   std::size_t length) {
  const std::size_t n = envelope.fft_size;
  if (!IsPowerOfTwo(n) || n < 4 || envelope.magnitudes.size() != n / 2 + 1) {
    throw Error(ErrorCode::kGridMismatch, "envelope grid does not match its fft size");
  }
  if (length == 0 || length > n) {
    throw Error(ErrorCode::kInvalidConfig,
                "impulse response length must be in [1, " + std::to_string(n) + "]");
  }
  RealFft& fft = RealFftFor(n);
  auto spec = fft.freq();
  for (std::size_t k = 0; k <= n / 2; ++k) {
    const double m = envelope.magnitudes[k];
    if (!(m > 0.0) || !std::isfinite(m)) {
      throw Error(ErrorCode::kNonPositiveEnvelope,
                  "bin " + std::to_string(k) + " is " + std::to_string(m));
    }
    spec[k] = std::log(m);
  }
  fft.Inverse();  // real cepstrum
  auto ceps = fft.time();
  for (std::size_t i = 1; i < n / 2; ++i) ceps[i] *= 2.0;
  for (std::size_t i = n / 2 + 1; i < n; ++i) ceps[i] = 0.0;
  fft.Forward();
  for (auto& z : fft.freq()) z = std::exp(z);
  fft.Inverse();
  const auto h = fft.time();
  return {h.begin(), h.begin() + static_cast<std::ptrdiff_t>(length)};
}

}  // namespace msasb
