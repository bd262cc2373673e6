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

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <functional>
#include <numeric>
#include <random>

#include "fixtures/synthetic_vowels.hpp"
#include "msasb/msasb_analysis.hpp"
#include "msasb/pitch_tracking.hpp"
#include "test_support.hpp"

using namespace msasb;

namespace {

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected msasb::Error");
  return ErrorCode::kIoFailure;
}

AudioBuffer RandomAudio(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(-0.8, 0.8);
  AudioBuffer a{std::vector<double>(n), 16000};
  for (double& s : a.samples) s = u(rng);
  return a;
}

}  // namespace

TEST_CASE("band layout at 16 kHz with 100 bands", "[analysis]") {
  const auto layout = MakeBandLayout(100, 16000, 1024);
  CHECK(layout.width_hz == 80.0);
  CHECK(layout.centre_hz.front() == 40.0);
  CHECK(layout.centre_hz.back() == 7960.0);
  for (std::size_t b = 0; b < 100; ++b) CHECK(layout.centre_hz[b] == 40.0 + 80.0 * b);
  // 15.625 Hz bins: 1..5 lie below 80 Hz.
  CHECK(layout.band_bins[0] == std::pair<std::size_t, std::size_t>{1, 5});
  CHECK(layout.band_bins.back().second == 511);
}

TEST_CASE("band layout partitions the interior bins by frequency", "[analysis][property]") {
  for (int fs : {8000, 16000, 22050, 44100}) {
    for (std::size_t fft : {512u, 1024u, 2048u}) {
      for (int n_bands : {1, 7, 60, 100, 160, 255}) {
        if (2 * static_cast<std::size_t>(n_bands) > fft / 2) continue;
        const auto layout = MakeBandLayout(n_bands, fs, fft);
        std::size_t next = 1;
        const double w = fs / (2.0 * n_bands);
        for (int b = 0; b < n_bands; ++b) {
          const auto [first, last] = layout.band_bins[static_cast<std::size_t>(b)];
          REQUIRE(first == next);
          REQUIRE(last >= first);
          for (std::size_t k = first; k <= last; ++k) {
            const double f = static_cast<double>(k) * fs / static_cast<double>(fft);
            REQUIRE(f >= b * w - 1e-9);
            REQUIRE(f < (b + 1) * w + 1e-9);
          }
          next = last + 1;
        }
        REQUIRE(next == fft / 2);
      }
    }
  }
}

TEST_CASE("empty bands are rejected", "[analysis]") {
  CHECK(CodeOf([] { MakeBandLayout(600, 16000, 1024); }) == ErrorCode::kTooManyBands);
  CHECK(CodeOf([] { MakeBandLayout(512, 16000, 1024); }) == ErrorCode::kTooManyBands);
  CHECK_NOTHROW(MakeBandLayout(511, 16000, 1024));
  CHECK(CodeOf([] { MakeBandLayout(10, 16000, 1000); }) == ErrorCode::kInvalidConfig);
}

TEST_CASE("default fft size covers the longest window", "[analysis]") {
  CHECK(DefaultFftSize(16000) == 1024);
  CHECK(DefaultFftSize(8000) == 512);
  CHECK(DefaultFftSize(48000) == 4096);
}

TEST_CASE("pitch-adaptive window lengths", "[analysis]") {
  AnalysisConfig config;
  CHECK(WindowLength(200.0, true, config, 16000) == 241);
  CHECK(WindowLength(0.0, false, config, 16000) == 241);
  CHECK(WindowLength(100.0, true, config, 16000) == 481);
  CHECK(WindowLength(50.0, true, config, 16000) == 961);
  CHECK(WindowLength(20.0, true, config, 16000) == 1023);  // capped
  CHECK(CodeOf([&] { WindowLength(0.0, true, config, 16000); }) == ErrorCode::kInvalidF0);

  for (double f0 : {50.0, 87.3, 123.0, 200.0, 333.3, 500.0}) {
    const auto w = WindowForFrame(f0, true, config, 16000);
    CHECK(w.size() % 2 == 1);
    CHECK(std::accumulate(w.begin(), w.end(), 0.0) == Catch::Approx(2.0).margin(1e-9));
    // Symmetric about the centre sample.
    for (std::size_t i = 0; i < w.size() / 2; ++i) REQUIRE(w[i] == Catch::Approx(w[w.size() - 1 - i]));
  }
}

TEST_CASE("floored spectrum agrees with a direct DFT", "[analysis]") {
  std::mt19937_64 rng(21);
  const auto audio = RandomAudio(rng, 4000);
  const auto window = HanningWindow(241);
  const auto spectrum = FrameSpectrum(audio, 2000, window, 1024);
  std::vector<double> segment(241);
  for (std::size_t i = 0; i < 241; ++i) segment[i] = audio.samples[2000 - 120 + i] * window[i];
  const auto oracle = msasb::testing::NaiveDftMagnitude(segment, 1024);
  const double peak = *std::max_element(oracle.begin(), oracle.end());
  for (std::size_t k = 0; k < oracle.size(); ++k) {
    REQUIRE(spectrum[k] == Catch::Approx(std::max(oracle[k], 1e-5 * peak)).epsilon(1e-9));
  }
}

TEST_CASE("impulse frame is flat", "[analysis]") {
  AnalysisConfig config;
  const auto layout = MakeBandLayout(config, 16000);
  AudioBuffer audio{std::vector<double>(2000, 0.0), 16000};
  audio.samples[1000] = 1.0;
  std::vector<double> window(241, 0.0);
  window[120] = 1.0;
  const auto frame = AnalyzeFrame(audio, 1000, window, layout, config);
  CHECK(frame.dc == Catch::Approx(1.0));
  CHECK(frame.nyquist == Catch::Approx(1.0));
  for (double v : frame.band_max) CHECK(v == Catch::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("1 kHz sine lands in its band at unit amplitude", "[analysis]") {
  AnalysisConfig config;
  const auto layout = MakeBandLayout(config, 16000);
  const auto sine = msasb::testing::Sine(1000.0, 0.25);
  const auto window = WindowForFrame(200.0, true, config, 16000);
  const auto frame = AnalyzeFrame(sine, 2000, window, layout, config);
  const std::size_t band = 1000 / 80;
  CHECK(frame.band_max[band] >= 0.9);
  CHECK(frame.band_max[band] <= 1.1);
  for (std::size_t b = 2000 / 80 + 1; b < frame.band_max.size(); ++b) CHECK(frame.band_max[b] < 0.01);
}

TEST_CASE("all-zero segment hits the absolute floor", "[analysis]") {
  AnalysisConfig config;
  const auto layout = MakeBandLayout(config, 16000);
  AudioBuffer zeros{std::vector<double>(4000, 0.0), 16000};
  const auto frame = AnalyzeFrame(zeros, 2000, WindowForFrame(0, false, config, 16000), layout, config);
  for (double v : frame.values()) CHECK(v == 1e-10);
  // A window hanging off either end of the buffer is zero padded.
  AudioBuffer ones{std::vector<double>(100, 0.5), 16000};
  const auto edge = AnalyzeFrame(ones, 0, WindowForFrame(0, false, config, 16000), layout, config);
  for (double v : edge.values()) CHECK(v > 0.0);
}

TEST_CASE("Analyze produces one frame per F0 frame", "[analysis]") {
  const auto vowel = fixtures::SynthesizeVowel(fixtures::BundledVowels()[1]);
  const auto f0 = EstimateF0(vowel, 5.0);
  REQUIRE(f0.size() == 201);
  const auto track = Analyze(vowel, f0, AnalysisConfig{});
  CHECK(track.frames.size() == 201);
  CHECK(track.n_bands == 100);
  CHECK(track.sample_rate_hz == 16000);
  CHECK_FALSE(track.log_domain);
  for (const auto& fr : track.frames) REQUIRE(fr.band_max.size() == 100);

  F0Contour wrong = f0;
  wrong.frame_shift_ms = 10.0;
  CHECK(CodeOf([&] { Analyze(vowel, wrong, AnalysisConfig{}); }) == ErrorCode::kFrameShiftMismatch);
  AudioBuffer empty{{}, 16000};
  CHECK(CodeOf([&] { Analyze(empty, f0, AnalysisConfig{}); }) == ErrorCode::kAudioTooShort);
}

TEST_CASE("sparse impulses give flat frames throughout", "[analysis]") {
  AudioBuffer audio{std::vector<double>(16000, 0.0), 16000};
  audio.samples[4000] = 0.7;
  audio.samples[12000] = -0.3;
  F0Contour f0{5.0, std::vector<F0Frame>(201)};
  for (std::size_t k = 0; k < f0.size(); k += 3) f0.frames[k] = {150.0, true};
  const auto track = Analyze(audio, f0, AnalysisConfig{});
  for (const auto& fr : track.frames) {
    for (double v : fr.band_max) {
      REQUIRE(v == Catch::Approx(fr.dc).epsilon(1e-9));
      REQUIRE(v == Catch::Approx(fr.nyquist).epsilon(1e-9));
    }
  }
}

TEST_CASE("band maxima match a brute-force scan", "[analysis][property]") {
  std::mt19937_64 rng(3);
  AnalysisConfig config;
  for (int n_bands : {60, 100, 160, 255}) {
    config.n_bands = n_bands;
    const auto layout = MakeBandLayout(config, 16000);
    for (int trial = 0; trial < 10; ++trial) {
      const auto audio = RandomAudio(rng, 3000);
      const auto window = WindowForFrame(50.0 + static_cast<double>(rng() % 450), true, config, 16000);
      const auto spectrum = FrameSpectrum(audio, 1500, window, config.fft_size);
      const auto frame = FrameFromSpectrum(spectrum, layout);
      const auto oracle = msasb::testing::BruteForceBandMax(spectrum, n_bands, 16000, config.fft_size);
      REQUIRE(frame.band_max == oracle);
      REQUIRE(frame.dc == spectrum.front());
      REQUIRE(frame.nyquist == spectrum.back());
      // Dominance over the interior bins.
      const double top = *std::max_element(frame.band_max.begin(), frame.band_max.end());
      for (std::size_t k = 1; k + 1 < spectrum.size(); ++k) REQUIRE(top >= spectrum[k]);
    }
  }
}

TEST_CASE("doubling the band count refines the maxima", "[analysis][property]") {
  std::mt19937_64 rng(4);
  AnalysisConfig coarse_cfg, fine_cfg;
  for (int n : {30, 60, 100, 128}) {
    coarse_cfg.n_bands = n;
    fine_cfg.n_bands = 2 * n;
    const auto coarse = MakeBandLayout(coarse_cfg, 16000);
    const auto fine = MakeBandLayout(fine_cfg, 16000);
    for (int trial = 0; trial < 5; ++trial) {
      const auto audio = RandomAudio(rng, 2000);
      const auto spectrum = FrameSpectrum(audio, 1000, HanningWindow(301), 1024);
      const auto c = FrameFromSpectrum(spectrum, coarse);
      const auto f = FrameFromSpectrum(spectrum, fine);
      for (std::size_t b = 0; b < c.band_max.size(); ++b) {
        REQUIRE(c.band_max[b] == std::max(f.band_max[2 * b], f.band_max[2 * b + 1]));
      }
    }
  }
}

TEST_CASE("analysis is linear in amplitude above the floor", "[analysis][property]") {
  const auto vowel = fixtures::SynthesizeVowel(fixtures::BundledVowels()[0], 0.3);
  const auto f0 = EstimateF0(vowel, 5.0);
  const auto base = Analyze(vowel, f0, AnalysisConfig{});
  for (double c : {0.25, 1.9}) {
    AudioBuffer scaled = vowel;
    for (double& s : scaled.samples) s *= c;
    const auto track = Analyze(scaled, f0, AnalysisConfig{});
    for (std::size_t k = 0; k < track.frames.size(); ++k) {
      const auto a = base.frames[k].values();
      const auto b = track.frames[k].values();
      for (std::size_t i = 0; i < a.size(); ++i) REQUIRE(b[i] == Catch::Approx(c * a[i]).epsilon(1e-9));
    }
  }
}

TEST_CASE("Analyze is deterministic across thread counts", "[analysis]") {
  const auto vowel = fixtures::SynthesizeVowel(fixtures::BundledVowels()[2], 0.4);
  const auto f0 = EstimateF0(vowel, 5.0);
  const auto one = Analyze(vowel, f0, AnalysisConfig{}, ExecPolicy{1});
  CHECK(Analyze(vowel, f0, AnalysisConfig{}, ExecPolicy{1}) == one);
  CHECK(Analyze(vowel, f0, AnalysisConfig{}, ExecPolicy{4}) == one);
}
