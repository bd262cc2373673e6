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
#include <random>

#include "fixtures/synthetic_vowels.hpp"
#include "msasb/synthesis.hpp"
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

F0Contour Constant(std::size_t frames, double f0) {
  return {5.0, std::vector<F0Frame>(frames, F0Frame{f0, f0 > 0.0})};
}

FeatureTrack ConstantTrack(std::size_t frames, int n_bands, double value) {
  FeatureTrack t;
  t.n_bands = n_bands;
  t.frames.assign(frames, {value, std::vector<double>(static_cast<std::size_t>(n_bands), value), value});
  return t;
}

std::vector<std::size_t> ImpulsePositions(const std::vector<double>& x) {
  std::vector<std::size_t> pos;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] != 0.0) pos.push_back(i);
  }
  return pos;
}

}  // namespace

TEST_CASE("constant 200 Hz contour fires every 80 samples", "[excitation]") {
  const auto plan = BuildExcitation(Constant(201, 200.0), 16000, 16000, 0);
  REQUIRE(plan.samples.size() == 16000);
  const auto pos = ImpulsePositions(plan.samples);
  REQUIRE(pos.size() == 200);
  CHECK(pos.front() == 79);
  for (std::size_t i = 1; i < pos.size(); ++i) REQUIRE(pos[i] - pos[i - 1] == 80);
  for (auto p : pos) REQUIRE(plan.samples[p] == Catch::Approx(std::sqrt(80.0)));
}

TEST_CASE("impulse spacing tracks fs/f0", "[excitation][property]") {
  for (double f0 : {55.0, 97.3, 123.0, 211.1, 333.0, 499.0}) {
    const auto plan = BuildExcitation(Constant(201, f0), 16000, 16000, 0);
    const auto pos = ImpulsePositions(plan.samples);
    REQUIRE(pos.size() > 2);
    for (std::size_t i = 1; i < pos.size(); ++i) {
      REQUIRE(std::abs(static_cast<double>(pos[i] - pos[i - 1]) - 16000.0 / f0) <= 1.0);
    }
    double power = 0.0;
    for (double s : plan.samples) power += s * s;
    power /= static_cast<double>(plan.samples.size());
    CHECK(power >= 0.9);
    CHECK(power <= 1.1);
  }
}

TEST_CASE("unvoiced excitation is zero-mean unit-power noise", "[excitation]") {
  for (std::uint64_t seed : {0u, 1u, 99u}) {
    const auto plan = BuildExcitation(Constant(201, 0.0), 16000, 16000, seed);
    double mean = 0.0, power = 0.0;
    for (double s : plan.samples) {
      mean += s;
      power += s * s;
      REQUIRE(std::abs(s) <= std::sqrt(3.0));
    }
    mean /= 16000.0;
    power /= 16000.0;
    CHECK(std::abs(mean) < 0.05);
    CHECK(power >= 0.9);
    CHECK(power <= 1.1);
  }
}

TEST_CASE("excitation is reproducible from contour and seed", "[excitation]") {
  F0Contour mixed = Constant(201, 150.0);
  for (std::size_t k = 50; k < 120; ++k) mixed.frames[k] = {0.0, false};
  const auto a = BuildExcitation(mixed, 16000, 16000, 7);
  const auto b = BuildExcitation(mixed, 16000, 16000, 7);
  CHECK(a.samples == b.samples);
  CHECK(a.seed == 7);
  CHECK(BuildExcitation(mixed, 16000, 16000, 8).samples != a.samples);
}

TEST_CASE("phase restarts at each voicing onset", "[excitation]") {
  F0Contour mixed = Constant(201, 200.0);
  for (std::size_t k = 10; k < 20; ++k) mixed.frames[k] = {0.0, false};
  const auto plan = BuildExcitation(mixed, 16000, 16000, 0);
  // Frame 20 starts at sample 1600; the first impulse comes a full period later.
  for (std::size_t n = 1600; n < 1679; ++n) REQUIRE(plan.samples[n] == 0.0);
  CHECK(plan.samples[1679] == Catch::Approx(std::sqrt(80.0)));
}

TEST_CASE("excitation length must match the contour", "[excitation]") {
  CHECK(CodeOf([] { BuildExcitation(Constant(201, 100.0), 16000, 8000, 0); }) ==
        ErrorCode::kLengthMismatch);
  CHECK(CodeOf([] { BuildExcitation(Constant(0, 100.0), 16000, 10, 0); }) ==
        ErrorCode::kLengthMismatch);
  CHECK(BuildExcitation(Constant(0, 100.0), 16000, 0, 0).samples.empty());
  CHECK_NOTHROW(BuildExcitation(Constant(201, 100.0), 16000, 16079, 0));
  CHECK(SynthesisLength(201, 5.0, 16000) == 16079);
  CHECK(FrameCount(16079, 5.0, 16000) == 201);
}

TEST_CASE("flat track renders the impulse train itself", "[render]") {
  const auto layout = MakeBandLayout(100, 16000, 1024);
  const auto f0 = Constant(201, 200.0);
  RenderOptions opts;
  opts.total_samples = 16000;
  const auto result = RenderWithGain(ConstantTrack(201, 100, 1.0), layout, f0, InterpMethod::kLinear, 0, opts);
  REQUIRE(result.audio.samples.size() == 16000 + 512);
  CHECK(result.gain == Catch::Approx(0.9 / std::sqrt(80.0)));
  const auto plan = BuildExcitation(f0, 16000, 16000, 0);
  for (std::size_t n = 0; n < 16000; ++n) {
    REQUIRE(result.audio.samples[n] == Catch::Approx(result.gain * plan.samples[n]).margin(1e-12));
  }
  for (std::size_t n = 16000; n < result.audio.samples.size(); ++n) REQUIRE(std::abs(result.audio.samples[n]) < 1e-12);
}

TEST_CASE("empty track renders empty audio", "[render]") {
  const auto layout = MakeBandLayout(100, 16000, 1024);
  const auto out = Render(ConstantTrack(0, 100, 1.0), layout, Constant(0, 0.0), InterpMethod::kCubic, 0);
  CHECK(out.samples.empty());
  CHECK(out.sample_rate_hz == 16000);
}

TEST_CASE("render output is finite and peak limited", "[render][property]") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> mag(-8.0, 3.0);
  const auto layout = MakeBandLayout(60, 16000, 1024);
  for (int trial = 0; trial < 8; ++trial) {
    const std::size_t frames = 20 + rng() % 60;
    FeatureTrack t = ConstantTrack(frames, 60, 1.0);
    F0Contour f0 = Constant(frames, 0.0);
    for (std::size_t k = 0; k < frames; ++k) {
      auto& fr = t.frames[k];
      fr.dc = std::exp(mag(rng));
      fr.nyquist = std::exp(mag(rng));
      for (double& v : fr.band_max) v = std::exp(mag(rng));
      if (rng() % 3 != 0) f0.frames[k] = {60.0 + static_cast<double>(rng() % 400), true};
    }
    const auto out = Render(t, layout, f0, trial % 2 ? InterpMethod::kCubic : InterpMethod::kLinear, trial);
    double peak = 0.0;
    for (double s : out.samples) {
      REQUIRE(std::isfinite(s));
      peak = std::max(peak, std::abs(s));
    }
    CHECK(peak <= 0.9 + 1e-9);
  }
}

TEST_CASE("render is linear in track magnitude", "[render][property]") {
  const auto layout = MakeBandLayout(100, 16000, 1024);
  const auto vowel = fixtures::SynthesizeVowel(fixtures::BundledVowels()[0], 0.3);
  const auto f0 = EstimateF0(vowel, 5.0);
  const auto track = Analyze(vowel, f0, AnalysisConfig{});
  FeatureTrack doubled = track;
  for (auto& fr : doubled.frames) {
    fr.dc *= 2.0;
    fr.nyquist *= 2.0;
    for (double& v : fr.band_max) v *= 2.0;
  }
  RenderOptions raw;
  raw.peak_normalize = false;
  const auto a = Render(track, layout, f0, InterpMethod::kLinear, 3, raw);
  const auto b = Render(doubled, layout, f0, InterpMethod::kLinear, 3, raw);
  REQUIRE(a.samples.size() == b.samples.size());
  double scale = 0.0;
  for (double s : a.samples) scale = std::max(scale, std::abs(s));
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    REQUIRE(b.samples[i] == Catch::Approx(2.0 * a.samples[i]).margin(1e-10 * scale));
  }
}

TEST_CASE("overlap-add equals direct convolution for a shared response", "[render][property]") {
  const auto layout = MakeBandLayout(40, 16000, 512);
  MsasbFrame shape{0.2, std::vector<double>(40), 0.05};
  for (std::size_t b = 0; b < 40; ++b) shape.band_max[b] = 1.0 / (1.0 + 0.2 * static_cast<double>(b));
  FeatureTrack t;
  t.n_bands = 40;
  t.frames.assign(101, shape);
  F0Contour f0 = Constant(101, 140.0);
  for (std::size_t k = 40; k < 60; ++k) f0.frames[k] = {0.0, false};

  RenderOptions raw;
  raw.peak_normalize = false;
  const auto out = Render(t, layout, f0, InterpMethod::kCubic, 5, raw);
  const std::size_t total = SynthesisLength(101, 5.0, 16000);
  const auto e = BuildExcitation(f0, 16000, total, 5).samples;
  const auto h = MinPhaseImpulseResponse(ReconstructEnvelope(shape, layout, InterpMethod::kCubic), 256);
  REQUIRE(out.samples.size() == total + 256);
  std::vector<double> direct(total + 256, 0.0);
  for (std::size_t n = 0; n < total; ++n) {
    for (std::size_t j = 0; j < h.size(); ++j) direct[n + j] += e[n] * h[j];
  }
  for (std::size_t i = 0; i < direct.size(); ++i) REQUIRE(out.samples[i] == Catch::Approx(direct[i]).margin(1e-10));
}

TEST_CASE("render precondition errors", "[render]") {
  const auto layout = MakeBandLayout(100, 16000, 1024);
  CHECK(CodeOf([&] { Render(ConstantTrack(10, 100, 1.0), layout, Constant(11, 100.0), InterpMethod::kLinear, 0); }) ==
        ErrorCode::kFrameCountMismatch);
  auto log_track = ConstantTrack(10, 100, 0.0);
  log_track.log_domain = true;
  CHECK(CodeOf([&] { Render(log_track, layout, Constant(10, 100.0), InterpMethod::kLinear, 0); }) ==
        ErrorCode::kLogDomainMismatch);
  CHECK(CodeOf([&] { Render(ConstantTrack(10, 80, 1.0), layout, Constant(10, 100.0), InterpMethod::kLinear, 0); }) ==
        ErrorCode::kGridMismatch);
  F0Contour other_shift = Constant(10, 100.0);
  other_shift.frame_shift_ms = 10.0;
  CHECK(CodeOf([&] { Render(ConstantTrack(10, 100, 1.0), layout, other_shift, InterpMethod::kLinear, 0); }) ==
        ErrorCode::kFrameShiftMismatch);
}

TEST_CASE("copy synthesis preserves the vowel envelope below 4 kHz", "[copy_synth]") {
  const auto vowel = fixtures::SynthesizeVowel(fixtures::BundledVowels()[1]);
  const auto out = CopySynthesis(vowel, AnalysisConfig{}, InterpMethod::kLinear, 0);
  REQUIRE(out.samples.size() == vowel.samples.size() + 512);
  const auto in_ltas = msasb::testing::LongTermSpectrumDb(vowel.samples, vowel.samples.size(), 256);
  const auto out_ltas = msasb::testing::LongTermSpectrumDb(out.samples, vowel.samples.size(), 256);
  CHECK(msasb::testing::LevelAlignedRmsDb(in_ltas, out_ltas, 16000, 256, 4000.0) <= 3.0);
}

TEST_CASE("copy synthesis of silence stays silent", "[copy_synth]") {
  AudioBuffer silence{std::vector<double>(16000, 0.0), 16000};
  const auto out = CopySynthesis(silence, AnalysisConfig{}, InterpMethod::kLinear, 0);
  double power = 0.0;
  for (double s : out.samples) power += s * s;
  CHECK(std::sqrt(power / static_cast<double>(out.samples.size())) < 1e-3);
}

TEST_CASE("copy synthesis is deterministic", "[copy_synth]") {
  const auto vowel = fixtures::SynthesizeVowel(fixtures::BundledVowels()[2], 0.5);
  const auto a = CopySynthesis(vowel, AnalysisConfig{}, InterpMethod::kCubic, 42, ExecPolicy{1});
  CHECK(CopySynthesis(vowel, AnalysisConfig{}, InterpMethod::kCubic, 42, ExecPolicy{1}) == a);
  CHECK(CopySynthesis(vowel, AnalysisConfig{}, InterpMethod::kCubic, 42, ExecPolicy{4}) == a);
}
