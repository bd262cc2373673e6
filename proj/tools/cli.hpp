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

// Command-line front end: f0, analyze, synthesize, copy-synth, metrics,
// sweep. RunCli() is the whole program so tests can drive it in-process.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "msasb/msasb.hpp"

namespace msasb::cli {

struct CliConfig {
  int bands = 100;
  std::string interp = "linear";
  double frame_shift_ms = 5.0;
  std::size_t fft_size = 0;  // 0: smallest power of two for the sample rate
  std::uint64_t seed = 0;
  bool log_domain = false;
  std::vector<int> sweep_bands = {60, 80, 100, 120, 140, 160};
  unsigned threads = 0;
  bool verbose = false;
};

namespace detail {

// Writes through a sibling temporary and renames into place, so `path` only
// ever appears complete.
inline void CommitOutput(const std::filesystem::path& path,
                         const std::function<void(const std::filesystem::path&)>& write) {
  std::filesystem::path tmp = path;
  tmp += ".partial";
  try {
    write(tmp);
    std::filesystem::rename(tmp, path);
  } catch (...) {
    std::error_code ec;
    std::filesystem::remove(tmp, ec);
    throw;
  }
}

inline void WriteText(const std::filesystem::path& path, const std::string& text) {
  CommitOutput(path, [&](const std::filesystem::path& p) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << text;
    out.flush();
    if (!out) throw Error(ErrorCode::kIoFailure, "write failed: " + p.string());
  });
}

inline InterpMethod Method(const CliConfig& c) {
  const auto m = ParseInterp(c.interp);
  if (!m) throw Error(ErrorCode::kInvalidConfig, "unknown interpolation '" + c.interp + "'");
  return *m;
}

inline AnalysisConfig Analysis(const CliConfig& c, int sample_rate_hz) {
  AnalysisConfig a;
  a.n_bands = c.bands;
  a.frame_shift_ms = c.frame_shift_ms;
  a.fft_size = c.fft_size > 0 ? c.fft_size : DefaultFftSize(sample_rate_hz, a);
  a.Validate();
  MakeBandLayout(a, sample_rate_hz);
  return a;
}

inline void EchoConfig(std::ostream& err, const std::string& command, const CliConfig& c,
                       std::size_t fft_size) {
  err << "msasb " << command << ": bands=" << c.bands << " interp=" << c.interp
      << " frame_shift_ms=" << c.frame_shift_ms << " fft_size=" << fft_size
      << " seed=" << c.seed << " log_domain=" << (c.log_domain ? 1 : 0)
      << " threads=" << ExecPolicy{c.threads}.Resolve() << "\n";
}

inline void LogGain(std::ostream& err, const CliConfig& c, double gain) {
  if (c.verbose && gain != 1.0) {
    err << "msasb: output peak-normalized to " << kPeakLimit << " (gain " << gain << ")\n";
  }
}

}  // namespace detail

inline int RunCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  using namespace detail;
  CLI::App app{"MSASB vocoder: sub-band maximum spectral envelopes and copy synthesis",
               "msasb"};
  app.require_subcommand(1);
  app.fallthrough();
  CliConfig c;
  app.add_option("--bands", c.bands, "Number of sub-bands N_b")->check(CLI::PositiveNumber);
  app.add_option("--interp", c.interp, "Envelope interpolation")
      ->check(CLI::IsMember({"linear", "cubic"}));
  app.add_option("--frame-shift-ms", c.frame_shift_ms, "Frame shift in ms")
      ->check(CLI::PositiveNumber);
  app.add_option("--fft-size", c.fft_size, "DFT size (power of two)");
  app.add_option("--seed", c.seed, "Noise seed");
  app.add_flag("--log-domain", c.log_domain, "Store natural-log features (analyze)");
  app.add_option("--sweep-bands", c.sweep_bands, "Band counts for sweep")->delimiter(',');
  app.add_option("--threads", c.threads, "Worker threads (0 = all cores)");
  app.add_flag("--verbose", c.verbose, "Echo the parsed configuration");

  std::string in_wav, out_wav, f0_path, msb_path, report_path, frames_path;

  auto* f0_cmd = app.add_subcommand("f0", "Estimate an F0 contour");
  f0_cmd->add_option("input", in_wav, "Input WAV")->required();
  f0_cmd->add_option("output", f0_path, "Output F0 text file")->required();

  auto* analyze_cmd = app.add_subcommand("analyze", "Extract MSASB features");
  analyze_cmd->add_option("input", in_wav, "Input WAV")->required();
  analyze_cmd->add_option("f0", f0_path, "F0 text file")->required();
  analyze_cmd->add_option("output", msb_path, "Output MSB1 file")->required();

  auto* synth_cmd = app.add_subcommand("synthesize", "Render features and F0 to audio");
  synth_cmd->add_option("features", msb_path, "MSB1 file")->required();
  synth_cmd->add_option("f0", f0_path, "F0 text file")->required();
  synth_cmd->add_option("output", out_wav, "Output WAV")->required();

  auto* copy_cmd = app.add_subcommand("copy-synth", "Analysis-by-synthesis of a WAV file");
  copy_cmd->add_option("input", in_wav, "Input WAV")->required();
  copy_cmd->add_option("output", out_wav, "Output WAV")->required();

  auto* metrics_cmd = app.add_subcommand("metrics", "Envelope fidelity report (CSV)");
  metrics_cmd->add_option("input", in_wav, "Input WAV")->required();
  metrics_cmd->add_option("--out", report_path, "Report CSV (default: stdout)");
  metrics_cmd->add_option("--per-frame", frames_path, "Per-frame CSV");

  auto* sweep_cmd = app.add_subcommand("sweep", "Envelope fidelity over band counts (CSV)");
  sweep_cmd->add_option("input", in_wav, "Input WAV")->required();
  sweep_cmd->add_option("--out", report_path, "Report CSV (default: stdout)");
  sweep_cmd->add_option("--per-frame", frames_path, "Per-frame CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream help_out, help_err;
    const int code = app.exit(e, help_out, help_err);
    out << help_out.str();
    err << help_err.str();
    return code == 0 ? 0 : 1;
  }

  try {
    const ExecPolicy policy{c.threads};
    const auto emit_reports = [&](const std::vector<DistortionReport>& reports) {
      const std::string csv = ReportsCsv(reports);
      if (report_path.empty()) {
        out << csv;
      } else {
        WriteText(report_path, csv);
      }
      if (!frames_path.empty()) WriteText(frames_path, PerFrameCsv(reports, c.frame_shift_ms));
    };

    if (*f0_cmd) {
      const AudioBuffer audio = ReadWav(in_wav);
      if (c.verbose) EchoConfig(err, "f0", c, 0);
      const F0Contour f0 = EstimateF0(audio, c.frame_shift_ms, {}, policy);
      CommitOutput(f0_path, [&](const auto& p) { WriteF0(f0, p); });
    } else if (*analyze_cmd) {
      const AudioBuffer audio = ReadWav(in_wav);
      const AnalysisConfig config = Analysis(c, audio.sample_rate_hz);
      if (c.verbose) EchoConfig(err, "analyze", c, config.fft_size);
      const F0Contour f0 = ReadF0(f0_path, c.frame_shift_ms);
      // A contour made at another shift shows up as the wrong frame count.
      const auto expected = FrameCount(audio.samples.size(), c.frame_shift_ms, audio.sample_rate_hz);
      if (f0.size() != expected) {
        throw Error(ErrorCode::kFrameShiftMismatch,
                    f0_path + " has " + std::to_string(f0.size()) + " frames, expected " +
                        std::to_string(expected) + " at " + std::to_string(c.frame_shift_ms) +
                        " ms");
      }
      FeatureTrack track = Analyze(audio, f0, config, policy);
      if (c.log_domain) track = ToLogDomain(std::move(track));
      CommitOutput(msb_path, [&](const auto& p) { WriteFeatures(track, p); });
    } else if (*synth_cmd) {
      const FeatureTrack stored = ReadFeatures(msb_path);
      CliConfig from_file = c;
      from_file.bands = stored.n_bands;
      from_file.frame_shift_ms = stored.frame_shift_ms;
      const AnalysisConfig config = Analysis(from_file, stored.sample_rate_hz);
      if (c.verbose) EchoConfig(err, "synthesize", from_file, config.fft_size);
      const F0Contour f0 = ReadF0(f0_path, stored.frame_shift_ms);
      const BandLayout layout = MakeBandLayout(config, stored.sample_rate_hz);
      const auto result = RenderWithGain(ToLinearDomain(stored), layout, f0, Method(c), c.seed,
                                         {}, policy);
      LogGain(err, c, result.gain);
      CommitOutput(out_wav, [&](const auto& p) { WriteWav(result.audio, p); });
    } else if (*copy_cmd) {
      const AudioBuffer audio = ReadWav(in_wav);
      const AnalysisConfig config = Analysis(c, audio.sample_rate_hz);
      if (c.verbose) EchoConfig(err, "copy-synth", c, config.fft_size);
      const auto result = CopySynthesisWithGain(audio, config, Method(c), c.seed, policy);
      LogGain(err, c, result.gain);
      CommitOutput(out_wav, [&](const auto& p) { WriteWav(result.audio, p); });
    } else if (*metrics_cmd) {
      const AudioBuffer audio = ReadWav(in_wav);
      const AnalysisConfig config = Analysis(c, audio.sample_rate_hz);
      if (c.verbose) EchoConfig(err, "metrics", c, config.fft_size);
      emit_reports({EnvelopeFidelity(audio, config, Method(c), policy)});
    } else if (*sweep_cmd) {
      const AudioBuffer audio = ReadWav(in_wav);
      const AnalysisConfig config = Analysis(c, audio.sample_rate_hz);
      if (c.verbose) EchoConfig(err, "sweep", c, config.fft_size);
      emit_reports(Sweep(audio, c.sweep_bands, Method(c), config, policy));
    }
  } catch (const std::exception& e) {
    err << "msasb: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace msasb::cli
