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

// WAV, MSB1 feature and text F0 file formats.
//
// MSB1 layout (little-endian):
//   "MSB1" | u32 sample_rate_hz | f32 frame_shift_ms | u32 n_bands |
//   u8 log_domain | u32 frame_count | frame_count * (n_bands + 2) f32
// with each frame ordered [dc, band 0 .. band N_b-1, nyquist].

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "msasb/error.hpp"
#include "msasb/types.hpp"

namespace msasb {

namespace io_detail {

inline std::vector<std::uint8_t> ReadAll(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoFailure, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorCode::kIoFailure, "read failed: " + path.string());
  return bytes;
}

inline void WriteAll(const std::filesystem::path& path,
                     const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoFailure, "cannot create " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) throw Error(ErrorCode::kIoFailure, "write failed: " + path.string());
}

class ByteWriter {
 public:
  void Bytes(std::string_view s) { buf_.insert(buf_.end(), s.begin(), s.end()); }
  void U8(std::uint8_t v) { buf_.push_back(v); }
  void U16(std::uint16_t v) {
    for (int i = 0; i < 2; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void U32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void I16(std::int16_t v) { U16(static_cast<std::uint16_t>(v)); }
  void F32(float v) { U32(std::bit_cast<std::uint32_t>(v)); }

  const std::vector<std::uint8_t>& bytes() const { return buf_; }

 private:
  std::vector<std::uint8_t> buf_;
};

// Bounds-checked little-endian cursor. Running past the end throws
// `overrun_code`.
class ByteReader {
 public:
  ByteReader(const std::vector<std::uint8_t>& buf, ErrorCode overrun_code)
      : buf_(buf), overrun_(overrun_code) {}

  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return buf_.size() - pos_; }
  void Seek(std::size_t pos) {
    if (pos > buf_.size()) throw Error(overrun_, "offset past end of file");
    pos_ = pos;
  }
  void Skip(std::size_t n) { Need(n); pos_ += n; }

  std::string Tag() {
    Need(4);
    std::string s(reinterpret_cast<const char*>(&buf_[pos_]), 4);
    pos_ += 4;
    return s;
  }
  std::uint8_t U8() { Need(1); return buf_[pos_++]; }
  std::uint16_t U16() {
    Need(2);
    std::uint16_t v = static_cast<std::uint16_t>(buf_[pos_] | (buf_[pos_ + 1] << 8));
    pos_ += 2;
    return v;
  }
  std::uint32_t U32() {
    Need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(buf_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::int16_t I16() { return static_cast<std::int16_t>(U16()); }
  float F32() { return std::bit_cast<float>(U32()); }

 private:
  void Need(std::size_t n) const {
    if (buf_.size() - pos_ < n) throw Error(overrun_, "unexpected end of data");
  }

  const std::vector<std::uint8_t>& buf_;
  ErrorCode overrun_;
  std::size_t pos_ = 0;
};

constexpr std::uint16_t kWavePcm = 0x0001;
constexpr std::uint16_t kWaveFloat = 0x0003;
constexpr std::uint16_t kWaveExtensible = 0xFFFE;

}  // namespace io_detail

// Reads a mono RIFF/WAVE file holding 16-bit PCM or 32-bit float samples.
// PCM16 is divided by 32768.
inline AudioBuffer ReadWav(const std::filesystem::path& path) {
  using namespace io_detail;
  const auto bytes = ReadAll(path);
  ByteReader r(bytes, ErrorCode::kCorruptHeader);
  if (r.remaining() < 12 || r.Tag() != "RIFF") {
    throw Error(ErrorCode::kCorruptHeader, "missing RIFF tag in " + path.string());
  }
  r.U32();
  if (r.Tag() != "WAVE") {
    throw Error(ErrorCode::kCorruptHeader, "missing WAVE tag in " + path.string());
  }

  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  std::size_t data_pos = 0, data_size = 0;
  bool have_data = false;
  while (r.remaining() >= 8) {
    const std::string id = r.Tag();
    const std::uint32_t size = r.U32();
    const std::size_t body = r.pos();
    if (id == "fmt ") {
      if (size < 16) throw Error(ErrorCode::kCorruptHeader, "short fmt chunk");
      format = r.U16();
      channels = r.U16();
      rate = r.U32();
      r.U32();  // byte rate
      r.U16();  // block align
      bits = r.U16();
      if (format == kWaveExtensible) {
        if (size < 40) throw Error(ErrorCode::kCorruptHeader, "short extensible fmt");
        r.U16();  // cbSize
        r.U16();  // valid bits
        r.U32();  // channel mask
        format = r.U16();  // first two bytes of the subformat GUID
      }
      have_fmt = true;
    } else if (id == "data") {
      data_pos = body;
      data_size = std::min<std::size_t>(size, bytes.size() - body);
      have_data = true;
      break;
    }
    r.Seek(std::min(bytes.size(), body + size + (size & 1u)));
  }
  if (!have_fmt) throw Error(ErrorCode::kCorruptHeader, "no fmt chunk in " + path.string());
  if (!have_data) throw Error(ErrorCode::kCorruptHeader, "no data chunk in " + path.string());
  if (channels != 1) {
    throw Error(ErrorCode::kUnsupportedFormat,
                std::to_string(channels) + " channels; only mono is supported");
  }
  if (rate == 0) throw Error(ErrorCode::kCorruptHeader, "zero sample rate");
  if (rate > static_cast<std::uint32_t>(std::numeric_limits<int>::max())) {
    throw Error(ErrorCode::kCorruptHeader, "sample rate out of range");
  }

  AudioBuffer audio;
  audio.sample_rate_hz = static_cast<int>(rate);
  r.Seek(data_pos);
  if (format == kWavePcm && bits == 16) {
    const std::size_t n = data_size / 2;
    audio.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) audio.samples[i] = r.I16() / 32768.0;
  } else if (format == kWaveFloat && bits == 32) {
    const std::size_t n = data_size / 4;
    audio.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double v = r.F32();
      if (!std::isfinite(v)) {
        throw Error(ErrorCode::kUnsupportedFormat, "non-finite float sample");
      }
      audio.samples[i] = std::clamp(v, -1.0, 1.0);
    }
  } else {
    throw Error(ErrorCode::kUnsupportedFormat,
                "format tag " + std::to_string(format) + " with " +
                    std::to_string(bits) + " bits per sample");
  }
  return audio;
}

// PCM16 code for a sample: clip to [-1, 1], scale by 32768, round, saturate.
inline std::int16_t ToPcm16(double x) {
  const double scaled = std::nearbyint(std::clamp(x, -1.0, 1.0) * 32768.0);
  return static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0));
}

// Writes 16-bit PCM mono.
inline void WriteWav(const AudioBuffer& audio, const std::filesystem::path& path) {
  using namespace io_detail;
  const auto data_bytes = static_cast<std::uint32_t>(audio.samples.size() * 2);
  ByteWriter w;
  w.Bytes("RIFF");
  w.U32(36 + data_bytes);
  w.Bytes("WAVE");
  w.Bytes("fmt ");
  w.U32(16);
  w.U16(kWavePcm);
  w.U16(1);
  w.U32(static_cast<std::uint32_t>(audio.sample_rate_hz));
  w.U32(static_cast<std::uint32_t>(audio.sample_rate_hz) * 2);
  w.U16(2);
  w.U16(16);
  w.Bytes("data");
  w.U32(data_bytes);
  for (double x : audio.samples) w.I16(ToPcm16(x));
  WriteAll(path, w.bytes());
}

constexpr std::size_t kFeatureHeaderBytes = 4 + 4 + 4 + 4 + 1 + 4;

inline void WriteFeatures(const FeatureTrack& track,
                          const std::filesystem::path& path) {
  using namespace io_detail;
  ByteWriter w;
  w.Bytes("MSB1");
  w.U32(static_cast<std::uint32_t>(track.sample_rate_hz));
  w.F32(static_cast<float>(track.frame_shift_ms));
  w.U32(static_cast<std::uint32_t>(track.n_bands));
  w.U8(track.log_domain ? 1 : 0);
  w.U32(static_cast<std::uint32_t>(track.frames.size()));
  for (const auto& frame : track.frames) {
    if (frame.band_max.size() != static_cast<std::size_t>(track.n_bands)) {
      throw Error(ErrorCode::kInvalidConfig, "frame band count differs from n_bands");
    }
    w.F32(static_cast<float>(frame.dc));
    for (double v : frame.band_max) w.F32(static_cast<float>(v));
    w.F32(static_cast<float>(frame.nyquist));
  }
  WriteAll(path, w.bytes());
}

inline FeatureTrack ReadFeatures(const std::filesystem::path& path) {
  using namespace io_detail;
  const auto bytes = ReadAll(path);
  if (bytes.size() < 4 || std::memcmp(bytes.data(), "MSB1", 4) != 0) {
    throw Error(ErrorCode::kBadMagic, path.string() + " is not an MSB1 file");
  }
  ByteReader r(bytes, ErrorCode::kTruncatedFile);
  r.Skip(4);
  FeatureTrack track;
  const std::uint32_t rate = r.U32();
  track.frame_shift_ms = r.F32();
  const std::uint32_t n_bands = r.U32();
  track.log_domain = r.U8() != 0;
  const std::uint32_t n_frames = r.U32();
  if (rate == 0 || rate > static_cast<std::uint32_t>(std::numeric_limits<int>::max()) ||
      n_bands == 0 || n_bands > (1u << 24)) {
    throw Error(ErrorCode::kInvalidConfig, "implausible MSB1 header in " + path.string());
  }
  track.sample_rate_hz = static_cast<int>(rate);
  track.n_bands = static_cast<int>(n_bands);
  const std::uint64_t payload = std::uint64_t{n_frames} * (n_bands + 2) * 4;
  if (r.remaining() < payload) {
    throw Error(ErrorCode::kTruncatedFile,
                path.string() + " holds fewer frames than its header declares");
  }
  track.frames.resize(n_frames);
  for (auto& frame : track.frames) {
    frame.dc = r.F32();
    frame.band_max.resize(n_bands);
    for (auto& v : frame.band_max) v = r.F32();
    frame.nyquist = r.F32();
  }
  return track;
}

// One non-negative F0 value per line; 0 marks an unvoiced frame.
inline F0Contour ParseF0(std::string_view text, double frame_shift_ms) {
  F0Contour contour;
  contour.frame_shift_ms = frame_shift_ms;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.front()))) line.remove_prefix(1);
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.remove_suffix(1);
    if (line.empty()) continue;
    double value = 0.0;
    const auto [end, ec] = std::from_chars(line.data(), line.data() + line.size(), value);
    if (ec != std::errc{} || end != line.data() + line.size() || !std::isfinite(value)) {
      throw Error(ErrorCode::kParseFailure,
                  "line " + std::to_string(line_no) + ": '" + std::string(line) + "'");
    }
    if (value < 0.0) {
      throw Error(ErrorCode::kNegativeF0, "line " + std::to_string(line_no) +
                                              ": " + std::string(line));
    }
    contour.frames.push_back({value, value > 0.0});
  }
  return contour;
}

inline F0Contour ReadF0(const std::filesystem::path& path, double frame_shift_ms) {
  const auto bytes = io_detail::ReadAll(path);
  return ParseF0(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()),
                 frame_shift_ms);
}

inline void WriteF0(const F0Contour& contour, const std::filesystem::path& path) {
  std::string text;
  std::array<char, 64> buf{};
  for (const auto& frame : contour.frames) {
    const double v = frame.voiced ? frame.f0_hz : 0.0;
    const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    text.append(buf.data(), end);
    text.push_back('\n');
  }
  io_detail::WriteAll(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

}  // namespace msasb
