// SPDX-License-Identifier: MIT
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sonicdist/dsp/types.hpp"
#include "sonicdist/error.hpp"

namespace sonicdist::dsp {

namespace detail {
inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
inline void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>(v >> 8));
}
inline std::uint32_t get_u32(const unsigned char* p) {
  return std::uint32_t{p[0]} | std::uint32_t{p[1]} << 8 | std::uint32_t{p[2]} << 16 | std::uint32_t{p[3]} << 24;
}
inline std::uint16_t get_u16(const unsigned char* p) { return static_cast<std::uint16_t>(p[0] | p[1] << 8); }
}  // namespace detail

/// 16-bit PCM mono little-endian WAV image. Samples are multiplied by
/// `full_scale` (1.0 maps to 32767), rounded and clipped.
inline std::string encode_wav(std::span<const double> samples, std::uint32_t sample_rate_hz, double full_scale = 1.0) {
  if (sample_rate_hz == 0) throw InvalidArgument("wav: sample rate must be positive");
  if (!(full_scale > 0.0)) throw InvalidArgument("wav: full scale must be positive");
  const auto data_bytes = static_cast<std::uint32_t>(samples.size() * 2);
  std::string out;
  out.reserve(44 + data_bytes);
  out += "RIFF";
  detail::put_u32(out, 36 + data_bytes);
  out += "WAVEfmt ";
  detail::put_u32(out, 16);
  detail::put_u16(out, 1);  // PCM
  detail::put_u16(out, 1);  // mono
  detail::put_u32(out, sample_rate_hz);
  detail::put_u32(out, sample_rate_hz * 2);
  detail::put_u16(out, 2);
  detail::put_u16(out, 16);
  out += "data";
  detail::put_u32(out, data_bytes);
  for (double v : samples) {
    const double q = std::round(std::clamp(v / full_scale, -1.0, 1.0) * 32767.0);
    detail::put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
  }
  return out;
}

inline void write_wav(const std::string& path, std::span<const double> samples, std::uint32_t sample_rate_hz,
                      double full_scale = 1.0) {
  const auto bytes = encode_wav(samples, sample_rate_hz, full_scale);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw std::runtime_error("write failed: " + path);
}

/// Decodes a 16-bit PCM mono WAV; samples come back scaled to [-1, 1).
inline SampleBuffer decode_wav(std::span<const unsigned char> bytes) {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 || std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw InvalidArgument("wav: not a RIFF/WAVE file");
  SampleBuffer out;
  bool have_fmt = false;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    const std::uint32_t size = detail::get_u32(chunk + 4);
    if (pos + 8 + size > bytes.size()) throw InvalidArgument("wav: truncated chunk");
    const unsigned char* body = chunk + 8;
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16) throw InvalidArgument("wav: short fmt chunk");
      if (detail::get_u16(body) != 1 || detail::get_u16(body + 2) != 1 || detail::get_u16(body + 14) != 16)
        throw InvalidArgument("wav: only 16-bit PCM mono is supported");
      out.sample_rate_hz = detail::get_u32(body + 4);
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      if (!have_fmt) throw InvalidArgument("wav: data before fmt");
      out.samples.resize(size / 2);
      for (std::size_t i = 0; i < out.samples.size(); ++i)
        out.samples[i] = static_cast<std::int16_t>(detail::get_u16(body + 2 * i)) / 32768.0;
      return out;
    }
    pos += 8 + size + (size & 1);
  }
  throw InvalidArgument("wav: no data chunk");
}

inline SampleBuffer read_wav(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return decode_wav(bytes);
}

}  // namespace sonicdist::dsp
