#include "soundscape/wav.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "soundscape/errors.hpp"

namespace soundscape {
namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint32_t le32(const unsigned char* p) {
  return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 |
         std::uint32_t(p[3]) << 24;
}
std::uint16_t le16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | p[1] << 8);
}

void read_exact(std::istream& in, unsigned char* dst, std::size_t n, const char* what) {
  in.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n) {
    throw FormatError(std::string("truncated WAV: ") + what);
  }
}

double decode_sample(const unsigned char* p, std::uint16_t format, std::uint16_t bits) {
  if (format == kFormatFloat) {
    float f;
    std::uint32_t u = le32(p);
    std::memcpy(&f, &u, sizeof f);
    return static_cast<double>(f);
  }
  switch (bits) {
    case 16:
      return static_cast<std::int16_t>(le16(p)) / 32768.0;
    case 24: {
      std::int32_t v = std::int32_t(p[0]) | std::int32_t(p[1]) << 8 | std::int32_t(p[2]) << 16;
      if (v & 0x800000) v -= 0x1000000;
      return v / 8388608.0;
    }
    case 32:
      return static_cast<std::int32_t>(le32(p)) / 2147483648.0;
  }
  throw FormatError("unsupported PCM bit depth " + std::to_string(bits));
}

void put16(std::ostream& out, std::uint16_t v) {
  char b[2] = {static_cast<char>(v & 0xFF), static_cast<char>(v >> 8)};
  out.write(b, 2);
}
void put32(std::ostream& out, std::uint32_t v) {
  char b[4] = {static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
               static_cast<char>((v >> 16) & 0xFF), static_cast<char>(v >> 24)};
  out.write(b, 4);
}

}  // namespace

Waveform read_wav(std::istream& in) {
  std::array<unsigned char, 12> riff{};
  read_exact(in, riff.data(), riff.size(), "RIFF header");
  if (std::memcmp(riff.data(), "RIFF", 4) != 0 || std::memcmp(riff.data() + 8, "WAVE", 4) != 0) {
    throw FormatError("not a RIFF/WAVE stream");
  }

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  std::vector<unsigned char> data;

  while (true) {
    std::array<unsigned char, 8> hdr{};
    in.read(reinterpret_cast<char*>(hdr.data()), hdr.size());
    if (in.gcount() == 0) break;
    if (in.gcount() != 8) throw FormatError("truncated WAV chunk header");
    const std::uint32_t size = le32(hdr.data() + 4);
    if (std::memcmp(hdr.data(), "fmt ", 4) == 0) {
      if (size < 16) throw FormatError("fmt chunk too small");
      std::vector<unsigned char> fmt(size);
      read_exact(in, fmt.data(), size, "fmt chunk");
      format = le16(fmt.data());
      channels = le16(fmt.data() + 2);
      rate = le32(fmt.data() + 4);
      bits = le16(fmt.data() + 14);
      if (format == kFormatExtensible) {
        if (size < 26) throw FormatError("extensible fmt chunk too small");
        format = le16(fmt.data() + 24);
      }
      have_fmt = true;
    } else if (std::memcmp(hdr.data(), "data", 4) == 0) {
      data.resize(size);
      read_exact(in, data.data(), size, "data chunk");
      break;
    } else {
      in.ignore(size);
    }
    if (size % 2 == 1) in.ignore(1);
  }

  if (!have_fmt) throw FormatError("WAV has no fmt chunk");
  if (channels == 0) throw FormatError("WAV declares zero channels");
  if (rate == 0) throw FormatError("WAV declares zero sample rate");
  if (format == kFormatFloat) {
    if (bits != 32) throw FormatError("only 32-bit float WAV is supported");
  } else if (format == kFormatPcm) {
    if (bits != 16 && bits != 24 && bits != 32) {
      throw FormatError("unsupported PCM bit depth " + std::to_string(bits));
    }
  } else {
    throw FormatError("unsupported WAV format tag " + std::to_string(format));
  }

  const std::size_t bytes = bits / 8;
  const std::size_t frame_bytes = bytes * channels;
  const std::size_t frames = data.size() / frame_bytes;

  Waveform w;
  w.sample_rate_hz = static_cast<int>(rate);
  w.samples.resize(frames);
  for (std::size_t i = 0; i < frames; ++i) {
    double sum = 0.0;
    for (std::size_t c = 0; c < channels; ++c) {
      sum += decode_sample(data.data() + i * frame_bytes + c * bytes, format, bits);
    }
    w.samples[i] = sum / channels;
  }
  return w;
}

Waveform read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open audio file '" + path.string() + "'");
  try {
    return read_wav(in);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_wav(std::ostream& out, const Waveform& w, WavEncoding encoding) {
  std::uint16_t bits = 16;
  std::uint16_t format = kFormatPcm;
  switch (encoding) {
    case WavEncoding::kPcm16: bits = 16; break;
    case WavEncoding::kPcm24: bits = 24; break;
    case WavEncoding::kPcm32: bits = 32; break;
    case WavEncoding::kFloat32:
      bits = 32;
      format = kFormatFloat;
      break;
  }
  const std::uint32_t bytes = bits / 8;
  const auto data_size = static_cast<std::uint32_t>(w.samples.size() * bytes);

  out.write("RIFF", 4);
  put32(out, 36 + data_size);
  out.write("WAVEfmt ", 8);
  put32(out, 16);
  put16(out, format);
  put16(out, 1);
  put32(out, static_cast<std::uint32_t>(w.sample_rate_hz));
  put32(out, static_cast<std::uint32_t>(w.sample_rate_hz) * bytes);
  put16(out, static_cast<std::uint16_t>(bytes));
  put16(out, bits);
  out.write("data", 4);
  put32(out, data_size);

  for (double x : w.samples) {
    if (format == kFormatFloat) {
      put32(out, std::bit_cast<std::uint32_t>(static_cast<float>(x)));
      continue;
    }
    const double scale = std::ldexp(1.0, bits - 1);
    const double clipped = std::clamp(x, -1.0, 1.0 - 1.0 / scale);
    const auto v = static_cast<std::int32_t>(std::lround(clipped * scale));
    const auto u = static_cast<std::uint32_t>(v);
    for (std::uint32_t b = 0; b < bytes; ++b) out.put(static_cast<char>((u >> (8 * b)) & 0xFF));
  }
}

}  // namespace soundscape
