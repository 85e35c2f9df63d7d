#pragma once

#include <filesystem>
#include <iosfwd>

#include "soundscape/audio_dsp.hpp"

namespace soundscape {

/// Reads RIFF/WAVE with PCM 16/24/32-bit or IEEE float32 samples. Multi-channel
/// input is averaged to mono. PCM is scaled to [-1, 1).
Waveform read_wav(std::istream& in);
Waveform read_wav(const std::filesystem::path& path);

enum class WavEncoding { kPcm16, kPcm24, kPcm32, kFloat32 };

/// Mono writer, mainly for fixtures and round-trip tests. PCM samples are
/// clipped to [-1, 1).
void write_wav(std::ostream& out, const Waveform& w, WavEncoding encoding = WavEncoding::kPcm16);

}  // namespace soundscape
