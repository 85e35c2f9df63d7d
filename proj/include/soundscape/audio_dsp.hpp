#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace soundscape {

/// Mono PCM signal as binary64 samples.
struct Waveform {
  std::vector<double> samples;
  int sample_rate_hz = 16000;
};

/// Throws ArgumentError unless the waveform is non-empty, has a positive
/// rate and only finite samples.
void validate(const Waveform& w);

/// Dense row-major matrix of reals.
class RealGrid {
 public:
  RealGrid() = default;
  RealGrid(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<const double> data() const noexcept { return data_; }

  bool operator==(const RealGrid&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// STFT and Mel parameters. Defaults follow the 16 kHz / 25 ms / 10 ms /
/// 128-band convention of the audio spectrogram transformer front end.
struct SpectrogramConfig {
  int sample_rate_hz = 16000;
  std::size_t n_fft = 400;
  std::size_t hop = 160;
  std::size_t n_mels = 128;
  double fmin_hz = 0.0;
  double fmax_hz = 8000.0;
  double log_floor = 1e-10;

  bool operator==(const SpectrogramConfig&) const = default;
};

/// Throws ArgumentError if any config invariant fails for `sample_rate_hz`.
void validate(const SpectrogramConfig& cfg, int sample_rate_hz);

/// F x T' grid S(f, t) = ln(max(Mel |STFT|^2, log_floor)).
struct LogMelSpectrogram {
  RealGrid values;
  SpectrogramConfig config;
};

struct PatchGrid {
  std::vector<std::vector<double>> patches;
  std::size_t patch_h = 0;
  std::size_t patch_w = 0;

  std::size_t count() const noexcept { return patches.size(); }
};

double hz_to_mel(double hz);
double mel_to_hz(double mel);

/// Periodic Hann window of length n: 0.5 - 0.5 cos(2 pi k / n).
std::vector<double> hann_window(std::size_t n);

/// Cuts `w` into consecutive non-overlapping clips of clip_seconds. A final
/// partial clip is zero-padded when at least `min_tail_fraction` of it is real
/// signal and dropped otherwise.
std::vector<Waveform> segment_waveform(const Waveform& w, double clip_seconds = 10.0,
                                       double min_tail_fraction = 0.5);

/// Triangular HTK-Mel filters, n_mels x (n_fft/2 + 1), peak weight 1.
/// Filters narrower than one FFT bin can come out all zero; that is inherent
/// to the bin grid, not an error.
RealGrid mel_filterbank(const SpectrogramConfig& cfg, int sample_rate_hz);

/// One-sided power spectrum |X_k|^2, k = 0..n/2, of an already windowed frame.
std::vector<double> power_spectrum(std::span<const double> frame);

std::size_t frame_count(std::size_t n_samples, const SpectrogramConfig& cfg);

LogMelSpectrogram log_mel_spectrogram(const Waveform& w, const SpectrogramConfig& cfg = {});

/// Non-overlapping row-major partition of S into patch_h x patch_w blocks,
/// each flattened row-major. Dimensions must divide exactly.
PatchGrid patchify(const RealGrid& grid, std::size_t patch_h, std::size_t patch_w);
inline PatchGrid patchify(const LogMelSpectrogram& s, std::size_t patch_h,
                          std::size_t patch_w) {
  return patchify(s.values, patch_h, patch_w);
}

}  // namespace soundscape
