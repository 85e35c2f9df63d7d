#include "soundscape/audio_dsp.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <string>

#include "soundscape/errors.hpp"

namespace soundscape {
namespace {

// FFTW planning is not thread-safe; execution on a private plan is.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

class RealFft {
 public:
  explicit RealFft(std::size_t n)
      : n_(n),
        in_(static_cast<double*>(fftw_malloc(sizeof(double) * n))),
        out_(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (n / 2 + 1)))) {
    if (!in_ || !out_) {
      release();
      throw std::bad_alloc();
    }
    std::lock_guard lock(fftw_planner_mutex());
    plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), in_, out_, FFTW_ESTIMATE);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;
  ~RealFft() { release(); }

  std::span<double> input() { return {in_, n_}; }

  void power(std::span<double> out) {
    fftw_execute(plan_);
    for (std::size_t k = 0; k < out.size(); ++k) {
      out[k] = out_[k][0] * out_[k][0] + out_[k][1] * out_[k][1];
    }
  }

 private:
  void release() {
    if (plan_) {
      std::lock_guard lock(fftw_planner_mutex());
      fftw_destroy_plan(plan_);
      plan_ = nullptr;
    }
    fftw_free(in_);
    fftw_free(out_);
    in_ = nullptr;
    out_ = nullptr;
  }

  std::size_t n_;
  double* in_;
  fftw_complex* out_;
  fftw_plan plan_ = nullptr;
};

// Sparse view of one filterbank row: weights on bins [first, first+size).
struct FilterRow {
  std::size_t first = 0;
  std::vector<double> weights;
};

std::vector<FilterRow> sparse_rows(const RealGrid& fb) {
  std::vector<FilterRow> rows(fb.rows());
  for (std::size_t m = 0; m < fb.rows(); ++m) {
    auto r = fb.row(m);
    auto lo = std::find_if(r.begin(), r.end(), [](double v) { return v > 0.0; });
    if (lo == r.end()) continue;
    auto hi = std::find_if(std::make_reverse_iterator(r.end()),
                           std::make_reverse_iterator(lo),
                           [](double v) { return v > 0.0; })
                  .base();
    rows[m].first = static_cast<std::size_t>(lo - r.begin());
    rows[m].weights.assign(lo, hi);
  }
  return rows;
}

}  // namespace

void validate(const Waveform& w) {
  if (w.samples.empty()) throw ArgumentError("waveform is empty");
  if (w.sample_rate_hz <= 0) throw ArgumentError("sample rate must be positive");
  for (double x : w.samples) {
    if (!std::isfinite(x)) throw ArgumentError("waveform contains non-finite samples");
  }
}

void validate(const SpectrogramConfig& cfg, int sample_rate_hz) {
  if (sample_rate_hz <= 0) throw ArgumentError("sample rate must be positive");
  if (cfg.n_fft < 2) throw ArgumentError("n_fft must be at least 2");
  if (cfg.hop == 0 || cfg.hop > cfg.n_fft) {
    throw ArgumentError("hop must satisfy 0 < hop <= n_fft");
  }
  if (cfg.n_mels < 2) throw ArgumentError("n_mels must be at least 2");
  if (!(cfg.fmin_hz >= 0.0 && cfg.fmin_hz < cfg.fmax_hz)) {
    throw ArgumentError("Mel range must satisfy 0 <= fmin < fmax");
  }
  if (cfg.fmax_hz > sample_rate_hz / 2.0) {
    throw ArgumentError("fmax " + std::to_string(cfg.fmax_hz) + " Hz is above Nyquist");
  }
  if (!(cfg.log_floor > 0.0) || !std::isfinite(cfg.log_floor)) {
    throw ArgumentError("log_floor must be positive");
  }
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

std::vector<double> hann_window(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t k = 0; k < n; ++k) {
    w[k] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(k) /
                                static_cast<double>(n));
  }
  return w;
}

std::vector<Waveform> segment_waveform(const Waveform& w, double clip_seconds,
                                       double min_tail_fraction) {
  validate(w);
  if (!(clip_seconds > 0.0) || !std::isfinite(clip_seconds)) {
    throw ArgumentError("clip_seconds must be positive");
  }
  if (!(min_tail_fraction >= 0.0 && min_tail_fraction <= 1.0)) {
    throw ArgumentError("min_tail_fraction must lie in [0, 1]");
  }
  const auto clip_len =
      static_cast<std::size_t>(std::llround(clip_seconds * w.sample_rate_hz));
  if (clip_len == 0) throw ArgumentError("clip shorter than one sample");

  std::vector<Waveform> clips;
  const std::size_t total = w.samples.size();
  for (std::size_t start = 0; start < total; start += clip_len) {
    const std::size_t real = std::min(clip_len, total - start);
    if (real < clip_len &&
        static_cast<double>(real) < min_tail_fraction * static_cast<double>(clip_len)) {
      break;
    }
    Waveform clip;
    clip.sample_rate_hz = w.sample_rate_hz;
    clip.samples.assign(clip_len, 0.0);
    std::copy_n(w.samples.begin() + static_cast<std::ptrdiff_t>(start), real,
                clip.samples.begin());
    clips.push_back(std::move(clip));
  }
  return clips;
}

RealGrid mel_filterbank(const SpectrogramConfig& cfg, int sample_rate_hz) {
  validate(cfg, sample_rate_hz);
  const std::size_t n_bins = cfg.n_fft / 2 + 1;
  const double mel_lo = hz_to_mel(cfg.fmin_hz);
  const double mel_hi = hz_to_mel(cfg.fmax_hz);

  std::vector<double> edges(cfg.n_mels + 2);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    double mel = mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) /
                              static_cast<double>(cfg.n_mels + 1);
    edges[i] = mel_to_hz(mel);
  }

  RealGrid fb(cfg.n_mels, n_bins);
  const double bin_hz = static_cast<double>(sample_rate_hz) / static_cast<double>(cfg.n_fft);
  for (std::size_t m = 0; m < cfg.n_mels; ++m) {
    const double lower = edges[m];
    const double center = edges[m + 1];
    const double upper = edges[m + 2];
    for (std::size_t k = 0; k < n_bins; ++k) {
      const double f = static_cast<double>(k) * bin_hz;
      const double rising = (f - lower) / (center - lower);
      const double falling = (upper - f) / (upper - center);
      fb(m, k) = std::max(0.0, std::min(rising, falling));
    }
  }
  return fb;
}

std::vector<double> power_spectrum(std::span<const double> frame) {
  if (frame.size() < 2) throw ArgumentError("frame must hold at least 2 samples");
  RealFft fft(frame.size());
  std::copy(frame.begin(), frame.end(), fft.input().begin());
  std::vector<double> out(frame.size() / 2 + 1);
  fft.power(out);
  return out;
}

std::size_t frame_count(std::size_t n_samples, const SpectrogramConfig& cfg) {
  if (n_samples < cfg.n_fft) return 0;
  return 1 + (n_samples - cfg.n_fft) / cfg.hop;
}

LogMelSpectrogram log_mel_spectrogram(const Waveform& w, const SpectrogramConfig& cfg) {
  validate(w);
  if (w.sample_rate_hz != cfg.sample_rate_hz) {
    throw ArgumentError("waveform sample rate " + std::to_string(w.sample_rate_hz) +
                        " Hz differs from configured " +
                        std::to_string(cfg.sample_rate_hz) + " Hz; resample upstream");
  }
  const RealGrid fb = mel_filterbank(cfg, w.sample_rate_hz);
  if (w.samples.size() < cfg.n_fft) {
    throw ArgumentError("waveform of " + std::to_string(w.samples.size()) +
                        " samples is shorter than one frame (" +
                        std::to_string(cfg.n_fft) + ")");
  }

  const std::size_t frames = frame_count(w.samples.size(), cfg);
  const auto rows = sparse_rows(fb);
  const auto window = hann_window(cfg.n_fft);
  const double log_floor = std::log(cfg.log_floor);

  LogMelSpectrogram out{RealGrid(cfg.n_mels, frames, log_floor), cfg};
  RealFft fft(cfg.n_fft);
  std::vector<double> power(cfg.n_fft / 2 + 1);
  for (std::size_t t = 0; t < frames; ++t) {
    auto in = fft.input();
    const double* x = w.samples.data() + t * cfg.hop;
    for (std::size_t k = 0; k < cfg.n_fft; ++k) in[k] = x[k] * window[k];
    fft.power(power);
    for (std::size_t m = 0; m < rows.size(); ++m) {
      double energy = 0.0;
      const auto& r = rows[m];
      for (std::size_t k = 0; k < r.weights.size(); ++k) {
        energy += r.weights[k] * power[r.first + k];
      }
      if (energy > cfg.log_floor) out.values(m, t) = std::log(energy);
    }
  }
  return out;
}

PatchGrid patchify(const RealGrid& grid, std::size_t patch_h, std::size_t patch_w) {
  if (patch_h == 0 || patch_w == 0) throw ArgumentError("patch dimensions must be positive");
  if (grid.rows() % patch_h != 0 || grid.cols() % patch_w != 0) {
    throw ArgumentError("grid " + std::to_string(grid.rows()) + "x" +
                        std::to_string(grid.cols()) + " is not divisible into " +
                        std::to_string(patch_h) + "x" + std::to_string(patch_w) +
                        " patches");
  }
  PatchGrid out;
  out.patch_h = patch_h;
  out.patch_w = patch_w;
  const std::size_t blocks_down = grid.rows() / patch_h;
  const std::size_t blocks_across = grid.cols() / patch_w;
  out.patches.reserve(blocks_down * blocks_across);
  for (std::size_t br = 0; br < blocks_down; ++br) {
    for (std::size_t bc = 0; bc < blocks_across; ++bc) {
      std::vector<double> patch;
      patch.reserve(patch_h * patch_w);
      for (std::size_t r = 0; r < patch_h; ++r) {
        auto src = grid.row(br * patch_h + r).subspan(bc * patch_w, patch_w);
        patch.insert(patch.end(), src.begin(), src.end());
      }
      out.patches.push_back(std::move(patch));
    }
  }
  return out;
}

}  // namespace soundscape
