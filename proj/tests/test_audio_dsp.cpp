#include "soundscape/audio_dsp.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <set>

#include "oracles.hpp"
#include "soundscape/errors.hpp"

namespace soundscape {
namespace {

Waveform noise(std::size_t n, std::uint64_t seed, int rate = 16000) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 0.3);
  Waveform w;
  w.sample_rate_hz = rate;
  w.samples.resize(n);
  for (auto& x : w.samples) x = g(rng);
  return w;
}

Waveform sine(double hz, std::size_t n, int rate = 16000) {
  Waveform w;
  w.sample_rate_hz = rate;
  w.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    w.samples[i] = std::sin(2.0 * std::numbers::pi * hz * static_cast<double>(i) / rate);
  }
  return w;
}

// --- segment_waveform -------------------------------------------------------

TEST(SegmentWaveform, TwentyFiveSecondsGivesThreeClips) {
  auto w = noise(400000, 1);
  auto clips = segment_waveform(w);
  ASSERT_EQ(clips.size(), 3u);
  for (const auto& c : clips) EXPECT_EQ(c.samples.size(), 160000u);
  for (std::size_t i = 0; i < 80000; ++i) ASSERT_EQ(clips[2].samples[i], w.samples[320000 + i]);
  for (std::size_t i = 80000; i < 160000; ++i) ASSERT_EQ(clips[2].samples[i], 0.0);
}

TEST(SegmentWaveform, ExactlyOneClipIsIdentity) {
  auto w = noise(160000, 2);
  auto clips = segment_waveform(w);
  ASSERT_EQ(clips.size(), 1u);
  EXPECT_EQ(clips[0].samples, w.samples);
}

TEST(SegmentWaveform, ShortTailDropped) {
  EXPECT_TRUE(segment_waveform(noise(48000, 3)).empty());
  // 49% of a clip tail is dropped, 50% is kept.
  EXPECT_EQ(segment_waveform(noise(160000 + 78400, 3)).size(), 1u);
  EXPECT_EQ(segment_waveform(noise(160000 + 80000, 3)).size(), 2u);
}

TEST(SegmentWaveform, RejectsBadArguments) {
  auto w = noise(1000, 4);
  EXPECT_THROW(segment_waveform(w, 0.0), ArgumentError);
  EXPECT_THROW(segment_waveform(w, -1.0), ArgumentError);
  Waveform bad = w;
  bad.samples[5] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(segment_waveform(bad), ArgumentError);
  EXPECT_THROW(segment_waveform(Waveform{}), ArgumentError);
}

TEST(SegmentWaveform, ConcatenationReproducesInput) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 100 + rng() % 5000;
    auto w = noise(n, rng(), 100);  // 1000-sample clips at 100 Hz
    auto clips = segment_waveform(w, 10.0, 0.0);
    std::vector<double> joined;
    for (const auto& c : clips) joined.insert(joined.end(), c.samples.begin(), c.samples.end());
    ASSERT_GE(joined.size(), n);
    joined.resize(n);
    EXPECT_EQ(joined, w.samples);
  }
}

// --- mel_filterbank ---------------------------------------------------------

TEST(MelFilterbank, DefaultShapeAndSign) {
  SpectrogramConfig cfg;
  auto fb = mel_filterbank(cfg, 16000);
  EXPECT_EQ(fb.rows(), 128u);
  EXPECT_EQ(fb.cols(), 201u);
  for (double v : fb.data()) EXPECT_GE(v, 0.0);
}

TEST(MelFilterbank, ContiguousSupportAndOracleAgreement) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 10; ++trial) {
    SpectrogramConfig cfg;
    cfg.n_fft = 128 + rng() % 900;
    cfg.hop = cfg.n_fft / 2;
    cfg.n_mels = 2 + rng() % 60;
    cfg.fmin_hz = static_cast<double>(rng() % 300);
    cfg.fmax_hz = 4000.0 + static_cast<double>(rng() % 4000);
    auto fb = mel_filterbank(cfg, 16000);
    ASSERT_EQ(fb.cols(), cfg.n_fft / 2 + 1);
    for (std::size_t m = 0; m < fb.rows(); ++m) {
      int transitions = 0;
      bool inside = false;
      for (std::size_t k = 0; k < fb.cols(); ++k) {
        const bool nz = fb(m, k) > 0.0;
        if (nz != inside) ++transitions;
        inside = nz;
        const double f = static_cast<double>(k) * 16000.0 / static_cast<double>(cfg.n_fft);
        const double expected = static_cast<double>(
            oracle::mel_weight(m, cfg.n_mels, cfg.fmin_hz, cfg.fmax_hz, f));
        ASSERT_NEAR(fb(m, k), expected, 1e-9) << "row " << m << " bin " << k;
      }
      EXPECT_LE(transitions, 2) << "row " << m << " support is not contiguous";
    }
  }
}

TEST(MelFilterbank, RejectsInvalidConfig) {
  SpectrogramConfig cfg;
  cfg.fmax_hz = 9000;
  EXPECT_THROW(mel_filterbank(cfg, 16000), ArgumentError);
  cfg = {};
  cfg.n_mels = 1;
  EXPECT_THROW(mel_filterbank(cfg, 16000), ArgumentError);
  cfg = {};
  cfg.hop = 401;
  EXPECT_THROW(mel_filterbank(cfg, 16000), ArgumentError);
  cfg = {};
  cfg.fmin_hz = 8000;
  EXPECT_THROW(mel_filterbank(cfg, 16000), ArgumentError);
  cfg = {};
  cfg.log_floor = 0;
  EXPECT_THROW(mel_filterbank(cfg, 16000), ArgumentError);
}

TEST(MelScale, HtkFormula) {
  EXPECT_NEAR(hz_to_mel(1000.0), 2595.0 * std::log10(1.0 + 1000.0 / 700.0), 1e-12);
  EXPECT_NEAR(mel_to_hz(hz_to_mel(4321.0)), 4321.0, 1e-9);
}

// --- power spectrum ---------------------------------------------------------

TEST(PowerSpectrum, MatchesBruteForceDftAndParseval) {
  std::mt19937_64 rng(7);
  for (std::size_t n : {16u, 400u, 401u, 512u, 1024u}) {
    auto frame = noise(n, rng()).samples;
    const auto fast = power_spectrum(frame);
    const auto slow = oracle::dft_power(frame);
    ASSERT_EQ(fast.size(), slow.size());
    for (std::size_t k = 0; k < fast.size(); ++k) {
      EXPECT_NEAR(fast[k], slow[k], 1e-9 * std::max(1.0, slow[k])) << "n=" << n << " k=" << k;
    }
    // Parseval on the one-sided spectrum: sum over all n bins = n * energy.
    double total = fast[0];
    for (std::size_t k = 1; k < fast.size(); ++k) {
      const bool nyquist = (n % 2 == 0) && k == n / 2;
      total += nyquist ? fast[k] : 2.0 * fast[k];
    }
    double energy = 0.0;
    for (double x : frame) energy += x * x;
    EXPECT_NEAR(total / (static_cast<double>(n) * energy), 1.0, 1e-6);
  }
}

TEST(HannWindow, Periodic) {
  auto w = hann_window(8);
  EXPECT_DOUBLE_EQ(w[0], 0.0);
  EXPECT_NEAR(w[4], 1.0, 1e-15);
  EXPECT_NEAR(w[2], 0.5, 1e-15);
  EXPECT_NEAR(w[6], 0.5, 1e-15);
}

// --- log_mel_spectrogram ----------------------------------------------------

TEST(LogMel, FrameCount) {
  SpectrogramConfig cfg;
  EXPECT_EQ(frame_count(160000, cfg), 998u);
  EXPECT_EQ(frame_count(400, cfg), 1u);
  EXPECT_EQ(frame_count(559, cfg), 1u);
  EXPECT_EQ(frame_count(560, cfg), 2u);
  auto s = log_mel_spectrogram(noise(16000, 8));
  EXPECT_EQ(s.values.rows(), 128u);
  EXPECT_EQ(s.values.cols(), frame_count(16000, cfg));
}

TEST(LogMel, SilenceSitsOnTheFloor) {
  Waveform w;
  w.samples.assign(4000, 0.0);
  SpectrogramConfig cfg;
  auto s = log_mel_spectrogram(w, cfg);
  for (double v : s.values.data()) ASSERT_EQ(v, std::log(cfg.log_floor));
}

TEST(LogMel, EntriesNeverBelowFloor) {
  SpectrogramConfig cfg;
  cfg.log_floor = 1e-3;
  auto s = log_mel_spectrogram(noise(8000, 9), cfg);
  for (double v : s.values.data()) ASSERT_GE(v, std::log(cfg.log_floor));
}

TEST(LogMel, ScalingShiftsByTwoLogAlpha) {
  auto w = noise(6400, 10);
  SpectrogramConfig cfg;
  const auto base = log_mel_spectrogram(w, cfg);
  const double floor = std::log(cfg.log_floor);
  for (double alpha : {2.0, 10.0, 0.5}) {
    Waveform scaled = w;
    for (auto& x : scaled.samples) x *= alpha;
    const auto s = log_mel_spectrogram(scaled, cfg);
    std::size_t checked = 0;
    for (std::size_t i = 0; i < s.values.data().size(); ++i) {
      const double a = base.values.data()[i], b = s.values.data()[i];
      if (a == floor || b == floor) continue;
      ASSERT_NEAR(b - a, 2.0 * std::log(alpha), 1e-9);
      ++checked;
    }
    EXPECT_GT(checked, 1000u);
  }
}

TEST(LogMel, SineLandsInTheFilterCoveringItsFrequency) {
  SpectrogramConfig cfg;
  const auto s = log_mel_spectrogram(sine(1000.0, 16000), cfg);
  std::size_t best = 0;
  double best_mean = -std::numeric_limits<double>::infinity();
  for (std::size_t m = 0; m < s.values.rows(); ++m) {
    double mean = 0.0;
    for (double v : s.values.row(m)) mean += std::exp(v);
    mean /= static_cast<double>(s.values.cols());
    if (mean > best_mean) {
      best_mean = mean;
      best = m;
    }
  }
  // The band edges come from the direct HTK definition, not the library.
  const double lo = oracle::htk_mel(cfg.fmin_hz), hi = oracle::htk_mel(cfg.fmax_hz);
  auto edge = [&](std::size_t i) {
    return static_cast<double>(oracle::htk_hz(lo + (hi - lo) * i / (cfg.n_mels + 1.0)));
  };
  EXPECT_LT(edge(best), 1000.0);
  EXPECT_GT(edge(best + 2), 1000.0);
}

TEST(LogMel, AgreesWithBruteForceOracle) {
  SpectrogramConfig cfg;
  cfg.n_fft = 256;
  cfg.hop = 128;
  cfg.n_mels = 24;
  auto w = noise(1024, 11);
  const auto s = log_mel_spectrogram(w, cfg);
  const auto ref = oracle::log_mel(w.samples, 16000, cfg.n_fft, cfg.hop, cfg.n_mels, cfg.fmin_hz,
                                   cfg.fmax_hz, cfg.log_floor);
  ASSERT_EQ(ref.size(), s.values.rows());
  for (std::size_t m = 0; m < ref.size(); ++m) {
    ASSERT_EQ(ref[m].size(), s.values.cols());
    for (std::size_t t = 0; t < ref[m].size(); ++t) {
      EXPECT_NEAR(s.values(m, t), ref[m][t], 1e-6 * std::abs(ref[m][t]) + 1e-12);
    }
  }
}

TEST(LogMel, RejectsBadInput) {
  EXPECT_THROW(log_mel_spectrogram(noise(399, 12)), ArgumentError);
  auto w = noise(1000, 13);
  w.samples[3] = std::numeric_limits<double>::infinity();
  EXPECT_THROW(log_mel_spectrogram(w), ArgumentError);
  EXPECT_THROW(log_mel_spectrogram(noise(1000, 14, 44100)), ArgumentError);
}

TEST(LogMel, IndependentOfEvaluationOrder) {
  auto a = noise(4000, 15), b = noise(4000, 16);
  const auto a1 = log_mel_spectrogram(a), b1 = log_mel_spectrogram(b);
  const auto b2 = log_mel_spectrogram(b), a2 = log_mel_spectrogram(a);
  EXPECT_EQ(a1.values, a2.values);
  EXPECT_EQ(b1.values, b2.values);
}

// --- patchify ---------------------------------------------------------------

RealGrid counting_grid(std::size_t rows, std::size_t cols) {
  RealGrid g(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) g(r, c) = static_cast<double>(r * cols + c);
  }
  return g;
}

TEST(Patchify, CountsAndSizes) {
  auto p = patchify(counting_grid(128, 96), 16, 16);
  EXPECT_EQ(p.count(), 48u);
  for (const auto& patch : p.patches) EXPECT_EQ(patch.size(), 256u);
  // Row-major patch order: the second patch starts at column 16 of row 0.
  EXPECT_EQ(p.patches[1][0], 16.0);
  EXPECT_EQ(p.patches[6][0], 16.0 * 96.0);
}

TEST(Patchify, WholeGridIsOnePatch) {
  auto g = counting_grid(8, 12);
  auto p = patchify(g, 8, 12);
  ASSERT_EQ(p.count(), 1u);
  EXPECT_TRUE(std::equal(p.patches[0].begin(), p.patches[0].end(), g.data().begin()));
}

TEST(Patchify, StrictDivisibility) {
  EXPECT_THROW(patchify(counting_grid(130, 96), 16, 16), ArgumentError);
  EXPECT_THROW(patchify(counting_grid(128, 90), 16, 16), ArgumentError);
  EXPECT_THROW(patchify(counting_grid(16, 16), 0, 16), ArgumentError);
}

TEST(Patchify, BijectionOverEntries) {
  for (auto [h, w, ph, pw] : {std::array<std::size_t, 4>{12, 20, 3, 5},
                              std::array<std::size_t, 4>{6, 6, 2, 3},
                              std::array<std::size_t, 4>{7, 9, 7, 1}}) {
    auto p = patchify(counting_grid(h, w), ph, pw);
    std::set<double> seen;
    for (const auto& patch : p.patches) seen.insert(patch.begin(), patch.end());
    EXPECT_EQ(seen.size(), h * w);
    EXPECT_EQ(p.count() * ph * pw, h * w);
  }
}

}  // namespace
}  // namespace soundscape
