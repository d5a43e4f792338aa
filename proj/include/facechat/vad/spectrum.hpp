#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace facechat::vad {

inline constexpr double kSilenceDb = -96.0;

struct FrameFeatures {
  double energy_db = kSilenceDb;  // dBFS of the raw frame, clamped at -96
  double band_fraction = 0.0;     // share of Hann-windowed spectral energy inside the band
};

// Per-frame energy and speech-band energy fraction for fixed-length PCM16 frames.
class BandAnalyzer {
 public:
  BandAnalyzer(std::size_t frame_samples, int sample_rate, double band_low_hz, double band_high_hz);

  FrameFeatures analyze(std::span<const std::int16_t> frame) const;
  std::size_t frame_samples() const { return n_; }

 private:
  std::size_t n_;
  std::size_t first_bin_;
  std::size_t last_bin_;
  std::vector<double> window_;
  std::vector<double> cos_;
  std::vector<double> sin_;
};

// dBFS of a PCM16 block (full-scale sine reads about -3.01 dB).
double energy_dbfs(std::span<const std::int16_t> samples);

}  // namespace facechat::vad
