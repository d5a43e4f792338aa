#include "facechat/vad/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace facechat::vad {

double energy_dbfs(std::span<const std::int16_t> samples) {
  if (samples.empty()) return kSilenceDb;
  double sum = 0.0;
  for (std::int16_t s : samples) {
    const double v = s / 32768.0;
    sum += v * v;
  }
  const double mean = sum / static_cast<double>(samples.size());
  if (mean <= 0.0) return kSilenceDb;
  return std::max(kSilenceDb, 10.0 * std::log10(mean));
}

BandAnalyzer::BandAnalyzer(std::size_t frame_samples, int sample_rate, double band_low_hz,
                           double band_high_hz)
    : n_(frame_samples), window_(frame_samples), cos_(frame_samples), sin_(frame_samples) {
  const double bin_hz = static_cast<double>(sample_rate) / static_cast<double>(n_);
  first_bin_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(band_low_hz / bin_hz)));
  last_bin_ = std::min<std::size_t>(n_ / 2 - 1,
                                    static_cast<std::size_t>(std::floor(band_high_hz / bin_hz)));
  for (std::size_t i = 0; i < n_; ++i) {
    const double phase = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n_);
    window_[i] = 0.5 - 0.5 * std::cos(phase);
    cos_[i] = std::cos(phase);
    sin_[i] = std::sin(phase);
  }
}

FrameFeatures BandAnalyzer::analyze(std::span<const std::int16_t> frame) const {
  FrameFeatures features;
  features.energy_db = energy_dbfs(frame);
  const std::size_t n = std::min(n_, frame.size());

  std::vector<double> x(n_, 0.0);
  double windowed_energy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = window_[i] * frame[i];
    windowed_energy += x[i] * x[i];
  }
  if (windowed_energy <= 0.0) return features;

  // Parseval: sum over all N bins of |X_k|^2 equals N * sum x^2; band bins
  // exclude DC and Nyquist so each counts twice in the two-sided spectrum.
  double band = 0.0;
  for (std::size_t k = first_bin_; k <= last_bin_; ++k) {
    double re = 0.0;
    double im = 0.0;
    std::size_t idx = 0;
    for (std::size_t i = 0; i < n_; ++i) {
      re += x[i] * cos_[idx];
      im -= x[i] * sin_[idx];
      idx += k;
      if (idx >= n_) idx -= n_;
    }
    band += re * re + im * im;
  }
  features.band_fraction =
      std::clamp(2.0 * band / (static_cast<double>(n_) * windowed_energy), 0.0, 1.0);
  return features;
}

}  // namespace facechat::vad
