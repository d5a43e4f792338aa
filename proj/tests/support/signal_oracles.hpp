#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

namespace facechat::testing {

// Hann-windowed DTFT magnitude at `hz`, computed directly.
inline double dtft_magnitude(std::span<const std::int16_t> x, double rate, double hz) {
  const double n = static_cast<double>(x.size());
  double re = 0.0, im = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double w = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / (n - 1));
    const double phase = 2.0 * std::numbers::pi * hz * static_cast<double>(i) / rate;
    re += w * x[i] * std::cos(phase);
    im -= w * x[i] * std::sin(phase);
  }
  return std::hypot(re, im);
}

inline double peak_frequency(std::span<const std::int16_t> x, double rate, double lo, double hi, double step) {
  double best_hz = lo, best = -1.0;
  for (double f = lo; f <= hi; f += step) {
    const double m = dtft_magnitude(x, rate, f);
    if (m > best) {
      best = m;
      best_hz = f;
    }
  }
  return best_hz;
}

inline std::vector<std::int16_t> sine_pcm(std::size_t n, double hz, double rate, double amplitude) {
  std::vector<std::int16_t> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = static_cast<std::int16_t>(
        std::lround(amplitude * 32767.0 * std::sin(2.0 * std::numbers::pi * hz * static_cast<double>(i) / rate)));
  }
  return out;
}

inline double rms(std::span<const std::int16_t> x) {
  double s = 0.0;
  for (auto v : x) s += static_cast<double>(v) * v;
  return x.empty() ? 0.0 : std::sqrt(s / static_cast<double>(x.size()));
}

}  // namespace facechat::testing
