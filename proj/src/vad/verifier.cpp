#include "facechat/vad/verifier.hpp"

#include <vector>

namespace facechat::vad {

SpectralVerifier::SpectralVerifier(const VadConfig& config)
    : analyzer_(config.frame_samples(), kSampleRate, config.band_low_hz, config.band_high_hz),
      gate_db_(config.energy_floor_db + config.gate_margin_db) {}

double SpectralVerifier::score(std::span<const std::int16_t> samples_16k) {
  const std::size_t n = analyzer_.frame_samples();
  if (samples_16k.empty()) return 0.0;
  double total = 0.0;
  std::size_t frames = 0;
  for (std::size_t pos = 0; pos < samples_16k.size(); pos += n) {
    std::span<const std::int16_t> frame;
    std::vector<std::int16_t> padded;
    if (pos + n <= samples_16k.size()) {
      frame = samples_16k.subspan(pos, n);
    } else {
      // Trailing partial frame counts only if it is at least half a frame.
      const std::size_t rest = samples_16k.size() - pos;
      if (frames > 0 && rest < n / 2) break;
      padded.assign(samples_16k.begin() + static_cast<std::ptrdiff_t>(pos), samples_16k.end());
      padded.resize(n, 0);
      frame = padded;
    }
    const FrameFeatures f = analyzer_.analyze(frame);
    if (f.energy_db > gate_db_) total += f.band_fraction;
    ++frames;
  }
  return frames == 0 ? 0.0 : total / static_cast<double>(frames);
}

}  // namespace facechat::vad
