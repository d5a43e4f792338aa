#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace facechat::vad {

struct Interval {
  std::uint64_t start_ms = 0;
  std::uint64_t end_ms = 0;
  friend bool operator==(const Interval&, const Interval&) = default;
};

struct LabeledClip {
  std::string name;
  std::vector<std::int16_t> pcm;  // 16 kHz mono
  std::vector<Interval> reference;
};

// Portable deterministic draws (the std distributions are implementation-defined).
class SignalRng {
 public:
  explicit SignalRng(std::uint64_t seed) : engine_(seed) {}
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double gaussian();

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Float-domain generators at 16 kHz; amplitudes are linear full-scale fractions.
std::vector<double> voiced_speech(double duration_ms, double f0_hz, double amplitude, SignalRng& rng);
std::vector<double> sine_tone(double duration_ms, double hz, double amplitude, double phase = 0.0);
std::vector<double> white_noise(double duration_ms, double amplitude_rms, SignalRng& rng);
// Band-passed noise straddling the lower speech-band edge: frames flicker across
// the stage-1 band test while the average band fraction stays below one half.
std::vector<double> rumble_noise(double duration_ms, double amplitude_rms, SignalRng& rng,
                                 double centre_hz = 180.0);

std::vector<std::int16_t> to_pcm16(const std::vector<double>& signal);
void mix_into(std::vector<double>& dst, const std::vector<double>& src, std::size_t offset);

// The bundled evaluation corpus: voiced utterances (reference speech) mixed with
// low background noise, short in-band clicks, and rumble bursts.
std::vector<LabeledClip> synthetic_corpus(std::uint64_t seed = 20230601, int clips = 16);

}  // namespace facechat::vad
