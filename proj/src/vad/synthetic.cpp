#include "facechat/vad/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "facechat/vad/config.hpp"

namespace facechat::vad {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::size_t samples_for(double duration_ms) {
  return static_cast<std::size_t>(std::llround(duration_ms * kSampleRate / 1000.0));
}

void apply_ramps(std::vector<double>& s, double ramp_ms) {
  const std::size_t ramp = std::min(samples_for(ramp_ms), s.size() / 2);
  for (std::size_t i = 0; i < ramp; ++i) {
    const double g = static_cast<double>(i) / static_cast<double>(ramp);
    s[i] *= g;
    s[s.size() - 1 - i] *= g;
  }
}

double formant_envelope(double hz) {
  auto bump = [hz](double centre, double width) {
    const double d = (hz - centre) / width;
    return std::exp(-d * d);
  };
  return 0.12 + bump(650.0, 260.0) + 0.7 * bump(1500.0, 350.0) + 0.4 * bump(2600.0, 400.0);
}

}  // namespace

double SignalRng::gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 1e-300) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  spare_ = r * std::sin(kTwoPi * u2);
  has_spare_ = true;
  return r * std::cos(kTwoPi * u2);
}

std::vector<double> voiced_speech(double duration_ms, double f0_hz, double amplitude,
                                  SignalRng& rng) {
  const std::size_t n = samples_for(duration_ms);
  std::vector<double> out(n, 0.0);
  const int harmonics = std::max(1, static_cast<int>(3800.0 / f0_hz));
  std::vector<double> weights(static_cast<std::size_t>(harmonics));
  std::vector<double> phases(static_cast<std::size_t>(harmonics));
  for (int h = 0; h < harmonics; ++h) {
    weights[static_cast<std::size_t>(h)] = formant_envelope(f0_hz * (h + 1));
    phases[static_cast<std::size_t>(h)] = rng.uniform(0.0, kTwoPi);
  }
  const double syllable_hz = rng.uniform(3.0, 5.0);
  const double syllable_phase = rng.uniform(0.0, kTwoPi);
  double f0_phase = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / kSampleRate;
    const double f0 = f0_hz * (1.0 + 0.03 * std::sin(kTwoPi * 5.0 * t));
    f0_phase += kTwoPi * f0 / kSampleRate;
    double v = 0.0;
    for (int h = 0; h < harmonics; ++h) {
      const auto k = static_cast<std::size_t>(h);
      v += weights[k] * std::sin((h + 1) * f0_phase + phases[k]);
    }
    const double syllable = 0.6 + 0.4 * std::sin(kTwoPi * syllable_hz * t + syllable_phase);
    out[i] = v * syllable;
  }
  double peak = 0.0;
  for (double v : out) peak = std::max(peak, std::abs(v));
  if (peak > 0.0) {
    for (double& v : out) v *= amplitude / peak;
  }
  apply_ramps(out, 15.0);
  return out;
}

std::vector<double> sine_tone(double duration_ms, double hz, double amplitude, double phase) {
  const std::size_t n = samples_for(duration_ms);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = amplitude * std::sin(kTwoPi * hz * static_cast<double>(i) / kSampleRate + phase);
  }
  return out;
}

std::vector<double> white_noise(double duration_ms, double amplitude_rms, SignalRng& rng) {
  const std::size_t n = samples_for(duration_ms);
  std::vector<double> out(n);
  for (auto& v : out) v = amplitude_rms * rng.gaussian();
  return out;
}

std::vector<double> rumble_noise(double duration_ms, double amplitude_rms, SignalRng& rng,
                                 double centre_hz) {
  const std::size_t n = samples_for(duration_ms);
  std::vector<double> out(n, 0.0);
  // RBJ band-pass biquad.
  const double w0 = kTwoPi * centre_hz / kSampleRate;
  const double q = 1.0;
  const double alpha = std::sin(w0) / (2.0 * q);
  const double a0 = 1.0 + alpha;
  const double b0 = alpha / a0;
  const double b2 = -alpha / a0;
  const double a1 = -2.0 * std::cos(w0) / a0;
  const double a2 = (1.0 - alpha) / a0;
  double x1 = 0.0, x2 = 0.0, y1 = 0.0, y2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = rng.gaussian();
    const double y = b0 * x + b2 * x2 - a1 * y1 - a2 * y2;
    x2 = x1;
    x1 = x;
    y2 = y1;
    y1 = y;
    out[i] = y;
  }
  double sum = 0.0;
  for (double v : out) sum += v * v;
  const double rms = n ? std::sqrt(sum / static_cast<double>(n)) : 0.0;
  if (rms > 0.0) {
    for (double& v : out) v *= amplitude_rms / rms;
  }
  apply_ramps(out, 20.0);
  return out;
}

std::vector<std::int16_t> to_pcm16(const std::vector<double>& signal) {
  std::vector<std::int16_t> out(signal.size());
  for (std::size_t i = 0; i < signal.size(); ++i) {
    const double v = std::clamp(signal[i], -1.0, 32767.0 / 32768.0) * 32768.0;
    out[i] = static_cast<std::int16_t>(std::lround(v));
  }
  return out;
}

void mix_into(std::vector<double>& dst, const std::vector<double>& src, std::size_t offset) {
  if (offset >= dst.size()) return;
  const std::size_t n = std::min(src.size(), dst.size() - offset);
  for (std::size_t i = 0; i < n; ++i) dst[offset + i] += src[i];
}

std::vector<LabeledClip> synthetic_corpus(std::uint64_t seed, int clips) {
  SignalRng rng(seed);
  std::vector<LabeledClip> corpus;
  enum class Event { Utterance, Click, Rumble };
  for (int c = 0; c < clips; ++c) {
    std::vector<Event> events{Event::Utterance, Event::Utterance, Event::Click,
                              Event::Click,     Event::Click,     Event::Rumble};
    // Fisher-Yates with the portable generator.
    for (std::size_t i = events.size() - 1; i > 0; --i) {
      const auto j = static_cast<std::size_t>(rng.uniform() * static_cast<double>(i + 1));
      std::swap(events[i], events[std::min(j, i)]);
    }

    struct Placed {
      Event kind;
      double start_ms;
      std::vector<double> signal;
    };
    std::vector<Placed> placed;
    double cursor = rng.uniform(600.0, 1000.0);
    for (Event e : events) {
      std::vector<double> sig;
      switch (e) {
        case Event::Utterance:
          sig = voiced_speech(std::round(rng.uniform(600.0, 2500.0)), rng.uniform(100.0, 230.0),
                              rng.uniform(0.2, 0.6), rng);
          break;
        case Event::Click: {
          sig = sine_tone(std::round(rng.uniform(40.0, 120.0)), rng.uniform(800.0, 2500.0),
                          rng.uniform(0.3, 0.6));
          apply_ramps(sig, 3.0);
          break;
        }
        case Event::Rumble:
          sig = rumble_noise(std::round(rng.uniform(400.0, 1200.0)), rng.uniform(0.05, 0.15), rng,
                             rng.uniform(165.0, 190.0));
          break;
      }
      const double start = std::round(cursor);
      const double length_ms = static_cast<double>(sig.size()) * 1000.0 / kSampleRate;
      placed.push_back({e, start, std::move(sig)});
      cursor = start + length_ms + rng.uniform(700.0, 1500.0);
    }
    const double total_ms = std::ceil(cursor + 1200.0);

    LabeledClip clip;
    clip.name = "clip" + std::to_string(c);
    const double background_db = rng.uniform(-55.0, -45.0);
    std::vector<double> mix = white_noise(total_ms, std::pow(10.0, background_db / 20.0), rng);
    for (const auto& p : placed) {
      mix_into(mix, p.signal, samples_for(p.start_ms));
      if (p.kind == Event::Utterance) {
        const auto len_ms = static_cast<std::uint64_t>(
            std::llround(static_cast<double>(p.signal.size()) * 1000.0 / kSampleRate));
        const auto s = static_cast<std::uint64_t>(p.start_ms);
        clip.reference.push_back({s, s + len_ms});
      }
    }
    std::sort(clip.reference.begin(), clip.reference.end(),
              [](const Interval& a, const Interval& b) { return a.start_ms < b.start_ms; });
    clip.pcm = to_pcm16(mix);
    corpus.push_back(std::move(clip));
  }
  return corpus;
}

}  // namespace facechat::vad
