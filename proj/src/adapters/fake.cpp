#include "facechat/adapters/fake.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <sstream>

namespace facechat::adapters {

namespace {

bool is_blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

// Sleeps the drawn delay and reports the time actually spent.
double timed_sleep(Clock& clock, DelayModel& delay) {
  const double start = clock.now_ms();
  clock.sleep_ms(delay.next_ms());
  return std::max(0.0, clock.now_ms() - start);
}

}  // namespace

double DelayModel::next_ms() {
  std::lock_guard lock(mutex_);
  if (spec_.jitter_ms <= 0.0) return spec_.mean_ms;
  if (has_mirror_) {
    has_mirror_ = false;
    return mirror_;
  }
  const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53 * 2.0 - 1.0;
  mirror_ = spec_.mean_ms - spec_.jitter_ms * u;
  has_mirror_ = true;
  return spec_.mean_ms + spec_.jitter_ms * u;
}

std::string extract_emotion_token(const std::string& prompt) {
  static constexpr std::string_view kMarker = "the user looks ";
  const auto pos = prompt.rfind(kMarker);
  if (pos == std::string::npos) return {};
  std::string word;
  for (std::size_t i = pos + kMarker.size(); i < prompt.size(); ++i) {
    const auto c = static_cast<unsigned char>(prompt[i]);
    if (!std::isalpha(c)) break;
    word.push_back(static_cast<char>(std::tolower(c)));
  }
  return word;
}

std::uint64_t fake_tts_duration_ms(const std::string& text) {
  std::istringstream in(text);
  std::uint64_t words = 0;
  for (std::string w; in >> w;) ++words;
  return std::max<std::uint64_t>(300, 60 * words);
}

FakeAsr::FakeAsr(AdapterSpec spec, std::shared_ptr<Clock> clock)
    : spec_(std::move(spec)), clock_(std::move(clock)), delay_(spec_.delay, spec_.seed) {
  spec_.validate();
}

AdapterResult<std::string> FakeAsr::transcribe(const vad::UtteranceSegment& segment) {
  if (segment.samples.empty()) {
    throw AdapterError(AdapterError::Code::InvalidInput, "empty segment");
  }
  std::string text;
  if (spec_.script.empty()) {
    text = "utterance of " + std::to_string(segment.duration_ms()) + " ms";
  } else {
    std::lock_guard lock(mutex_);
    text = spec_.script[next_line_++ % spec_.script.size()];
  }
  const double latency = timed_sleep(*clock_, delay_);
  return {std::move(text), latency};
}

FakeChat::FakeChat(AdapterSpec spec, std::shared_ptr<Clock> clock)
    : spec_(std::move(spec)), clock_(std::move(clock)), delay_(spec_.delay, spec_.seed) {
  spec_.validate();
}

AdapterResult<std::string> FakeChat::complete(const std::string& prompt) {
  if (is_blank(prompt)) throw AdapterError(AdapterError::Code::InvalidInput, "empty prompt");
  std::string reply = "I see.";
  if (!spec_.script.empty()) {
    std::lock_guard lock(mutex_);
    reply = spec_.script[next_line_++ % spec_.script.size()];
  }
  if (spec_.echo_emotion) {
    const auto token = extract_emotion_token(prompt);
    if (!token.empty()) reply = "[" + token + "] " + reply;
  }
  const double latency = timed_sleep(*clock_, delay_);
  return {std::move(reply), latency};
}

FakeTts::FakeTts(AdapterSpec spec, std::shared_ptr<Clock> clock)
    : spec_(std::move(spec)), clock_(std::move(clock)), delay_(spec_.delay, spec_.seed) {
  spec_.validate();
}

AdapterResult<std::vector<transport::AudioFrame>> FakeTts::synthesize(const std::string& text) {
  if (is_blank(text)) throw AdapterError(AdapterError::Code::InvalidInput, "empty text");
  const std::uint64_t duration_ms = fake_tts_duration_ms(text);
  const std::size_t total = duration_ms * transport::kRate16k / 1000;
  std::vector<transport::AudioFrame> frames;
  for (std::size_t pos = 0; pos < total; pos += kFakeTtsChunkSamples) {
    transport::AudioFrame frame;
    frame.sample_rate_hz = transport::kRate16k;
    frame.timestamp_ms = pos * 1000 / transport::kRate16k;
    const std::size_t n = std::min(kFakeTtsChunkSamples, total - pos);
    frame.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double t = static_cast<double>(pos + i) / transport::kRate16k;
      frame.samples[i] = static_cast<std::int16_t>(
          std::lround(0.3 * 32767.0 * std::sin(2.0 * std::numbers::pi * kFakeTtsToneHz * t)));
    }
    frames.push_back(std::move(frame));
  }
  const double latency = timed_sleep(*clock_, delay_);
  return {std::move(frames), latency};
}

FakeEmotion::FakeEmotion(AdapterSpec spec, std::shared_ptr<Clock> clock)
    : spec_(std::move(spec)), clock_(std::move(clock)), delay_(spec_.delay, spec_.seed) {
  spec_.validate();
}

AdapterResult<emotion::EmotionLabel> FakeEmotion::classify(const transport::VideoFrame& frame) {
  const double latency = timed_sleep(*clock_, delay_);
  emotion::EmotionLabel label{emotion::Emotion::Neutral, 1.0, frame.timestamp_ms};
  if (!spec_.timeline.empty()) {
    // Last entry whose from_ms is not after the frame.
    auto it = std::upper_bound(spec_.timeline.begin(), spec_.timeline.end(), frame.timestamp_ms,
                               [](std::uint64_t t, const TimelineEntry& e) { return t < e.from_ms; });
    if (it == spec_.timeline.begin() || !std::prev(it)->label) {
      throw AdapterError(AdapterError::Code::NoFaceDetected,
                         "no face at " + std::to_string(frame.timestamp_ms) + " ms");
    }
    --it;
    label.label = *it->label;
    label.confidence = it->confidence;
  }
  return {label, latency};
}

}  // namespace facechat::adapters
