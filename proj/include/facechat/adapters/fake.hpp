#pragma once

#include <memory>
#include <mutex>
#include <random>
#include <string>

#include "facechat/adapters/adapter.hpp"
#include "facechat/adapters/clock.hpp"

namespace facechat::adapters {

// Seeded delay source. Draws come in antithetic pairs (mean + j*u, mean - j*u),
// so every even-length run averages exactly to the mean.
class DelayModel {
 public:
  DelayModel(DelaySpec spec, std::uint64_t seed) : spec_(spec), engine_(seed) {}
  double next_ms();

 private:
  DelaySpec spec_;
  std::mutex mutex_;
  std::mt19937_64 engine_;
  bool has_mirror_ = false;
  double mirror_ = 0.0;
};

// Word after the last "the user looks " in the prompt, or empty.
std::string extract_emotion_token(const std::string& prompt);

inline constexpr double kFakeTtsToneHz = 220.0;
inline constexpr std::size_t kFakeTtsChunkSamples = 2048;
// 60 ms per whitespace-separated word, never below 300 ms.
std::uint64_t fake_tts_duration_ms(const std::string& text);

class FakeAsr final : public AsrAdapter {
 public:
  FakeAsr(AdapterSpec spec, std::shared_ptr<Clock> clock);
  AdapterResult<std::string> transcribe(const vad::UtteranceSegment& segment) override;

 private:
  AdapterSpec spec_;
  std::shared_ptr<Clock> clock_;
  DelayModel delay_;
  std::mutex mutex_;
  std::size_t next_line_ = 0;
};

class FakeChat final : public ChatAdapter {
 public:
  FakeChat(AdapterSpec spec, std::shared_ptr<Clock> clock);
  AdapterResult<std::string> complete(const std::string& prompt) override;

 private:
  AdapterSpec spec_;
  std::shared_ptr<Clock> clock_;
  DelayModel delay_;
  std::mutex mutex_;
  std::size_t next_line_ = 0;
};

class FakeTts final : public TtsAdapter {
 public:
  FakeTts(AdapterSpec spec, std::shared_ptr<Clock> clock);
  AdapterResult<std::vector<transport::AudioFrame>> synthesize(const std::string& text) override;

 private:
  AdapterSpec spec_;
  std::shared_ptr<Clock> clock_;
  DelayModel delay_;
};

class FakeEmotion final : public EmotionAdapter {
 public:
  FakeEmotion(AdapterSpec spec, std::shared_ptr<Clock> clock);
  AdapterResult<emotion::EmotionLabel> classify(const transport::VideoFrame& frame) override;

 private:
  AdapterSpec spec_;
  std::shared_ptr<Clock> clock_;
  DelayModel delay_;
};

}  // namespace facechat::adapters
