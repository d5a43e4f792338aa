#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "facechat/emotion/label.hpp"
#include "facechat/transport/media.hpp"
#include "facechat/vad/endpointer.hpp"

namespace facechat::adapters {

enum class AdapterKind { Asr, Chat, Tts, Emotion };
enum class AdapterImpl { Fake, Http };

std::string_view to_string(AdapterKind kind);
std::string_view to_string(AdapterImpl impl);

class AdapterError : public std::runtime_error {
 public:
  enum class Code { Timeout, BackendError, InvalidInput, NoFaceDetected, Unavailable, InvalidSpec };
  AdapterError(Code code, const std::string& detail, int status = 0, std::string body = {});
  Code code() const noexcept { return code_; }
  int status() const noexcept { return status_; }
  const std::string& body() const noexcept { return body_; }

 private:
  Code code_;
  int status_;
  std::string body_;
};

std::string_view to_string(AdapterError::Code code);

struct DelaySpec {
  double mean_ms = 0.0;
  double jitter_ms = 0.0;  // uniform +/- jitter around the mean
};

// A label valid from from_ms until the next entry; no label means no face.
struct TimelineEntry {
  std::uint64_t from_ms = 0;
  std::optional<emotion::Emotion> label;
  double confidence = 1.0;
};

struct AdapterSpec {
  AdapterKind kind = AdapterKind::Asr;
  AdapterImpl impl = AdapterImpl::Fake;
  DelaySpec delay;
  std::vector<std::string> script;
  bool echo_emotion = false;           // chat fake only
  std::vector<TimelineEntry> timeline;  // emotion fake only
  std::uint64_t seed = 1;              // jitter RNG
  std::string endpoint;                // http only
  int timeout_ms = 10000;
  std::string bearer_token;

  // Throws AdapterError(InvalidSpec).
  void validate() const;

  static AdapterSpec fake(AdapterKind kind, double mean_ms = 0.0, double jitter_ms = 0.0);
  static AdapterSpec from_json(AdapterKind kind, const nlohmann::json& j);
  nlohmann::json to_json() const;
};

template <typename T>
struct AdapterResult {
  T value;
  double backend_latency_ms = 0.0;
};

class AsrAdapter {
 public:
  virtual ~AsrAdapter() = default;
  virtual AdapterResult<std::string> transcribe(const vad::UtteranceSegment& segment) = 0;
};

class ChatAdapter {
 public:
  virtual ~ChatAdapter() = default;
  virtual AdapterResult<std::string> complete(const std::string& prompt) = 0;
};

class TtsAdapter {
 public:
  virtual ~TtsAdapter() = default;
  // 16 kHz frames in playback order.
  virtual AdapterResult<std::vector<transport::AudioFrame>> synthesize(const std::string& text) = 0;
};

class EmotionAdapter {
 public:
  virtual ~EmotionAdapter() = default;
  // Throws AdapterError(NoFaceDetected) when the frame holds no face.
  virtual AdapterResult<emotion::EmotionLabel> classify(const transport::VideoFrame& frame) = 0;
};

}  // namespace facechat::adapters
