#pragma once

#include <map>
#include <memory>
#include <string>

#include "facechat/adapters/adapter.hpp"
#include "facechat/adapters/clock.hpp"

namespace facechat::adapters {

struct HttpReply {
  int status = 0;
  std::string body;
  std::string content_type;
};

// POSTs to spec.endpoint. The request runs on a detached worker; after timeout_ms
// the connection is stopped and Timeout is thrown, so callers never wait longer.
// Connection failures raise Unavailable, non-2xx replies BackendError.
class HttpPoster {
 public:
  explicit HttpPoster(const AdapterSpec& spec);
  HttpReply post(const std::string& body, const std::string& content_type) const;

 private:
  std::string base_;  // scheme://host[:port]
  std::string path_;
  int timeout_ms_;
  std::string bearer_token_;
};

std::string base64_encode(std::string_view bytes);

// {"pcm16_b64": ..., "sample_rate": 16000} -> {"text": ...}
class HttpAsr final : public AsrAdapter {
 public:
  explicit HttpAsr(AdapterSpec spec) : poster_(spec) {}
  AdapterResult<std::string> transcribe(const vad::UtteranceSegment& segment) override;

 private:
  HttpPoster poster_;
};

// {"prompt": ...} -> {"text": ...}
class HttpChat final : public ChatAdapter {
 public:
  explicit HttpChat(AdapterSpec spec) : poster_(spec) {}
  AdapterResult<std::string> complete(const std::string& prompt) override;

 private:
  HttpPoster poster_;
};

// {"text": ...} -> PCM16LE bytes at 16 kHz
class HttpTts final : public TtsAdapter {
 public:
  explicit HttpTts(AdapterSpec spec) : poster_(spec) {}
  AdapterResult<std::vector<transport::AudioFrame>> synthesize(const std::string& text) override;

 private:
  HttpPoster poster_;
};

// JPEG body -> {"label": ..., "confidence": ...}; a null label means no face.
class HttpEmotion final : public EmotionAdapter {
 public:
  explicit HttpEmotion(AdapterSpec spec) : poster_(spec) {}
  AdapterResult<emotion::EmotionLabel> classify(const transport::VideoFrame& frame) override;

 private:
  HttpPoster poster_;
};

}  // namespace facechat::adapters
