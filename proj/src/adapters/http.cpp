#include "facechat/adapters/http.hpp"

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <mutex>
#include <thread>

#include <boost/beast/core/detail/base64.hpp>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "facechat/adapters/fake.hpp"

namespace facechat::adapters {

namespace {

struct PendingCall {
  std::mutex mutex;
  std::condition_variable done_cv;
  bool done = false;
  bool transport_failed = false;
  bool timed_out = false;
  std::string error;
  HttpReply reply;
};

nlohmann::json parse_json_reply(const HttpReply& reply) {
  auto j = nlohmann::json::parse(reply.body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw AdapterError(AdapterError::Code::BackendError, "reply is not a JSON object", reply.status,
                       reply.body);
  }
  return j;
}

std::string text_field(const HttpReply& reply) {
  const auto j = parse_json_reply(reply);
  if (!j.contains("text") || !j["text"].is_string()) {
    throw AdapterError(AdapterError::Code::BackendError, "reply lacks a string \"text\"",
                       reply.status, reply.body);
  }
  return j["text"].get<std::string>();
}

class Stopwatch {
 public:
  double elapsed_ms() const { return clock_.now_ms() - start_; }

 private:
  SteadyClock clock_;
  double start_ = clock_.now_ms();
};

}  // namespace

std::string base64_encode(std::string_view bytes) {
  namespace b64 = boost::beast::detail::base64;
  std::string out(b64::encoded_size(bytes.size()), '\0');
  out.resize(b64::encode(out.data(), bytes.data(), bytes.size()));
  return out;
}

HttpPoster::HttpPoster(const AdapterSpec& spec)
    : timeout_ms_(spec.timeout_ms), bearer_token_(spec.bearer_token) {
  spec.validate();
  const std::string& url = spec.endpoint;
  const auto host_start = url.find("://") + 3;
  const auto slash = url.find('/', host_start);
  base_ = url.substr(0, slash);
  path_ = slash == std::string::npos ? "/" : url.substr(slash);
}

HttpReply HttpPoster::post(const std::string& body, const std::string& content_type) const {
  auto client = std::make_shared<httplib::Client>(base_);
  // Socket timeouts trail the deadline so the deadline below always decides Timeout.
  const auto socket_ms = timeout_ms_ + 1000;
  client->set_connection_timeout(socket_ms / 1000, (socket_ms % 1000) * 1000);
  client->set_read_timeout(socket_ms / 1000, (socket_ms % 1000) * 1000);
  client->set_write_timeout(socket_ms / 1000, (socket_ms % 1000) * 1000);
  httplib::Headers headers;
  if (!bearer_token_.empty()) headers.emplace("Authorization", "Bearer " + bearer_token_);

  auto call = std::make_shared<PendingCall>();
  std::thread([client, call, path = path_, headers, body, content_type] {
    auto res = client->Post(path, headers, body, content_type);
    std::lock_guard lock(call->mutex);
    if (res) {
      call->reply.status = res->status;
      call->reply.body = res->body;
      call->reply.content_type = res->get_header_value("Content-Type");
    } else {
      call->transport_failed = true;
      call->timed_out = res.error() == httplib::Error::ConnectionTimeout;
      call->error = httplib::to_string(res.error());
    }
    call->done = true;
    call->done_cv.notify_all();
  }).detach();

  std::unique_lock lock(call->mutex);
  if (!call->done_cv.wait_for(lock, std::chrono::milliseconds(timeout_ms_),
                              [&] { return call->done; })) {
    client->stop();
    throw AdapterError(AdapterError::Code::Timeout,
                       "no reply from " + base_ + path_ + " within " +
                           std::to_string(timeout_ms_) + " ms");
  }
  if (call->transport_failed && call->timed_out) {
    throw AdapterError(AdapterError::Code::Timeout, base_ + path_ + ": " + call->error);
  }
  if (call->transport_failed) {
    throw AdapterError(AdapterError::Code::Unavailable, base_ + path_ + ": " + call->error);
  }
  if (call->reply.status < 200 || call->reply.status >= 300) {
    throw AdapterError(AdapterError::Code::BackendError,
                       "HTTP " + std::to_string(call->reply.status), call->reply.status,
                       call->reply.body);
  }
  return call->reply;
}

AdapterResult<std::string> HttpAsr::transcribe(const vad::UtteranceSegment& segment) {
  if (segment.samples.empty()) throw AdapterError(AdapterError::Code::InvalidInput, "empty segment");
  std::string pcm(segment.samples.size() * 2, '\0');
  for (std::size_t i = 0; i < segment.samples.size(); ++i) {
    const auto v = static_cast<std::uint16_t>(segment.samples[i]);
    pcm[2 * i] = static_cast<char>(v & 0xFF);
    pcm[2 * i + 1] = static_cast<char>(v >> 8);
  }
  const nlohmann::json req{{"pcm16_b64", base64_encode(pcm)}, {"sample_rate", transport::kRate16k}};
  Stopwatch watch;
  const auto reply = poster_.post(req.dump(), "application/json");
  return {text_field(reply), watch.elapsed_ms()};
}

AdapterResult<std::string> HttpChat::complete(const std::string& prompt) {
  if (prompt.find_first_not_of(" \t\r\n") == std::string::npos) {
    throw AdapterError(AdapterError::Code::InvalidInput, "empty prompt");
  }
  Stopwatch watch;
  const auto reply = poster_.post(nlohmann::json{{"prompt", prompt}}.dump(), "application/json");
  return {text_field(reply), watch.elapsed_ms()};
}

AdapterResult<std::vector<transport::AudioFrame>> HttpTts::synthesize(const std::string& text) {
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
    throw AdapterError(AdapterError::Code::InvalidInput, "empty text");
  }
  Stopwatch watch;
  const auto reply = poster_.post(nlohmann::json{{"text", text}}.dump(), "application/json");
  const double latency = watch.elapsed_ms();
  if (reply.body.empty() || reply.body.size() % 2 != 0) {
    throw AdapterError(AdapterError::Code::BackendError, "reply is not PCM16 audio", reply.status,
                       reply.body.substr(0, 256));
  }
  const std::size_t total = reply.body.size() / 2;
  std::vector<transport::AudioFrame> frames;
  for (std::size_t pos = 0; pos < total; pos += kFakeTtsChunkSamples) {
    transport::AudioFrame frame;
    frame.timestamp_ms = pos * 1000 / transport::kRate16k;
    const std::size_t n = std::min(kFakeTtsChunkSamples, total - pos);
    frame.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto lo = static_cast<std::uint8_t>(reply.body[2 * (pos + i)]);
      const auto hi = static_cast<std::uint8_t>(reply.body[2 * (pos + i) + 1]);
      frame.samples[i] = static_cast<std::int16_t>(static_cast<std::uint16_t>(lo | (hi << 8)));
    }
    frames.push_back(std::move(frame));
  }
  return {std::move(frames), latency};
}

AdapterResult<emotion::EmotionLabel> HttpEmotion::classify(const transport::VideoFrame& frame) {
  Stopwatch watch;
  const std::string body(frame.jpeg_bytes.begin(), frame.jpeg_bytes.end());
  const auto reply = poster_.post(body, "image/jpeg");
  const double latency = watch.elapsed_ms();
  const auto j = parse_json_reply(reply);
  if (!j.contains("label") || j["label"].is_null()) {
    throw AdapterError(AdapterError::Code::NoFaceDetected, "backend found no face");
  }
  if (!j["label"].is_string()) {
    throw AdapterError(AdapterError::Code::BackendError, "label is not a string", reply.status,
                       reply.body);
  }
  const auto name = j["label"].get<std::string>();
  const auto label = emotion::parse_emotion(name);
  if (!label) {
    throw AdapterError(AdapterError::Code::BackendError, "label '" + name + "' outside the four classes",
                       reply.status, reply.body);
  }
  double confidence = 1.0;
  if (j.contains("confidence")) {
    if (!j["confidence"].is_number()) {
      throw AdapterError(AdapterError::Code::BackendError, "confidence is not a number",
                         reply.status, reply.body);
    }
    confidence = std::clamp(j["confidence"].get<double>(), 0.0, 1.0);
  }
  return {{*label, confidence, frame.timestamp_ms}, latency};
}

}  // namespace facechat::adapters
