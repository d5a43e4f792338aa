#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "facechat/transport/packet.hpp"

namespace facechat::transport {

inline constexpr std::uint32_t kRate16k = 16000;
inline constexpr std::uint32_t kRate44k = 44100;

// Mono PCM16 block. On the wire: sample_rate_hz (u32 BE) followed by PCM16LE samples.
struct AudioFrame {
  std::vector<std::int16_t> samples;
  std::uint32_t sample_rate_hz = kRate16k;
  std::uint64_t timestamp_ms = 0;
  std::uint32_t seq = 0;
  SessionId session_id{};

  double duration_ms() const {
    return static_cast<double>(samples.size()) * 1000.0 / sample_rate_hz;
  }
};

struct VideoFrame {
  std::vector<std::uint8_t> jpeg_bytes;
  std::uint32_t width = 400;
  std::uint32_t height = 300;
  std::uint64_t timestamp_ms = 0;
  std::uint32_t seq = 0;
  SessionId session_id{};
};

bool is_supported_rate(std::uint32_t rate);

std::vector<std::uint8_t> encode_audio_payload(std::span<const std::int16_t> samples,
                                               std::uint32_t sample_rate_hz);

// Errors: EmptyAudioPayload, OddSampleBytes, UnsupportedRate.
AudioFrame parse_audio_payload(std::span<const std::uint8_t> payload, const Packet& header);

struct JpegInfo {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
};

// Walks the marker segments from SOI up to the first scan. Returns nullopt when
// the structure is broken or the image never reaches a frame header and scan.
std::optional<JpegInfo> inspect_jpeg(std::span<const std::uint8_t> bytes);

// Requires the SOI marker; dimensions come from the frame header when present,
// nominal 400x300 otherwise. Error: NotJpeg.
VideoFrame parse_video_payload(std::span<const std::uint8_t> payload, const Packet& header);

// UTF-8 JSON object with a string "type" member. Error: BadControlJson.
nlohmann::json parse_json_payload(std::span<const std::uint8_t> payload);
std::vector<std::uint8_t> encode_json_payload(const nlohmann::json& message);

// Payload validation for every kind, used by the conformance vectors and the
// server's inbound path.
void validate_payload(const Packet& packet);

}  // namespace facechat::transport
