#include "facechat/transport/media.hpp"

#include <string>

namespace facechat::transport {

bool is_supported_rate(std::uint32_t rate) { return rate == kRate16k || rate == kRate44k; }

std::vector<std::uint8_t> encode_audio_payload(std::span<const std::int16_t> samples,
                                               std::uint32_t sample_rate_hz) {
  std::vector<std::uint8_t> out;
  out.reserve(4 + samples.size() * 2);
  for (int shift = 24; shift >= 0; shift -= 8) {
    out.push_back(static_cast<std::uint8_t>((sample_rate_hz >> shift) & 0xFF));
  }
  for (std::int16_t s : samples) {
    const auto u = static_cast<std::uint16_t>(s);
    out.push_back(static_cast<std::uint8_t>(u & 0xFF));
    out.push_back(static_cast<std::uint8_t>(u >> 8));
  }
  return out;
}

AudioFrame parse_audio_payload(std::span<const std::uint8_t> payload, const Packet& header) {
  if (payload.size() < 6) {
    throw WireException(WireError::EmptyAudioPayload,
                        "audio payload of " + std::to_string(payload.size()) + " bytes");
  }
  if ((payload.size() - 4) % 2 != 0) {
    throw WireException(WireError::OddSampleBytes,
                        std::to_string(payload.size() - 4) + " PCM bytes");
  }
  const std::uint32_t rate = (std::uint32_t{payload[0]} << 24) | (std::uint32_t{payload[1]} << 16) |
                             (std::uint32_t{payload[2]} << 8) | std::uint32_t{payload[3]};
  if (!is_supported_rate(rate)) {
    throw WireException(WireError::UnsupportedRate, std::to_string(rate) + " Hz");
  }
  AudioFrame frame;
  frame.sample_rate_hz = rate;
  frame.timestamp_ms = header.timestamp_ms;
  frame.seq = header.seq;
  frame.session_id = header.session_id;
  const std::size_t count = (payload.size() - 4) / 2;
  frame.samples.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    const auto lo = payload[4 + 2 * i];
    const auto hi = payload[5 + 2 * i];
    frame.samples[i] = static_cast<std::int16_t>(static_cast<std::uint16_t>(lo | (hi << 8)));
  }
  return frame;
}

std::optional<JpegInfo> inspect_jpeg(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || bytes[0] != 0xFF || bytes[1] != 0xD8) return std::nullopt;
  std::optional<JpegInfo> info;
  std::size_t pos = 2;
  while (pos + 4 <= bytes.size()) {
    if (bytes[pos] != 0xFF) return std::nullopt;
    std::uint8_t marker = bytes[pos + 1];
    if (marker == 0xFF) {  // fill byte
      ++pos;
      continue;
    }
    if (marker == 0xD8 || marker == 0x01 || (marker >= 0xD0 && marker <= 0xD7)) {
      pos += 2;
      continue;
    }
    if (marker == 0xD9) return std::nullopt;  // EOI before any scan
    const std::size_t len = (std::size_t{bytes[pos + 2]} << 8) | bytes[pos + 3];
    if (len < 2 || pos + 2 + len > bytes.size()) return std::nullopt;
    const bool is_sof = marker >= 0xC0 && marker <= 0xCF && marker != 0xC4 && marker != 0xC8 &&
                        marker != 0xCC;
    if (is_sof) {
      if (len < 7) return std::nullopt;
      JpegInfo frame_info;
      frame_info.height = (std::uint32_t{bytes[pos + 5]} << 8) | bytes[pos + 6];
      frame_info.width = (std::uint32_t{bytes[pos + 7]} << 8) | bytes[pos + 8];
      if (frame_info.width == 0 || frame_info.height == 0) return std::nullopt;
      info = frame_info;
    }
    if (marker == 0xDA) {
      // Entropy-coded data follows; require an EOI at the very end.
      if (!info) return std::nullopt;
      if (bytes[bytes.size() - 2] != 0xFF || bytes[bytes.size() - 1] != 0xD9) return std::nullopt;
      return info;
    }
    pos += 2 + len;
  }
  return std::nullopt;
}

VideoFrame parse_video_payload(std::span<const std::uint8_t> payload, const Packet& header) {
  if (payload.size() < 2 || payload[0] != 0xFF || payload[1] != 0xD8) {
    throw WireException(WireError::NotJpeg, "payload lacks the JPEG start-of-image marker");
  }
  VideoFrame frame;
  frame.jpeg_bytes.assign(payload.begin(), payload.end());
  frame.timestamp_ms = header.timestamp_ms;
  frame.seq = header.seq;
  frame.session_id = header.session_id;
  if (auto info = inspect_jpeg(payload)) {
    frame.width = info->width;
    frame.height = info->height;
  }
  return frame;
}

nlohmann::json parse_json_payload(std::span<const std::uint8_t> payload) {
  nlohmann::json message = nlohmann::json::parse(payload.begin(), payload.end(), nullptr, false);
  if (message.is_discarded()) {
    throw WireException(WireError::BadControlJson, "payload is not valid UTF-8 JSON");
  }
  if (!message.is_object() || !message.contains("type") || !message["type"].is_string()) {
    throw WireException(WireError::BadControlJson, "expected an object with a string \"type\"");
  }
  return message;
}

std::vector<std::uint8_t> encode_json_payload(const nlohmann::json& message) {
  const std::string text = message.dump();
  return {text.begin(), text.end()};
}

void validate_payload(const Packet& packet) {
  switch (packet.kind) {
    case PacketKind::Audio:
    case PacketKind::ServerAudio:
      parse_audio_payload(packet.payload, packet);
      break;
    case PacketKind::Video:
      parse_video_payload(packet.payload, packet);
      break;
    case PacketKind::Control:
    case PacketKind::ServerEvent:
      parse_json_payload(packet.payload);
      break;
  }
}

}  // namespace facechat::transport
