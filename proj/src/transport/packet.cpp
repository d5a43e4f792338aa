#include "facechat/transport/packet.hpp"

#include <algorithm>
#include <array>

namespace facechat::transport {

namespace {

constexpr std::array<std::pair<WireError, std::string_view>, 12> kErrorNames{{
    {WireError::BadMagic, "BadMagic"},
    {WireError::UnsupportedVersion, "UnsupportedVersion"},
    {WireError::TruncatedPayload, "TruncatedPayload"},
    {WireError::UnknownKind, "UnknownKind"},
    {WireError::PayloadTooLarge, "PayloadTooLarge"},
    {WireError::LengthMismatch, "LengthMismatch"},
    {WireError::EmptyAudioPayload, "EmptyAudioPayload"},
    {WireError::OddSampleBytes, "OddSampleBytes"},
    {WireError::UnsupportedRate, "UnsupportedRate"},
    {WireError::NotJpeg, "NotJpeg"},
    {WireError::BadControlJson, "BadControlJson"},
    {WireError::UnexpectedKind, "UnexpectedKind"},
}};

void put_be(std::vector<std::uint8_t>& out, std::uint64_t value, int bytes) {
  for (int i = bytes - 1; i >= 0; --i) {
    out.push_back(static_cast<std::uint8_t>((value >> (8 * i)) & 0xFF));
  }
}

std::uint64_t get_be(std::span<const std::uint8_t> in, std::size_t offset, int bytes) {
  std::uint64_t value = 0;
  for (int i = 0; i < bytes; ++i) {
    value = (value << 8) | in[offset + static_cast<std::size_t>(i)];
  }
  return value;
}

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

std::string_view to_string(PacketKind kind) {
  switch (kind) {
    case PacketKind::Audio: return "audio";
    case PacketKind::Video: return "video";
    case PacketKind::Control: return "control";
    case PacketKind::ServerAudio: return "server-audio";
    case PacketKind::ServerEvent: return "server-event";
  }
  return "unknown";
}

std::optional<PacketKind> packet_kind_from_byte(std::uint8_t value) {
  if (value > static_cast<std::uint8_t>(PacketKind::ServerEvent)) return std::nullopt;
  return static_cast<PacketKind>(value);
}

std::string session_id_hex(const SessionId& id) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(32);
  for (auto b : id) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0x0F]);
  }
  return out;
}

std::optional<SessionId> session_id_from_hex(std::string_view hex) {
  if (hex.size() != 32) return std::nullopt;
  SessionId id{};
  for (std::size_t i = 0; i < 16; ++i) {
    int hi = hex_value(hex[2 * i]);
    int lo = hex_value(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) return std::nullopt;
    id[i] = static_cast<std::uint8_t>(hi * 16 + lo);
  }
  return id;
}

std::string_view to_string(WireError error) {
  for (const auto& [code, name] : kErrorNames) {
    if (code == error) return name;
  }
  return "Unknown";
}

std::optional<WireError> wire_error_from_string(std::string_view name) {
  for (const auto& [code, n] : kErrorNames) {
    if (n == name) return code;
  }
  return std::nullopt;
}

WireException::WireException(WireError code, const std::string& detail)
    : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

std::vector<std::uint8_t> encode_packet(const Packet& packet) {
  if (packet.payload.size() > kMaxPayload) {
    throw WireException(WireError::PayloadTooLarge,
                        "payload of " + std::to_string(packet.payload.size()) + " bytes");
  }
  std::vector<std::uint8_t> out;
  out.reserve(kHeaderSize + packet.payload.size());
  out.insert(out.end(), kMagic.begin(), kMagic.end());
  out.push_back(kProtocolVersion);
  out.push_back(static_cast<std::uint8_t>(packet.kind));
  out.insert(out.end(), packet.session_id.begin(), packet.session_id.end());
  put_be(out, packet.seq, 4);
  put_be(out, packet.timestamp_ms, 8);
  put_be(out, packet.payload.size(), 4);
  out.insert(out.end(), packet.payload.begin(), packet.payload.end());
  return out;
}

Packet decode_packet(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kHeaderSize) {
    throw WireException(WireError::TruncatedPayload,
                        "got " + std::to_string(bytes.size()) + " bytes, header needs " +
                            std::to_string(kHeaderSize));
  }
  if (bytes[0] != kMagic[0] || bytes[1] != kMagic[1]) {
    throw WireException(WireError::BadMagic, "first two bytes are not \"FC\"");
  }
  if (bytes[2] != kProtocolVersion) {
    throw WireException(WireError::UnsupportedVersion, "version " + std::to_string(bytes[2]));
  }
  auto kind = packet_kind_from_byte(bytes[3]);
  if (!kind) {
    throw WireException(WireError::UnknownKind, "kind " + std::to_string(bytes[3]));
  }

  Packet packet;
  packet.kind = *kind;
  std::copy_n(bytes.begin() + 4, 16, packet.session_id.begin());
  packet.seq = static_cast<std::uint32_t>(get_be(bytes, 20, 4));
  packet.timestamp_ms = get_be(bytes, 24, 8);
  const auto payload_len = static_cast<std::size_t>(get_be(bytes, 32, 4));

  if (payload_len > kMaxPayload) {
    throw WireException(WireError::PayloadTooLarge,
                        "payload_len " + std::to_string(payload_len));
  }
  const std::size_t remaining = bytes.size() - kHeaderSize;
  if (remaining < payload_len) {
    throw WireException(WireError::TruncatedPayload,
                        "payload_len " + std::to_string(payload_len) + " but " +
                            std::to_string(remaining) + " bytes follow");
  }
  if (remaining > payload_len) {
    throw WireException(WireError::LengthMismatch,
                        std::to_string(remaining - payload_len) + " trailing bytes");
  }
  packet.payload.assign(bytes.begin() + kHeaderSize, bytes.end());
  return packet;
}

}  // namespace facechat::transport
