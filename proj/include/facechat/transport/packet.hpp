#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace facechat::transport {

// Wire layout (all header integers big-endian):
//   magic "FC" | version u8 | kind u8 | session_id[16] | seq u32 | timestamp_ms u64 | payload_len u32 | payload
inline constexpr std::array<std::uint8_t, 2> kMagic{0x46, 0x43};
inline constexpr std::uint8_t kProtocolVersion = 1;
inline constexpr std::size_t kHeaderSize = 36;
inline constexpr std::size_t kMaxPayload = 16u * 1024u * 1024u;

enum class PacketKind : std::uint8_t {
  Audio = 0,
  Video = 1,
  Control = 2,
  ServerAudio = 3,
  ServerEvent = 4,
};

std::string_view to_string(PacketKind kind);
std::optional<PacketKind> packet_kind_from_byte(std::uint8_t value);

using SessionId = std::array<std::uint8_t, 16>;

std::string session_id_hex(const SessionId& id);
std::optional<SessionId> session_id_from_hex(std::string_view hex);

enum class WireError {
  BadMagic,
  UnsupportedVersion,
  TruncatedPayload,
  UnknownKind,
  PayloadTooLarge,
  LengthMismatch,
  EmptyAudioPayload,
  OddSampleBytes,
  UnsupportedRate,
  NotJpeg,
  BadControlJson,
  UnexpectedKind,
};

std::string_view to_string(WireError error);
std::optional<WireError> wire_error_from_string(std::string_view name);

class WireException : public std::runtime_error {
 public:
  WireException(WireError code, const std::string& detail);
  WireError code() const noexcept { return code_; }

 private:
  WireError code_;
};

struct Packet {
  PacketKind kind = PacketKind::Control;
  SessionId session_id{};
  std::uint32_t seq = 0;
  std::uint64_t timestamp_ms = 0;
  std::vector<std::uint8_t> payload;

  friend bool operator==(const Packet&, const Packet&) = default;
};

// Throws WireException(PayloadTooLarge) for payloads above kMaxPayload.
std::vector<std::uint8_t> encode_packet(const Packet& packet);

// The input must hold exactly one packet; a payload_len that disagrees with the
// remaining byte count is rejected.
Packet decode_packet(std::span<const std::uint8_t> bytes);

}  // namespace facechat::transport
