#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

#include "facechat/transport/media.hpp"

namespace facechat::transport {

class WavError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// RIFF/WAVE, PCM 16-bit only; multi-channel input is averaged to mono.
AudioFrame parse_wav(std::span<const std::uint8_t> bytes);
AudioFrame read_wav(const std::filesystem::path& path);
std::vector<std::uint8_t> encode_wav(const AudioFrame& frame);

}  // namespace facechat::transport
