#include "facechat/transport/wav.hpp"

#include <fstream>
#include <iterator>
#include <string_view>

namespace facechat::transport {
namespace {

std::uint32_t le32(std::span<const std::uint8_t> b, std::size_t at) {
  return b[at] | (b[at + 1] << 8) | (b[at + 2] << 16) | (static_cast<std::uint32_t>(b[at + 3]) << 24);
}
std::uint16_t le16(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}
bool tag_is(std::span<const std::uint8_t> b, std::size_t at, std::string_view tag) {
  return std::string_view(reinterpret_cast<const char*>(b.data() + at), 4) == tag;
}
void put32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
void put16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

}  // namespace

AudioFrame parse_wav(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12 || !tag_is(bytes, 0, "RIFF") || !tag_is(bytes, 8, "WAVE")) {
    throw WavError("not a RIFF/WAVE file");
  }
  std::uint16_t channels = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  std::size_t at = 12;
  while (at + 8 <= bytes.size()) {
    const std::uint32_t size = le32(bytes, at + 4);
    const std::size_t body = at + 8;
    if (size > bytes.size() - body) throw WavError("truncated chunk");
    if (tag_is(bytes, at, "fmt ")) {
      if (size < 16) throw WavError("short fmt chunk");
      const std::uint16_t format = le16(bytes, body);
      channels = le16(bytes, body + 2);
      rate = le32(bytes, body + 4);
      const std::uint16_t bits = le16(bytes, body + 14);
      if (format != 1 || bits != 16) throw WavError("only 16-bit PCM is supported");
      if (channels == 0) throw WavError("zero channels");
      have_fmt = true;
    } else if (tag_is(bytes, at, "data")) {
      if (!have_fmt) throw WavError("data chunk before fmt chunk");
      AudioFrame frame;
      frame.sample_rate_hz = rate;
      const std::size_t frames = size / (2u * channels);
      frame.samples.reserve(frames);
      for (std::size_t i = 0; i < frames; ++i) {
        std::int32_t sum = 0;
        for (std::uint16_t c = 0; c < channels; ++c) {
          sum += static_cast<std::int16_t>(le16(bytes, body + 2 * (i * channels + c)));
        }
        frame.samples.push_back(static_cast<std::int16_t>(sum / channels));
      }
      return frame;
    }
    at = body + size + (size & 1u);
  }
  throw WavError("no data chunk");
}

AudioFrame read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw WavError("cannot open " + path.string());
  const std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in), {}};
  return parse_wav(bytes);
}

std::vector<std::uint8_t> encode_wav(const AudioFrame& frame) {
  const auto data_bytes = static_cast<std::uint32_t>(frame.samples.size() * 2);
  std::vector<std::uint8_t> out{'R', 'I', 'F', 'F'};
  put32(out, 36 + data_bytes);
  for (char c : std::string_view("WAVEfmt ")) out.push_back(static_cast<std::uint8_t>(c));
  put32(out, 16);
  put16(out, 1);
  put16(out, 1);
  put32(out, frame.sample_rate_hz);
  put32(out, frame.sample_rate_hz * 2);
  put16(out, 2);
  put16(out, 16);
  for (char c : std::string_view("data")) out.push_back(static_cast<std::uint8_t>(c));
  put32(out, data_bytes);
  for (auto s : frame.samples) put16(out, static_cast<std::uint16_t>(s));
  return out;
}

}  // namespace facechat::transport
