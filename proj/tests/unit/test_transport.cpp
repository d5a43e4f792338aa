#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>
#include <thread>

#include <nlohmann/json.hpp>

#include "facechat/transport/media.hpp"
#include "facechat/transport/packet.hpp"
#include "facechat/transport/resampler.hpp"
#include "facechat/transport/session_buffers.hpp"
#include "facechat/transport/wav.hpp"
#include "signal_oracles.hpp"
#include "test_media.hpp"

using namespace facechat::transport;
using facechat::testing::make_jpeg;

namespace {

std::vector<std::uint8_t> from_hex(const std::string& hex) {
  std::vector<std::uint8_t> out;
  for (std::size_t i = 0; i + 1 < hex.size(); i += 2) {
    out.push_back(static_cast<std::uint8_t>(std::stoi(hex.substr(i, 2), nullptr, 16)));
  }
  return out;
}

nlohmann::json load_vectors() {
  std::ifstream in(FACECHAT_TESTDATA_DIR "/wire_vectors.json");
  REQUIRE(in.good());
  return nlohmann::json::parse(in);
}

Packet sample_packet(PacketKind kind, std::vector<std::uint8_t> payload) {
  Packet p;
  p.kind = kind;
  p.session_id.fill(0xAB);
  p.seq = 7;
  p.timestamp_ms = 123456789;
  p.payload = std::move(payload);
  return p;
}

}  // namespace

TEST_SUITE("packet") {
  TEST_CASE("header is 36 bytes with big-endian fields at fixed offsets") {
    Packet p = sample_packet(PacketKind::Control, {'{', '}'});
    p.seq = 0x01020304;
    p.timestamp_ms = 0x0102030405060708ULL;
    const auto bytes = encode_packet(p);
    REQUIRE(bytes.size() == kHeaderSize + 2);
    CHECK(bytes[0] == 'F');
    CHECK(bytes[1] == 'C');
    CHECK(bytes[2] == 1);
    CHECK(bytes[3] == 2);
    CHECK(bytes[4] == 0xAB);
    CHECK(bytes[20] == 0x01);
    CHECK(bytes[23] == 0x04);
    CHECK(bytes[24] == 0x01);
    CHECK(bytes[31] == 0x08);
    CHECK(bytes[35] == 2);
  }

  TEST_CASE("random packets round-trip") {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 300; ++i) {
      Packet p;
      p.kind = static_cast<PacketKind>(rng() % 5);
      for (auto& b : p.session_id) b = static_cast<std::uint8_t>(rng());
      p.seq = static_cast<std::uint32_t>(rng());
      p.timestamp_ms = rng();
      p.payload.resize(rng() % 300);
      for (auto& b : p.payload) b = static_cast<std::uint8_t>(rng());
      const auto bytes = encode_packet(p);
      CHECK(decode_packet(bytes) == p);
      CHECK(encode_packet(decode_packet(bytes)) == bytes);
    }
  }

  TEST_CASE("shipped vectors: valid round-trip bit-exact, invalid raise the named error") {
    const auto doc = load_vectors();
    CHECK(doc["header_size"] == kHeaderSize);
    REQUIRE(doc["valid"].size() >= 50);
    REQUIRE(doc["invalid"].size() >= 20);
    for (const auto& v : doc["valid"]) {
      INFO(v["name"].get<std::string>());
      const auto bytes = from_hex(v["hex"]);
      const Packet p = decode_packet(bytes);
      CHECK(to_string(p.kind) == v["kind"].get<std::string>());
      CHECK(session_id_hex(p.session_id) == v["session_id"].get<std::string>());
      CHECK(p.seq == v["seq"].get<std::uint32_t>());
      CHECK(p.timestamp_ms == v["timestamp_ms"].get<std::uint64_t>());
      CHECK(p.payload == from_hex(v["payload_hex"]));
      CHECK_NOTHROW(validate_payload(p));
      CHECK(encode_packet(p) == bytes);
    }
    for (const auto& v : doc["invalid"]) {
      const std::string name = v["name"];
      INFO(name);
      const auto expected = wire_error_from_string(v["error"].get<std::string>());
      REQUIRE(expected.has_value());
      try {
        validate_payload(decode_packet(from_hex(v["hex"])));
        FAIL("accepted invalid vector " << name);
      } catch (const WireException& e) {
        CHECK(to_string(e.code()) == to_string(*expected));
      }
    }
  }

  TEST_CASE("oversized payload is refused on encode") {
    Packet p = sample_packet(PacketKind::Video, std::vector<std::uint8_t>(kMaxPayload + 1));
    CHECK_THROWS_AS(encode_packet(p), WireException);
  }

  TEST_CASE("session id hex round-trip and rejection") {
    SessionId id{};
    for (std::size_t i = 0; i < id.size(); ++i) id[i] = static_cast<std::uint8_t>(i * 17);
    const auto hex = session_id_hex(id);
    CHECK(hex.size() == 32);
    CHECK(session_id_from_hex(hex) == id);
    CHECK_FALSE(session_id_from_hex("abc").has_value());
    CHECK_FALSE(session_id_from_hex(std::string(32, 'g')).has_value());
  }

  TEST_CASE("error names round-trip") {
    for (auto e : {WireError::BadMagic, WireError::UnsupportedVersion, WireError::TruncatedPayload,
                   WireError::UnknownKind, WireError::PayloadTooLarge, WireError::LengthMismatch,
                   WireError::EmptyAudioPayload, WireError::OddSampleBytes, WireError::UnsupportedRate,
                   WireError::NotJpeg, WireError::BadControlJson, WireError::UnexpectedKind}) {
      CHECK(wire_error_from_string(to_string(e)) == e);
    }
    CHECK_FALSE(wire_error_from_string("Nope").has_value());
  }
}

TEST_SUITE("media") {
  TEST_CASE("audio payload: rate prefix is big-endian, samples little-endian") {
    const std::vector<std::int16_t> s{1, -2, 0x1234};
    const auto bytes = encode_audio_payload(s, kRate44k);
    REQUIRE(bytes.size() == 4 + 6);
    CHECK(bytes[0] == 0x00);
    CHECK(bytes[1] == 0x00);
    CHECK(bytes[2] == 0xAC);
    CHECK(bytes[3] == 0x44);
    CHECK(bytes[4] == 0x01);
    CHECK(bytes[5] == 0x00);
    CHECK(bytes[8] == 0x34);
    CHECK(bytes[9] == 0x12);
    const auto frame = parse_audio_payload(bytes, sample_packet(PacketKind::Audio, bytes));
    CHECK(frame.samples == s);
    CHECK(frame.sample_rate_hz == kRate44k);
    CHECK(frame.timestamp_ms == 123456789);
    CHECK(frame.seq == 7);
  }

  TEST_CASE("jpeg dimensions come from the frame header") {
    const auto jpeg = make_jpeg(640, 480);
    const auto info = inspect_jpeg(jpeg);
    REQUIRE(info.has_value());
    CHECK(info->width == 640);
    CHECK(info->height == 480);
    const auto frame = parse_video_payload(jpeg, sample_packet(PacketKind::Video, jpeg));
    CHECK(frame.width == 640);
    CHECK(frame.height == 480);
  }

  TEST_CASE("structurally broken jpeg keeps nominal size; missing SOI is NotJpeg") {
    std::vector<std::uint8_t> truncated{0xFF, 0xD8, 0xFF, 0xC0, 0x00};
    CHECK_FALSE(inspect_jpeg(truncated).has_value());
    const auto frame = parse_video_payload(truncated, sample_packet(PacketKind::Video, truncated));
    CHECK(frame.width == 400);
    CHECK(frame.height == 300);
    std::vector<std::uint8_t> png{0x89, 'P', 'N', 'G'};
    CHECK_THROWS_AS(parse_video_payload(png, sample_packet(PacketKind::Video, png)), WireException);
  }

  TEST_CASE("control json needs a string type") {
    CHECK(parse_json_payload(encode_json_payload({{"type", "x"}}))["type"] == "x");
    const std::string bad = R"({"type": 1})";
    CHECK_THROWS_AS(parse_json_payload({reinterpret_cast<const std::uint8_t*>(bad.data()), bad.size()}),
                    WireException);
  }

  TEST_CASE("wav round-trip and stereo downmix") {
    AudioFrame f;
    f.sample_rate_hz = kRate44k;
    f.samples = {0, 100, -100, 32767, -32768};
    const auto back = parse_wav(encode_wav(f));
    CHECK(back.sample_rate_hz == kRate44k);
    CHECK(back.samples == f.samples);

    auto bytes = encode_wav(f);
    bytes[22] = 2;  // channels
    const auto mono = parse_wav(bytes);
    REQUIRE(mono.samples.size() == 2);
    CHECK(mono.samples[0] == 50);
    CHECK(mono.samples[1] == (32767 - 100) / 2);
    CHECK_THROWS_AS(parse_wav(std::vector<std::uint8_t>{'R', 'I', 'F', 'F'}), WavError);
  }
}

TEST_SUITE("resampler") {
  using facechat::testing::peak_frequency;
  using facechat::testing::sine_pcm;

  TEST_CASE("2048 samples at 44.1 kHz become exactly 743 at 16 kHz") {
    AudioFrame in;
    in.sample_rate_hz = kRate44k;
    in.samples = sine_pcm(2048, 440.0, 44100.0, 0.5);
    const auto out = resample_to_16k(in);
    CHECK(out.sample_rate_hz == kRate16k);
    CHECK(out.samples.size() == 743);
    // Duration within two output-sample periods.
    CHECK(std::abs(out.duration_ms() - in.duration_ms()) <= 2.0 * 1000.0 / 16000.0);
    const double peak = peak_frequency(out.samples, 16000.0, 300.0, 600.0, 0.05);
    CHECK(std::abs(peak - 440.0) <= 5.0);
  }

  TEST_CASE("output count is round(n * 16000 / 44100) for many block sizes") {
    for (std::size_t n : {1u, 2u, 3u, 10u, 100u, 441u, 882u, 1000u, 4096u, 4410u}) {
      AudioFrame in;
      in.sample_rate_hz = kRate44k;
      in.samples.assign(n, 100);
      const auto expected = static_cast<std::size_t>(std::llround(static_cast<double>(n) * 16000.0 / 44100.0));
      CHECK(resample_to_16k(in).samples.size() == expected);
    }
  }

  TEST_CASE("16 kHz passes through unchanged") {
    AudioFrame in;
    in.samples = sine_pcm(500, 1000.0, 16000.0, 0.3);
    CHECK(resample_to_16k(in).samples == in.samples);
  }

  TEST_CASE("anti-alias filter: flat passband, deep stopband") {
    PolyphaseFilter filter(kRate44k, kRate16k);
    CHECK(std::abs(filter.response_db(1000.0)) < 0.1);
    CHECK(std::abs(filter.response_db(6000.0)) < 0.5);
    CHECK(filter.response_db(9000.0) < -60.0);
    CHECK(filter.response_db(15000.0) < -60.0);
  }

  TEST_CASE("a tone above 8 kHz is suppressed") {
    AudioFrame in;
    in.sample_rate_hz = kRate44k;
    in.samples = sine_pcm(44100, 12000.0, 44100.0, 0.5);
    const auto out = resample_to_16k(in);
    std::vector<std::int16_t> middle(out.samples.begin() + 1000, out.samples.end() - 1000);
    CHECK(facechat::testing::rms(middle) < 0.5 * 32767 * 0.01);
  }

  TEST_CASE("streaming conversion matches block conversion away from block edges") {
    const auto input = sine_pcm(44100, 440.0, 44100.0, 0.5);
    StreamingResampler stream(kRate44k);
    std::vector<std::int16_t> streamed;
    for (std::size_t at = 0; at < input.size(); at += 2048) {
      const std::size_t n = std::min<std::size_t>(2048, input.size() - at);
      const auto chunk = stream.process({input.data() + at, n});
      streamed.insert(streamed.end(), chunk.begin(), chunk.end());
    }
    const auto tail = stream.flush();
    streamed.insert(streamed.end(), tail.begin(), tail.end());
    CHECK(streamed.size() == 16000);

    AudioFrame whole;
    whole.sample_rate_hz = kRate44k;
    whole.samples = input;
    const auto block = resample_to_16k(whole).samples;
    REQUIRE(block.size() == streamed.size());
    int max_diff = 0;
    for (std::size_t i = 200; i + 200 < block.size(); ++i) {
      max_diff = std::max(max_diff, std::abs(block[i] - streamed[i]));
    }
    CHECK(max_diff <= 1);
  }
}

TEST_SUITE("session buffers") {
  AudioFrame audio_ms(double ms, std::int16_t value = 0) {
    AudioFrame f;
    f.samples.assign(static_cast<std::size_t>(ms * 16), value);
    return f;
  }

  TEST_CASE("audio overflow drops the oldest frames") {
    SessionBuffers b({100.0, 4});
    CHECK_FALSE(b.push_audio(audio_ms(40, 1)));
    CHECK_FALSE(b.push_audio(audio_ms(40, 2)));
    CHECK(b.push_audio(audio_ms(40, 3)));
    CHECK(b.dropped_audio() == 1);
    CHECK(b.buffered_audio_ms() == doctest::Approx(80.0));
    auto first = b.pop_audio(std::chrono::milliseconds(0));
    REQUIRE(first);
    CHECK(first->samples[0] == 2);
  }

  TEST_CASE("video keeps the newest and reports skipped frames") {
    SessionBuffers b({1000.0, 3});
    for (std::uint32_t i = 0; i < 5; ++i) {
      VideoFrame v;
      v.seq = i;
      b.push_video(v);
    }
    CHECK(b.dropped_video() == 2);
    std::size_t skipped = 0;
    auto latest = b.take_latest_video(std::chrono::milliseconds(0), &skipped);
    REQUIRE(latest);
    CHECK(latest->seq == 4);
    CHECK(skipped == 2);
    CHECK(b.buffered_video_frames() == 0);
  }

  TEST_CASE("pop times out when empty and close wakes a waiter") {
    SessionBuffers b;
    CHECK_FALSE(b.pop_audio(std::chrono::milliseconds(5)).has_value());
    std::thread closer([&] {
      std::this_thread::sleep_for(std::chrono::milliseconds(20));
      b.close();
    });
    const auto t0 = std::chrono::steady_clock::now();
    CHECK_FALSE(b.pop_audio(std::chrono::milliseconds(5000)).has_value());
    CHECK(std::chrono::steady_clock::now() - t0 < std::chrono::milliseconds(2000));
    closer.join();
    CHECK(b.closed());
    CHECK_THROWS_AS(b.push_audio(audio_ms(10)), SessionClosed);
  }

  TEST_CASE("sequence tracker drops duplicates and reordering per kind") {
    SequenceTracker t;
    CHECK(t.accept(PacketKind::Audio, 5));
    CHECK(t.accept(PacketKind::Video, 0));
    CHECK_FALSE(t.accept(PacketKind::Audio, 5));
    CHECK_FALSE(t.accept(PacketKind::Audio, 4));
    CHECK(t.accept(PacketKind::Audio, 9));
    CHECK(t.dropped() == 2);
    CHECK(t.last(PacketKind::Audio) == 9u);
    CHECK_FALSE(t.last(PacketKind::Control).has_value());
  }
}
