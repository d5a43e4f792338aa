#include <doctest.h>

#include <atomic>
#include <condition_variable>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <numbers>
#include <thread>

#include "facechat/adapters/clock.hpp"
#include "facechat/adapters/factory.hpp"
#include "facechat/adapters/fake.hpp"
#include "facechat/pipeline/config.hpp"
#include "facechat/pipeline/event_log.hpp"
#include "facechat/pipeline/metrics.hpp"
#include "facechat/pipeline/session.hpp"
#include "facechat/vad/synthetic.hpp"
#include "test_media.hpp"

using namespace facechat;
using namespace facechat::pipeline;
using adapters::AdapterKind;
using adapters::AdapterSpec;
using namespace std::chrono_literals;

namespace {

vad::UtteranceSegment segment_of(std::uint64_t ms) {
  vad::UtteranceSegment s;
  s.end_ms = ms;
  s.onset_ms = 0;
  s.samples.assign(ms * 16, 1);
  return s;
}

// Thread-safe capture of everything a session sends.
struct Capture {
  struct Entry {
    transport::PacketKind kind;
    nlohmann::json event;
    bool suppressed = false;
    TurnState state = TurnState::Listening;
  };
  std::mutex mutex;
  std::condition_variable cv;
  std::vector<Entry> entries;
  Session* session = nullptr;

  Session::PacketSink sink() {
    return [this](const transport::Packet& p) {
      Entry e{p.kind, {}, session ? session->suppression_active() : false,
              session ? session->state() : TurnState::Listening};
      if (p.kind == transport::PacketKind::ServerEvent) e.event = transport::parse_json_payload(p.payload);
      {
        std::lock_guard lock(mutex);
        entries.push_back(std::move(e));
      }
      cv.notify_all();
    };
  }
  std::vector<nlohmann::json> events(const std::string& type = {}) {
    std::lock_guard lock(mutex);
    std::vector<nlohmann::json> out;
    for (auto& e : entries) {
      if (e.kind == transport::PacketKind::ServerEvent && (type.empty() || e.event["type"] == type)) out.push_back(e.event);
    }
    return out;
  }
  bool wait_for(const std::string& type, std::size_t n, std::chrono::milliseconds timeout) {
    std::unique_lock lock(mutex);
    return cv.wait_for(lock, timeout, [&] {
      std::size_t c = 0;
      for (auto& e : entries) c += e.kind == transport::PacketKind::ServerEvent && e.event["type"] == type;
      return c >= n;
    });
  }
};

SessionConfig fast_config(double asr = 0, double chat = 0, double tts = 0) {
  SessionConfig c;
  c.adapters.asr = AdapterSpec::fake(AdapterKind::Asr, asr);
  c.adapters.chat = AdapterSpec::fake(AdapterKind::Chat, chat);
  c.adapters.tts = AdapterSpec::fake(AdapterKind::Tts, tts);
  c.pacing = PlaybackPacing::None;
  return c;
}

std::unique_ptr<Session> make_session(const SessionConfig& c, std::shared_ptr<adapters::Clock> clock,
                                      Capture* cap = nullptr, adapters::AdapterSet set = {},
                                      const std::filesystem::path& log = {}) {
  auto made = adapters::make_adapters(c.adapters, clock);
  if (set.asr) made.asr = set.asr;
  if (set.chat) made.chat = set.chat;
  if (set.tts) made.tts = set.tts;
  if (set.emotion) made.emotion = set.emotion;
  transport::SessionId id{};
  id[0] = 7;
  auto s = std::make_unique<Session>(id, c, made, clock, cap ? cap->sink() : Session::PacketSink{}, log);
  if (cap) cap->session = s.get();
  return s;
}

transport::Packet packet(transport::PacketKind kind, std::uint32_t seq, std::vector<std::uint8_t> payload) {
  transport::Packet p;
  p.kind = kind;
  p.session_id[0] = 7;
  p.seq = seq;
  p.payload = std::move(payload);
  return p;
}

transport::Packet control(std::uint32_t seq, const nlohmann::json& j) {
  return packet(transport::PacketKind::Control, seq, transport::encode_json_payload(j));
}

// Harmonic-rich voiced signal at any rate, 200 Hz fundamental.
std::vector<std::int16_t> voiced(double ms, double rate, double amp = 0.25) {
  const auto n = static_cast<std::size_t>(ms * rate / 1000.0);
  std::vector<std::int16_t> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double v = 0.0;
    for (int h = 2; h <= 12; ++h) v += std::sin(2.0 * std::numbers::pi * 200.0 * h * static_cast<double>(i) / rate) / 11.0;
    out[i] = static_cast<std::int16_t>(std::lround(amp * 32767.0 * v));
  }
  return out;
}

void send_audio(Session& s, std::uint32_t& seq, const std::vector<std::int16_t>& pcm, std::uint32_t rate) {
  const std::size_t block = rate == transport::kRate16k ? 2048 : 4096;
  for (std::size_t at = 0; at < pcm.size(); at += block) {
    const std::size_t n = std::min(block, pcm.size() - at);
    s.handle_packet(packet(transport::PacketKind::Audio, seq++,
                           transport::encode_audio_payload({pcm.data() + at, n}, rate)));
  }
}

// Chat adapter that blocks until released.
class GateChat final : public adapters::ChatAdapter {
 public:
  adapters::AdapterResult<std::string> complete(const std::string&) override {
    std::unique_lock lock(m_);
    ++entered_;
    cv_.notify_all();
    cv_.wait(lock, [&] { return open_; });
    return {"ok", 0.0};
  }
  void wait_entered(int n) {
    std::unique_lock lock(m_);
    cv_.wait_for(lock, 5s, [&] { return entered_ >= n; });
  }
  void release() {
    std::lock_guard lock(m_);
    open_ = true;
    cv_.notify_all();
  }

 private:
  std::mutex m_;
  std::condition_variable cv_;
  int entered_ = 0;
  bool open_ = false;
};

}  // namespace

TEST_SUITE("metrics") {
  TEST_CASE("sample std of [1.0 s, 1.2 s] is 0.141 s") {
    const std::vector<double> v{1000.0, 1200.0};
    const auto s = sample_stats(v);
    CHECK(s.count == 2);
    CHECK(s.mean == doctest::Approx(1100.0));
    CHECK(s.std == doctest::Approx(141.421356).epsilon(1e-6));
    CHECK(sample_stats(std::vector<double>{5.0}).std == 0.0);
  }

  TEST_CASE("zero turns: empty records and no aggregates") {
    const auto m = compute_metrics({});
    CHECK(m.records.empty());
    CHECK_FALSE(m.total.has_value());
    CHECK(m.to_json()["records"].empty());
  }

  TEST_CASE("acceptability thresholds") {
    CHECK(classify_latency(1000.0) == Acceptability::Acceptable);
    CHECK(classify_latency(1000.5) == Acceptability::Tolerable);
    CHECK(classify_latency(2000.0) == Acceptability::Tolerable);
    CHECK(classify_latency(2000.5) == Acceptability::Noticeable);
    CHECK(to_string(Acceptability::Noticeable) == "noticeable");
  }

  TEST_CASE("overhead is total minus stage times") {
    LatencyRecord r;
    r.asr_ms = 200;
    r.chat_ms = 800;
    r.tts_first_chunk_ms = 100;
    r.total_ms = 1103;
    CHECK(r.overhead_ms() == doctest::Approx(3.0));
    CHECK(r.to_json()["total_ms"] == 1103.0);
  }
}

TEST_SUITE("turn states") {
  TEST_CASE("legal edges are the cycle plus failure returns") {
    using S = TurnState;
    CHECK(is_legal_transition(S::Listening, S::Recognizing));
    CHECK(is_legal_transition(S::Recognizing, S::Generating));
    CHECK(is_legal_transition(S::Generating, S::Synthesizing));
    CHECK(is_legal_transition(S::Synthesizing, S::Speaking));
    CHECK(is_legal_transition(S::Speaking, S::Listening));
    CHECK(is_legal_transition(S::Generating, S::Listening));
    CHECK_FALSE(is_legal_transition(S::Listening, S::Speaking));
    CHECK_FALSE(is_legal_transition(S::Speaking, S::Recognizing));
  }
}

TEST_SUITE("session") {
  TEST_CASE("one turn on virtual time: 200 + 800 + 100 ms gives exactly 1100 ms") {
    auto clock = std::make_shared<adapters::ManualClock>(5000.0);
    Capture cap;
    auto s = make_session(fast_config(200, 800, 100), clock, &cap);
    std::vector<std::pair<TurnState, TurnState>> transitions;
    std::mutex tm;
    s->set_state_observer([&](TurnState a, TurnState b) {
      std::lock_guard lock(tm);
      transitions.emplace_back(a, b);
    });
    s->on_utterance(segment_of(743));
    REQUIRE(s->wait_for_turns(1, 5s));
    const auto records = s->records();
    REQUIRE(records.size() == 1);
    CHECK(records[0].total_ms == doctest::Approx(1100.0));
    CHECK(records[0].asr_ms == doctest::Approx(200.0));
    CHECK(records[0].overhead_ms() == doctest::Approx(0.0));
    CHECK(records[0].turn_id == 1);

    const auto turns = s->history().snapshot();
    REQUIRE(turns.size() == 2);
    CHECK(turns[0].text == "utterance of 743 ms");
    CHECK(turns[1].speaker == dialogue::Speaker::System);
    {
      std::lock_guard lock(tm);
      for (auto [a, b] : transitions) CHECK(is_legal_transition(a, b));
      CHECK(transitions.size() == 5);
    }

    const auto types = cap.events();
    std::vector<std::string> names;
    for (auto& e : types) names.push_back(e["type"]);
    CHECK(names == std::vector<std::string>{"turn", "turn", "speaking_start", "speaking_end"});
    CHECK(cap.events("speaking_end")[0]["latency"]["total_ms"] == doctest::Approx(1100.0));
  }

  TEST_CASE("failed chat: back to Listening, error event, no system turn") {
    class Timeout final : public adapters::ChatAdapter {
     public:
      adapters::AdapterResult<std::string> complete(const std::string&) override {
        throw adapters::AdapterError(adapters::AdapterError::Code::Timeout, "chat timed out");
      }
    };
    Capture cap;
    auto s = make_session(fast_config(), std::make_shared<adapters::ManualClock>(), &cap,
                          {nullptr, std::make_shared<Timeout>(), nullptr, nullptr});
    s->on_utterance(segment_of(500));
    REQUIRE(s->wait_for_turns(1, 5s));
    CHECK(s->state() == TurnState::Listening);
    CHECK(s->failed_turns() == 1);
    CHECK(s->completed_turns() == 0);
    const auto turns = s->history().snapshot();
    REQUIRE(turns.size() == 1);
    CHECK(turns[0].speaker == dialogue::Speaker::User);
    const auto errors = cap.events("error");
    REQUIRE(errors.size() == 1);
    CHECK(errors[0]["stage"] == "chat");
    CHECK(errors[0]["code"] == "Timeout");
    CHECK(cap.events("speaking_start").empty());
    CHECK(s->records().empty());
  }

  TEST_CASE("queue depth 1: newest waiting segment wins, older ones are counted") {
    auto chat = std::make_shared<GateChat>();
    auto s = make_session(fast_config(), std::make_shared<adapters::ManualClock>(), nullptr,
                          {nullptr, chat, nullptr, nullptr});
    s->on_utterance(segment_of(300));
    chat->wait_entered(1);
    s->on_utterance(segment_of(400));
    s->on_utterance(segment_of(500));
    s->on_utterance(segment_of(600));
    CHECK(s->dropped_segments() == 2);
    chat->release();
    REQUIRE(s->wait_for_turns(2, 5s));
    const auto turns = s->history().snapshot();
    REQUIRE(turns.size() == 4);
    CHECK(turns[0].text == "utterance of 300 ms");
    CHECK(turns[2].text == "utterance of 600 ms");
    CHECK(s->completed_turns() == 2);
  }

  TEST_CASE("turns never overlap within a session") {
    auto s = make_session(fast_config(1, 2, 1), adapters::SteadyClock::shared());
    std::atomic<int> active{0}, max_active{0};
    s->set_state_observer([&](TurnState from, TurnState to) {
      if (from == TurnState::Listening) max_active = std::max(max_active.load(), ++active);
      if (to == TurnState::Listening) --active;
    });
    for (int i = 0; i < 30; ++i) {
      s->on_utterance(segment_of(300 + static_cast<std::uint64_t>(i)));
      std::this_thread::sleep_for(1ms);
    }
    std::this_thread::sleep_for(200ms);
    CHECK(s->wait_for_turns(s->completed_turns() + s->failed_turns(), 5s));
    CHECK(max_active == 1);
    CHECK(s->completed_turns() + s->dropped_segments() == 30);
  }

  TEST_CASE("suppression toggles exactly at speaking_start and speaking_end") {
    auto c = fast_config(0, 0, 0);
    Capture cap;
    auto s = make_session(c, std::make_shared<adapters::ManualClock>(), &cap);
    for (int i = 0; i < 3; ++i) {
      s->on_utterance(segment_of(400));
      REQUIRE(s->wait_for_turns(static_cast<std::uint64_t>(i + 1), 5s));
    }
    std::lock_guard lock(cap.mutex);
    bool inside = false;
    int audio = 0;
    for (const auto& e : cap.entries) {
      if (e.kind == transport::PacketKind::ServerAudio) {
        CHECK(inside);
        CHECK(e.suppressed);
        ++audio;
        continue;
      }
      const std::string type = e.event["type"];
      if (type == "speaking_start") {
        CHECK(e.suppressed);
        CHECK(e.state == TurnState::Speaking);
        inside = true;
      } else if (type == "speaking_end") {
        CHECK_FALSE(e.suppressed);
        inside = false;
      } else {
        CHECK_FALSE(e.suppressed);
      }
    }
    CHECK(audio > 0);
    CHECK_FALSE(s->suppression_active());
  }

  TEST_CASE("speech during Speaking opens no segment; the same speech while Listening does") {
    auto c = fast_config();
    c.pacing = PlaybackPacing::Realtime;
    std::vector<std::int16_t> utterance(16 * 400, 0);
    const auto speech = voiced(1200, 16000);
    utterance.insert(utterance.end(), speech.begin(), speech.end());
    utterance.insert(utterance.end(), 16 * 900, 0);

    // Long reply keeps the session in Speaking (60 ms per word).
    class LongChat final : public adapters::ChatAdapter {
     public:
      adapters::AdapterResult<std::string> complete(const std::string&) override {
        std::string words;
        for (int i = 0; i < 60; ++i) words += "word ";
        return {words, 0.0};
      }
    };
    auto s2 = make_session(c, adapters::SteadyClock::shared(), nullptr, {nullptr, std::make_shared<LongChat>(), nullptr, nullptr});
    std::uint32_t seq = 0;
    s2->on_utterance(segment_of(400));
    for (int i = 0; i < 200 && s2->state() != TurnState::Speaking; ++i) std::this_thread::sleep_for(5ms);
    REQUIRE(s2->state() == TurnState::Speaking);
    CHECK(s2->suppression_active());
    send_audio(*s2, seq, utterance, transport::kRate16k);
    REQUIRE(s2->wait_audio_drained(5s));
    CHECK(s2->state() == TurnState::Speaking);
    REQUIRE(s2->wait_for_turns(1, 10s));
    std::this_thread::sleep_for(300ms);
    CHECK(s2->completed_turns() == 1);
    CHECK(s2->history().size() == 2);

    // Control: same audio while Listening.
    send_audio(*s2, seq, utterance, transport::kRate16k);
    REQUIRE(s2->wait_audio_drained(5s));
    REQUIRE(s2->wait_for_turns(2, 10s));
    CHECK(s2->completed_turns() == 2);
    const auto rec = s2->records().back();
    CHECK(rec.endpoint_delay_ms >= 500.0);
    CHECK(rec.endpoint_delay_ms <= 600.0);
  }

  TEST_CASE("44.1 kHz audio packets are resampled and endpointed into a turn") {
    Capture cap;
    auto s = make_session(fast_config(), std::make_shared<adapters::ManualClock>(), &cap);
    std::vector<std::int16_t> pcm(44100 * 4 / 10, 0);
    const auto speech = voiced(1000, 44100.0);
    pcm.insert(pcm.end(), speech.begin(), speech.end());
    pcm.insert(pcm.end(), 44100, 0);
    std::uint32_t seq = 1;
    send_audio(*s, seq, pcm, transport::kRate44k);
    REQUIRE(s->wait_audio_drained(5s));
    REQUIRE(s->wait_for_turns(1, 5s));
    const auto turns = s->history().snapshot();
    REQUIRE(turns.size() == 2);
    CHECK(turns[0].text.rfind("utterance of ", 0) == 0);
  }

  TEST_CASE("video frames drive the emotion used in the next user turn") {
    auto c = fast_config();
    c.adapters.chat.echo_emotion = true;
    c.adapters.emotion.timeline = {{0, emotion::Emotion::Sad, 0.9}};
    Capture cap;
    auto s = make_session(c, std::make_shared<adapters::ManualClock>(), &cap);
    auto v = packet(transport::PacketKind::Video, 1, facechat::testing::make_jpeg(64, 48));
    v.timestamp_ms = 100;
    s->handle_packet(v);
    REQUIRE(cap.wait_for("emotion_update", 1, 5s));
    CHECK(cap.events("emotion_update")[0]["label"] == "sad");
    s->on_utterance(segment_of(500));
    REQUIRE(s->wait_for_turns(1, 5s));
    const auto turns = s->history().snapshot();
    REQUIRE(turns.size() == 2);
    REQUIRE(turns[0].emotion.has_value());
    CHECK(turns[0].emotion->label == emotion::Emotion::Sad);
    CHECK(turns[1].text.find("sad") != std::string::npos);
    CHECK(cap.events("turn")[0]["emotion"] == "sad");
  }

  TEST_CASE("undecodable video yields an error event and leaves the window alone") {
    Capture cap;
    auto s = make_session(fast_config(), std::make_shared<adapters::ManualClock>(), &cap);
    s->handle_packet(packet(transport::PacketKind::Video, 1, {0xFF, 0xD8, 0x00}));
    REQUIRE(cap.wait_for("error", 1, 5s));
    CHECK(cap.events("error")[0]["code"] == "UndecodableFrame");
    CHECK(s->emotion().window().size() == 0);
  }

  TEST_CASE("control messages: edit, metrics, unknown") {
    Capture cap;
    auto s = make_session(fast_config(), std::make_shared<adapters::ManualClock>(), &cap);
    s->on_utterance(segment_of(500));
    REQUIRE(s->wait_for_turns(1, 5s));

    s->handle_packet(control(1, {{"type", "transcript_edit"}, {"turn_id", 1}, {"text", "corrected"}}));
    CHECK(s->history().snapshot()[0].text == "corrected");
    auto turn_events = cap.events("turn");
    REQUIRE(turn_events.size() == 3);
    CHECK(turn_events[2]["text"] == "corrected");

    s->handle_packet(control(2, {{"type", "transcript_edit"}, {"turn_id", 2}, {"text", "x"}}));
    s->handle_packet(control(3, {{"type", "get_metrics"}}));
    s->handle_packet(control(4, {{"type", "dance"}}));
    const auto errors = cap.events("error");
    REQUIRE(errors.size() == 2);
    CHECK(errors[0]["code"] == "NotUserTurn");
    CHECK(errors[1]["code"] == "UnknownControl");
    const auto metrics = cap.events("metrics");
    REQUIRE(metrics.size() == 1);
    CHECK(metrics[0]["records"].size() == 1);
    CHECK(metrics[0]["completed_turns"] == 1);

    // The next prompt uses the corrected text.
    s->on_utterance(segment_of(600));
    REQUIRE(s->wait_for_turns(2, 5s));
    CHECK(s->history().snapshot()[0].text == "corrected");
  }

  TEST_CASE("inbound validation: duplicates dropped, server kinds and bad payloads rejected") {
    Capture cap;
    auto s = make_session(fast_config(), std::make_shared<adapters::ManualClock>(), &cap);
    s->handle_packet(control(5, {{"type", "get_metrics"}}));
    s->handle_packet(control(5, {{"type", "get_metrics"}}));
    s->handle_packet(control(4, {{"type", "get_metrics"}}));
    CHECK(cap.events("metrics").size() == 1);
    CHECK(s->duplicate_packets() == 2);
    try {
      s->handle_packet(packet(transport::PacketKind::ServerEvent, 9, transport::encode_json_payload({{"type", "x"}})));
      FAIL("server kind accepted");
    } catch (const transport::WireException& e) {
      CHECK(e.code() == transport::WireError::UnexpectedKind);
    }
    CHECK_THROWS_AS(s->handle_packet(packet(transport::PacketKind::Audio, 1, {0, 0, 0x3E, 0x80, 1})),
                    transport::WireException);
  }

  TEST_CASE("outbound packets carry the session id and increasing per-kind seq") {
    transport::SessionId seen{};
    std::vector<std::uint32_t> audio_seq, event_seq;
    std::mutex m;
    auto s = make_session(fast_config(), std::make_shared<adapters::ManualClock>());
    s->set_sink([&](const transport::Packet& p) {
      std::lock_guard lock(m);
      seen = p.session_id;
      (p.kind == transport::PacketKind::ServerAudio ? audio_seq : event_seq).push_back(p.seq);
    });
    s->on_utterance(segment_of(500));
    s->wait_for_turns(1, 5s);
    std::lock_guard lock(m);
    CHECK(seen[0] == 7);
    CHECK(std::is_sorted(audio_seq.begin(), audio_seq.end()));
    CHECK(std::adjacent_find(event_seq.begin(), event_seq.end()) == event_seq.end());
    CHECK(!audio_seq.empty());
  }

  TEST_CASE("session log is JSON lines") {
    const auto path = std::filesystem::temp_directory_path() / "facechat_session_log_test.jsonl";
    std::filesystem::remove(path);
    {
      auto s = make_session(fast_config(), std::make_shared<adapters::ManualClock>(), nullptr, {}, path);
      s->on_utterance(segment_of(500));
      REQUIRE(s->wait_for_turns(1, 5s));
    }
    std::ifstream in(path);
    std::string line;
    int lines = 0;
    bool has_record = false;
    while (std::getline(in, line)) {
      const auto j = nlohmann::json::parse(line);
      CHECK(j.contains("t_ms"));
      has_record |= j["dir"] == "record";
      ++lines;
    }
    CHECK(lines >= 5);
    CHECK(has_record);
    std::filesystem::remove(path);
  }
}
