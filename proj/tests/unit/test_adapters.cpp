#include <doctest.h>

#include <chrono>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "facechat/adapters/adapter.hpp"
#include "facechat/adapters/clock.hpp"
#include "facechat/adapters/factory.hpp"
#include "facechat/adapters/fake.hpp"
#include "facechat/adapters/http.hpp"
#include "signal_oracles.hpp"
#include "test_media.hpp"

using namespace facechat::adapters;
using facechat::emotion::Emotion;
using facechat::vad::UtteranceSegment;

namespace {

UtteranceSegment segment_of(std::uint64_t ms) {
  UtteranceSegment s;
  s.start_ms = 1000;
  s.onset_ms = 1000;
  s.end_ms = 1000 + ms;
  s.samples.assign(ms * 16, 100);
  return s;
}

AdapterError::Code code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const AdapterError& e) {
    return e.code();
  }
  FAIL("no AdapterError thrown");
  return AdapterError::Code::InvalidSpec;
}

// Local backend standing in for the HTTP contract.
struct Backend {
  httplib::Server server;
  std::thread thread;
  int port = 0;
  std::string last_auth;
  std::string last_body;

  Backend() {
    server.Post("/asr", [this](const httplib::Request& req, httplib::Response& res) {
      last_body = req.body;
      last_auth = req.get_header_value("Authorization");
      res.set_content(R"({"text":"hello from asr"})", "application/json");
    });
    server.Post("/chat", [this](const httplib::Request& req, httplib::Response& res) {
      last_body = req.body;
      res.set_content(R"({"text":"reply"})", "application/json");
    });
    server.Post("/tts", [](const httplib::Request&, httplib::Response& res) {
      std::string pcm(2 * 5000, '\0');
      pcm[0] = 0x01;
      res.set_content(pcm, "application/octet-stream");
    });
    server.Post("/tts-odd", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(std::string(3, '\0'), "application/octet-stream");
    });
    server.Post("/emotion", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(R"({"label":"sad","confidence":0.7})", "application/json");
    });
    server.Post("/disgust", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(R"({"label":"disgust","confidence":0.9})", "application/json");
    });
    server.Post("/noface", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(R"({"label":null})", "application/json");
    });
    server.Post("/error", [](const httplib::Request&, httplib::Response& res) {
      res.status = 500;
      res.set_content("model crashed", "text/plain");
    });
    server.Post("/garbage", [](const httplib::Request&, httplib::Response& res) {
      res.set_content("not json", "text/plain");
    });
    server.Post("/slow", [](const httplib::Request&, httplib::Response& res) {
      std::this_thread::sleep_for(std::chrono::milliseconds(1500));
      res.set_content(R"({"text":"late"})", "application/json");
    });
    port = server.bind_to_any_port("127.0.0.1");
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }
  ~Backend() {
    server.stop();
    thread.join();
  }

  AdapterSpec spec(AdapterKind kind, const std::string& path, int timeout_ms = 3000) const {
    AdapterSpec s;
    s.kind = kind;
    s.impl = AdapterImpl::Http;
    s.endpoint = "http://127.0.0.1:" + std::to_string(port) + path;
    s.timeout_ms = timeout_ms;
    return s;
  }
};

}  // namespace

TEST_SUITE("delay model") {
  TEST_CASE("draws stay within mean +- jitter and pairs average to the mean") {
    DelayModel m({100.0, 30.0}, 5);
    double sum = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const double d = m.next_ms();
      CHECK(d >= 70.0);
      CHECK(d <= 130.0);
      sum += d;
    }
    CHECK(sum / 1000.0 == doctest::Approx(100.0).epsilon(1e-12));
  }

  TEST_CASE("same seed, same sequence") {
    DelayModel a({50.0, 20.0}, 9), b({50.0, 20.0}, 9), c({50.0, 20.0}, 10);
    bool differs = false;
    for (int i = 0; i < 50; ++i) {
      const double x = a.next_ms();
      CHECK(x == b.next_ms());
      differs |= x != c.next_ms();
    }
    CHECK(differs);
  }
}

TEST_SUITE("fake adapters") {
  TEST_CASE("asr: script round-robin and default line") {
    auto clock = std::make_shared<ManualClock>();
    auto spec = AdapterSpec::fake(AdapterKind::Asr, 200.0);
    spec.script = {"hello", "again"};
    FakeAsr scripted(spec, clock);
    const auto r = scripted.transcribe(segment_of(500));
    CHECK(r.value == "hello");
    CHECK(r.backend_latency_ms == doctest::Approx(200.0));
    CHECK(scripted.transcribe(segment_of(500)).value == "again");
    CHECK(scripted.transcribe(segment_of(500)).value == "hello");

    FakeAsr plain(AdapterSpec::fake(AdapterKind::Asr), clock);
    CHECK(plain.transcribe(segment_of(743)).value == "utterance of 743 ms");
    CHECK(code_of([&] { plain.transcribe(UtteranceSegment{}); }) == AdapterError::Code::InvalidInput);
  }

  TEST_CASE("chat: scripted reply, emotion echo, empty prompt") {
    auto clock = std::make_shared<ManualClock>();
    auto spec = AdapterSpec::fake(AdapterKind::Chat);
    spec.script = {"I see."};
    FakeChat chat(spec, clock);
    CHECK(chat.complete("anything").value == "I see.");

    spec.echo_emotion = true;
    FakeChat echo(spec, clock);
    const auto reply = echo.complete("Mia...\nUser (the user looks sad): hi\nAI:").value;
    CHECK(reply.find("sad") != std::string::npos);
    CHECK(code_of([&] { chat.complete(""); }) == AdapterError::Code::InvalidInput);
    CHECK(extract_emotion_token("x the user looks happy y the user looks angry): z") == "angry");
    CHECK(extract_emotion_token("no marker") == "");
  }

  TEST_CASE("tts: duration rule and 2048-sample chunking") {
    FakeTts tts(AdapterSpec::fake(AdapterKind::Tts), std::make_shared<ManualClock>());
    CHECK(fake_tts_duration_ms("hello world") == 300);
    const auto short_reply = tts.synthesize("hello world").value;
    std::size_t total = 0;
    for (const auto& f : short_reply) total += f.samples.size();
    CHECK(total == 300 * 16);

    const auto ten = tts.synthesize("one two three four five six seven eight nine ten").value;
    REQUIRE(ten.size() == 5);
    for (int i = 0; i < 4; ++i) CHECK(ten[static_cast<std::size_t>(i)].samples.size() == 2048);
    CHECK(ten[4].samples.size() == 1408);
    CHECK(ten[1].timestamp_ms == 128);

    std::vector<std::int16_t> joined;
    for (const auto& f : ten) joined.insert(joined.end(), f.samples.begin(), f.samples.end());
    CHECK(std::abs(facechat::testing::peak_frequency(joined, 16000.0, 150.0, 300.0, 0.5) - 220.0) <= 1.0);
    CHECK(code_of([&] { tts.synthesize(""); }) == AdapterError::Code::InvalidInput);
    CHECK(code_of([&] { tts.synthesize("   "); }) == AdapterError::Code::InvalidInput);
  }

  TEST_CASE("emotion: timeline lookup") {
    auto spec = AdapterSpec::fake(AdapterKind::Emotion);
    spec.timeline = {{0, Emotion::Neutral, 1.0}, {5000, Emotion::Happy, 0.9}};
    FakeEmotion fake(spec, std::make_shared<ManualClock>());
    facechat::transport::VideoFrame f;
    f.jpeg_bytes = facechat::testing::make_jpeg(8, 8);
    f.timestamp_ms = 6000;
    CHECK(fake.classify(f).value.label == Emotion::Happy);
    f.timestamp_ms = 4999;
    CHECK(fake.classify(f).value.label == Emotion::Neutral);

    auto late = spec;
    late.timeline = {{1000, Emotion::Sad, 1.0}};
    FakeEmotion before(late, std::make_shared<ManualClock>());
    f.timestamp_ms = 10;
    CHECK(code_of([&] { before.classify(f); }) == AdapterError::Code::NoFaceDetected);
  }

  TEST_CASE("measured latency stays within mean +- jitter + 5 ms on the real clock") {
    auto spec = AdapterSpec::fake(AdapterKind::Chat, 12.0, 6.0);
    FakeChat chat(spec, SteadyClock::shared());
    for (int i = 0; i < 100; ++i) {
      const double ms = chat.complete("p").backend_latency_ms;
      CHECK(ms >= 12.0 - 6.0 - 5.0);
      CHECK(ms <= 12.0 + 6.0 + 5.0);
    }
  }
}

TEST_SUITE("adapter spec") {
  TEST_CASE("validation") {
    CHECK_NOTHROW(AdapterSpec::fake(AdapterKind::Asr, 10, 10).validate());
    CHECK(code_of([] { AdapterSpec::fake(AdapterKind::Asr, 10, 11).validate(); }) == AdapterError::Code::InvalidSpec);
    CHECK(code_of([] { AdapterSpec::fake(AdapterKind::Asr, -1).validate(); }) == AdapterError::Code::InvalidSpec);
    auto http = AdapterSpec::fake(AdapterKind::Chat);
    http.impl = AdapterImpl::Http;
    http.endpoint = "https://example.com/chat";
    CHECK(code_of([&] { http.validate(); }) == AdapterError::Code::InvalidSpec);
    http.endpoint = "http://example.com/chat";
    http.timeout_ms = 0;
    CHECK(code_of([&] { http.validate(); }) == AdapterError::Code::InvalidSpec);
  }

  TEST_CASE("json round-trip") {
    const auto j = nlohmann::json::parse(R"({
      "impl": "fake", "delay_ms": {"mean": 80, "jitter": 10}, "seed": 4,
      "timeline": [{"from_ms": 0, "label": "happy", "confidence": 0.5}, {"from_ms": 100, "label": null}]
    })");
    const auto spec = AdapterSpec::from_json(AdapterKind::Emotion, j);
    CHECK(spec.delay.mean_ms == 80.0);
    CHECK(spec.delay.jitter_ms == 10.0);
    REQUIRE(spec.timeline.size() == 2);
    CHECK_FALSE(spec.timeline[1].label.has_value());
    const auto again = AdapterSpec::from_json(AdapterKind::Emotion, spec.to_json());
    CHECK(again.to_json() == spec.to_json());
    CHECK(AdapterSpec::from_json(AdapterKind::Asr, nlohmann::json{{"delay_ms", 30}}).delay.mean_ms == 30.0);
  }

  TEST_CASE("force_fake replaces http specs") {
    AdapterSpecs specs;
    specs.chat.impl = AdapterImpl::Http;
    specs.chat.endpoint = "http://127.0.0.1:1/chat";
    CHECK_FALSE(specs.all_fake());
    specs.force_fake();
    CHECK(specs.all_fake());
    const auto set = make_adapters(specs, std::make_shared<ManualClock>());
    CHECK(dynamic_cast<FakeChat*>(set.chat.get()) != nullptr);
  }
}

TEST_SUITE("http adapters") {
  TEST_CASE("base64") {
    CHECK(base64_encode("") == "");
    CHECK(base64_encode("f") == "Zg==");
    CHECK(base64_encode("foobar") == "Zm9vYmFy");
  }

  TEST_CASE("asr request shape, bearer token, reply") {
    Backend b;
    auto spec = b.spec(AdapterKind::Asr, "/asr");
    spec.bearer_token = "sekret";
    HttpAsr asr(spec);
    const auto r = asr.transcribe(segment_of(10));
    CHECK(r.value == "hello from asr");
    CHECK(r.backend_latency_ms >= 0.0);
    CHECK(b.last_auth == "Bearer sekret");
    const auto body = nlohmann::json::parse(b.last_body);
    CHECK(body["sample_rate"] == 16000);
    CHECK(body["pcm16_b64"].get<std::string>().size() == (160 * 2 + 2) / 3 * 4);
  }

  TEST_CASE("chat and tts") {
    Backend b;
    HttpChat chat(b.spec(AdapterKind::Chat, "/chat"));
    CHECK(chat.complete("hi there").value == "reply");
    CHECK(nlohmann::json::parse(b.last_body)["prompt"] == "hi there");
    HttpTts tts(b.spec(AdapterKind::Tts, "/tts"));
    const auto frames = tts.synthesize("words").value;
    REQUIRE(frames.size() == 3);
    CHECK(frames[0].samples.size() == 2048);
    CHECK(frames[0].samples[0] == 1);
    CHECK(frames[2].samples.size() == 5000 - 4096);
    CHECK(code_of([&] { HttpTts(b.spec(AdapterKind::Tts, "/tts-odd")).synthesize("x"); }) ==
          AdapterError::Code::BackendError);
  }

  TEST_CASE("emotion labels are whitelisted; null label means no face") {
    Backend b;
    facechat::transport::VideoFrame f;
    f.jpeg_bytes = facechat::testing::make_jpeg(8, 8);
    f.timestamp_ms = 77;
    const auto ok = HttpEmotion(b.spec(AdapterKind::Emotion, "/emotion")).classify(f).value;
    CHECK(ok.label == Emotion::Sad);
    CHECK(ok.confidence == doctest::Approx(0.7));
    CHECK(ok.timestamp_ms == 77);
    CHECK(code_of([&] { HttpEmotion(b.spec(AdapterKind::Emotion, "/disgust")).classify(f); }) ==
          AdapterError::Code::BackendError);
    CHECK(code_of([&] { HttpEmotion(b.spec(AdapterKind::Emotion, "/noface")).classify(f); }) ==
          AdapterError::Code::NoFaceDetected);
  }

  TEST_CASE("500 and malformed replies are BackendError with status and body") {
    Backend b;
    try {
      HttpChat(b.spec(AdapterKind::Chat, "/error")).complete("x");
      FAIL("expected BackendError");
    } catch (const AdapterError& e) {
      CHECK(e.code() == AdapterError::Code::BackendError);
      CHECK(e.status() == 500);
      CHECK(e.body() == "model crashed");
    }
    CHECK(code_of([&] { HttpAsr(b.spec(AdapterKind::Asr, "/garbage")).transcribe(segment_of(10)); }) ==
          AdapterError::Code::BackendError);
  }

  TEST_CASE("never blocks past timeout_ms") {
    Backend b;
    HttpChat slow(b.spec(AdapterKind::Chat, "/slow", 200));
    const auto t0 = std::chrono::steady_clock::now();
    CHECK(code_of([&] { slow.complete("x"); }) == AdapterError::Code::Timeout);
    const auto waited = std::chrono::steady_clock::now() - t0;
    CHECK(waited < std::chrono::milliseconds(200 + 100));
  }

  TEST_CASE("unreachable backend is Unavailable") {
    AdapterSpec spec;
    spec.kind = AdapterKind::Chat;
    spec.impl = AdapterImpl::Http;
    spec.endpoint = "http://127.0.0.1:1/chat";
    spec.timeout_ms = 2000;
    CHECK(code_of([&] { HttpChat(spec).complete("x"); }) == AdapterError::Code::Unavailable);
  }
}
