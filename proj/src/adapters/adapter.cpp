#include "facechat/adapters/adapter.hpp"

namespace facechat::adapters {

std::string_view to_string(AdapterKind kind) {
  switch (kind) {
    case AdapterKind::Asr: return "asr";
    case AdapterKind::Chat: return "chat";
    case AdapterKind::Tts: return "tts";
    case AdapterKind::Emotion: return "emotion";
  }
  return "unknown";
}

std::string_view to_string(AdapterImpl impl) {
  return impl == AdapterImpl::Fake ? "fake" : "http";
}

std::string_view to_string(AdapterError::Code code) {
  switch (code) {
    case AdapterError::Code::Timeout: return "Timeout";
    case AdapterError::Code::BackendError: return "BackendError";
    case AdapterError::Code::InvalidInput: return "InvalidInput";
    case AdapterError::Code::NoFaceDetected: return "NoFaceDetected";
    case AdapterError::Code::Unavailable: return "AdapterUnavailable";
    case AdapterError::Code::InvalidSpec: return "InvalidSpec";
  }
  return "Unknown";
}

AdapterError::AdapterError(Code code, const std::string& detail, int status, std::string body)
    : std::runtime_error(std::string(to_string(code)) + ": " + detail),
      code_(code),
      status_(status),
      body_(std::move(body)) {}

void AdapterSpec::validate() const {
  auto fail = [this](const std::string& what) {
    throw AdapterError(AdapterError::Code::InvalidSpec,
                       std::string(to_string(kind)) + " adapter: " + what);
  };
  if (delay.mean_ms < 0.0) fail("delay mean must be >= 0");
  if (delay.jitter_ms < 0.0) fail("delay jitter must be >= 0");
  if (delay.jitter_ms > delay.mean_ms) fail("delay jitter must not exceed the mean");
  if (timeout_ms <= 0) fail("timeout_ms must be > 0");
  if (impl == AdapterImpl::Http && endpoint.rfind("http://", 0) != 0) {
    fail("http adapter needs an http:// endpoint");
  }
  for (std::size_t i = 1; i < timeline.size(); ++i) {
    if (timeline[i].from_ms < timeline[i - 1].from_ms) fail("timeline must be sorted by from_ms");
  }
  for (const auto& e : timeline) {
    if (e.confidence < 0.0 || e.confidence > 1.0) fail("timeline confidence outside [0,1]");
  }
}

AdapterSpec AdapterSpec::fake(AdapterKind kind, double mean_ms, double jitter_ms) {
  AdapterSpec spec;
  spec.kind = kind;
  spec.impl = AdapterImpl::Fake;
  spec.delay = {mean_ms, jitter_ms};
  return spec;
}

AdapterSpec AdapterSpec::from_json(AdapterKind kind, const nlohmann::json& j) {
  AdapterSpec spec;
  spec.kind = kind;
  const std::string impl = j.value("impl", std::string("fake"));
  if (impl == "fake") {
    spec.impl = AdapterImpl::Fake;
  } else if (impl == "http") {
    spec.impl = AdapterImpl::Http;
  } else {
    throw AdapterError(AdapterError::Code::InvalidSpec, "unknown impl '" + impl + "'");
  }
  if (j.contains("delay_ms")) {
    const auto& d = j.at("delay_ms");
    if (d.is_number()) {
      spec.delay.mean_ms = d.get<double>();
    } else {
      spec.delay.mean_ms = d.value("mean", 0.0);
      spec.delay.jitter_ms = d.value("jitter", 0.0);
    }
  }
  spec.script = j.value("script", std::vector<std::string>{});
  spec.echo_emotion = j.value("echo_emotion", false);
  spec.seed = j.value("seed", std::uint64_t{1});
  spec.endpoint = j.value("endpoint", std::string{});
  spec.timeout_ms = j.value("timeout_ms", 10000);
  spec.bearer_token = j.value("bearer_token", std::string{});
  if (j.contains("timeline")) {
    for (const auto& e : j.at("timeline")) {
      TimelineEntry entry;
      entry.from_ms = e.at("from_ms").get<std::uint64_t>();
      const auto& label = e.at("label");
      if (!label.is_null()) {
        const auto name = label.get<std::string>();
        entry.label = emotion::parse_emotion(name);
        if (!entry.label && name != "none") {
          throw AdapterError(AdapterError::Code::InvalidSpec, "unknown timeline label '" + name + "'");
        }
      }
      entry.confidence = e.value("confidence", 1.0);
      spec.timeline.push_back(entry);
    }
  }
  spec.validate();
  return spec;
}

nlohmann::json AdapterSpec::to_json() const {
  nlohmann::json j{{"impl", to_string(impl)},
                   {"delay_ms", {{"mean", delay.mean_ms}, {"jitter", delay.jitter_ms}}},
                   {"seed", seed},
                   {"timeout_ms", timeout_ms}};
  if (!script.empty()) j["script"] = script;
  if (echo_emotion) j["echo_emotion"] = true;
  if (!endpoint.empty()) j["endpoint"] = endpoint;
  if (!timeline.empty()) {
    auto& t = j["timeline"] = nlohmann::json::array();
    for (const auto& e : timeline) {
      t.push_back({{"from_ms", e.from_ms},
                   {"label", e.label ? nlohmann::json(emotion::to_string(*e.label)) : nlohmann::json()},
                   {"confidence", e.confidence}});
    }
  }
  return j;
}

}  // namespace facechat::adapters
