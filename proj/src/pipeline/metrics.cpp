#include "facechat/pipeline/metrics.hpp"

#include <cmath>

namespace facechat::pipeline {

std::string_view to_string(Acceptability a) {
  switch (a) {
    case Acceptability::Acceptable: return "acceptable";
    case Acceptability::Tolerable: return "tolerable";
    case Acceptability::Noticeable: return "noticeable";
  }
  return "unknown";
}

Acceptability classify_latency(double total_ms) {
  if (total_ms <= kAcceptableMaxMs) return Acceptability::Acceptable;
  if (total_ms > kNoticeableAboveMs) return Acceptability::Noticeable;
  return Acceptability::Tolerable;
}

nlohmann::json LatencyRecord::to_json() const {
  return {{"turn_id", turn_id},
          {"speech_end_ms", speech_end_ms},
          {"endpoint_delay_ms", endpoint_delay_ms},
          {"asr_ms", asr_ms},
          {"chat_ms", chat_ms},
          {"tts_first_chunk_ms", tts_first_chunk_ms},
          {"response_start_ms", response_start_ms},
          {"total_ms", total_ms},
          {"overhead_ms", overhead_ms()},
          {"acceptability", to_string(acceptability())}};
}

SampleStats sample_stats(std::span<const double> values) {
  SampleStats s;
  s.count = values.size();
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

SessionMetrics compute_metrics(std::vector<LatencyRecord> records) {
  SessionMetrics m;
  m.records = std::move(records);
  if (m.records.empty()) return m;
  auto stats_of = [&m](auto field) {
    std::vector<double> v;
    v.reserve(m.records.size());
    for (const auto& r : m.records) v.push_back(field(r));
    return sample_stats(v);
  };
  m.total = stats_of([](const LatencyRecord& r) { return r.total_ms; });
  m.asr = stats_of([](const LatencyRecord& r) { return r.asr_ms; });
  m.chat = stats_of([](const LatencyRecord& r) { return r.chat_ms; });
  m.tts = stats_of([](const LatencyRecord& r) { return r.tts_first_chunk_ms; });
  m.overhead = stats_of([](const LatencyRecord& r) { return r.overhead_ms(); });
  return m;
}

nlohmann::json SessionMetrics::to_json() const {
  nlohmann::json j{{"records", nlohmann::json::array()}};
  for (const auto& r : records) j["records"].push_back(r.to_json());
  auto put = [&j](const char* name, const std::optional<SampleStats>& s) {
    if (s) j["aggregate"][name] = {{"count", s->count}, {"mean_ms", s->mean}, {"std_ms", s->std}};
  };
  put("total", total);
  put("asr", asr);
  put("chat", chat);
  put("tts_first_chunk", tts);
  put("overhead", overhead);
  return j;
}

}  // namespace facechat::pipeline
