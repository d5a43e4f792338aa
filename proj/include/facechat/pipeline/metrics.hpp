#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace facechat::pipeline {

enum class Acceptability { Acceptable, Tolerable, Noticeable };
std::string_view to_string(Acceptability a);

inline constexpr double kAcceptableMaxMs = 1000.0;
inline constexpr double kNoticeableAboveMs = 2000.0;

// <= 1000 ms acceptable, > 2000 ms noticeable, tolerable in between.
Acceptability classify_latency(double total_ms);

// All times in milliseconds on the session clock.
struct LatencyRecord {
  std::uint64_t turn_id = 0;          // id of the user turn
  double speech_end_ms = 0.0;         // endpointer emitted the segment
  double endpoint_delay_ms = 0.0;     // audio time from last speech to emission (hangover)
  double asr_ms = 0.0;
  double chat_ms = 0.0;
  double tts_first_chunk_ms = 0.0;
  double response_start_ms = 0.0;     // first server-audio packet enqueued
  double total_ms = 0.0;              // response_start_ms - speech_end_ms

  double overhead_ms() const { return total_ms - (asr_ms + chat_ms + tts_first_chunk_ms); }
  Acceptability acceptability() const { return classify_latency(total_ms); }
  nlohmann::json to_json() const;
};

struct SampleStats {
  std::size_t count = 0;
  double mean = 0.0;
  double std = 0.0;  // sample (n - 1) standard deviation; 0 for a single value
};

SampleStats sample_stats(std::span<const double> values);

struct SessionMetrics {
  std::vector<LatencyRecord> records;
  // Absent when no turn completed.
  std::optional<SampleStats> total, asr, chat, tts, overhead;
  nlohmann::json to_json() const;
};

SessionMetrics compute_metrics(std::vector<LatencyRecord> records);

}  // namespace facechat::pipeline
