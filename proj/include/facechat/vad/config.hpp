#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

namespace facechat::vad {

inline constexpr int kSampleRate = 16000;

class VadError : public std::runtime_error {
 public:
  enum class Code { InvalidConfig, OutOfOrderFrame, BadFrameLength, EmptyCorpus };
  VadError(Code code, const std::string& detail);
  Code code() const noexcept { return code_; }

 private:
  Code code_;
};

struct VadConfig {
  int frame_ms = 30;
  double energy_floor_db = -60.0;
  double gate_margin_db = 9.0;
  int hangover_ms = 500;
  int preroll_ms = 300;
  int min_utterance_ms = 250;
  int max_utterance_ms = 15000;
  double verifier_threshold = 0.5;

  // Stage-1 internals.
  double floor_time_constant_ms = 2000.0;
  double band_low_hz = 300.0;
  double band_high_hz = 3400.0;
  double band_fraction_threshold = 0.5;

  // Window length for the stage-2-only baseline used in evaluation.
  int fixed_window_ms = 1000;

  std::size_t frame_samples() const {
    return static_cast<std::size_t>(frame_ms) * kSampleRate / 1000;
  }

  // Throws VadError(InvalidConfig).
  void validate() const;

  static VadConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

}  // namespace facechat::vad
