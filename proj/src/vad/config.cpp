#include "facechat/vad/config.hpp"

namespace facechat::vad {

namespace {

std::string code_name(VadError::Code code) {
  switch (code) {
    case VadError::Code::InvalidConfig: return "InvalidConfig";
    case VadError::Code::OutOfOrderFrame: return "OutOfOrderFrame";
    case VadError::Code::BadFrameLength: return "BadFrameLength";
    case VadError::Code::EmptyCorpus: return "EmptyCorpus";
  }
  return "VadError";
}

void require(bool ok, const std::string& what) {
  if (!ok) throw VadError(VadError::Code::InvalidConfig, what);
}

}  // namespace

VadError::VadError(Code code, const std::string& detail)
    : std::runtime_error(code_name(code) + ": " + detail), code_(code) {}

void VadConfig::validate() const {
  require(frame_ms > 0 && (frame_ms * kSampleRate) % 1000 == 0,
          "frame_ms must be positive and a whole number of samples");
  require(hangover_ms > 0, "hangover_ms must be positive");
  require(preroll_ms > 0, "preroll_ms must be positive");
  require(min_utterance_ms > 0, "min_utterance_ms must be positive");
  require(max_utterance_ms > 0, "max_utterance_ms must be positive");
  require(min_utterance_ms < max_utterance_ms, "min_utterance_ms must be below max_utterance_ms");
  require(verifier_threshold >= 0.0 && verifier_threshold <= 1.0,
          "verifier_threshold must lie in [0, 1]");
  require(floor_time_constant_ms > 0.0, "floor_time_constant_ms must be positive");
  require(band_low_hz >= 0.0 && band_low_hz < band_high_hz && band_high_hz <= kSampleRate / 2.0,
          "speech band must satisfy 0 <= low < high <= 8000");
  require(band_fraction_threshold >= 0.0 && band_fraction_threshold <= 1.0,
          "band_fraction_threshold must lie in [0, 1]");
  require(fixed_window_ms >= frame_ms, "fixed_window_ms must be at least one frame");
}

VadConfig VadConfig::from_json(const nlohmann::json& j) {
  VadConfig c;
  c.frame_ms = j.value("frame_ms", c.frame_ms);
  c.energy_floor_db = j.value("energy_floor_db", c.energy_floor_db);
  c.gate_margin_db = j.value("gate_margin_db", c.gate_margin_db);
  c.hangover_ms = j.value("hangover_ms", c.hangover_ms);
  c.preroll_ms = j.value("preroll_ms", c.preroll_ms);
  c.min_utterance_ms = j.value("min_utterance_ms", c.min_utterance_ms);
  c.max_utterance_ms = j.value("max_utterance_ms", c.max_utterance_ms);
  c.verifier_threshold = j.value("verifier_threshold", c.verifier_threshold);
  c.floor_time_constant_ms = j.value("floor_time_constant_ms", c.floor_time_constant_ms);
  c.band_low_hz = j.value("band_low_hz", c.band_low_hz);
  c.band_high_hz = j.value("band_high_hz", c.band_high_hz);
  c.band_fraction_threshold = j.value("band_fraction_threshold", c.band_fraction_threshold);
  c.fixed_window_ms = j.value("fixed_window_ms", c.fixed_window_ms);
  c.validate();
  return c;
}

nlohmann::json VadConfig::to_json() const {
  return {
      {"frame_ms", frame_ms},
      {"energy_floor_db", energy_floor_db},
      {"gate_margin_db", gate_margin_db},
      {"hangover_ms", hangover_ms},
      {"preroll_ms", preroll_ms},
      {"min_utterance_ms", min_utterance_ms},
      {"max_utterance_ms", max_utterance_ms},
      {"verifier_threshold", verifier_threshold},
      {"floor_time_constant_ms", floor_time_constant_ms},
      {"band_low_hz", band_low_hz},
      {"band_high_hz", band_high_hz},
      {"band_fraction_threshold", band_fraction_threshold},
      {"fixed_window_ms", fixed_window_ms},
  };
}

}  // namespace facechat::vad
