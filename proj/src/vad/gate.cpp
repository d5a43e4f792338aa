#include "facechat/vad/gate.hpp"

#include <cmath>
#include <string>

namespace facechat::vad {

EnergyBandGate::EnergyBandGate(const VadConfig& config)
    : config_(config),
      analyzer_(config.frame_samples(), kSampleRate, config.band_low_hz, config.band_high_hz),
      floor_db_(config.energy_floor_db),
      alpha_(1.0 - std::exp(-static_cast<double>(config.frame_ms) / config.floor_time_constant_ms)) {
  config_.validate();
}

FrameDecision EnergyBandGate::classify(std::span<const std::int16_t> frame,
                                       std::uint64_t timestamp_ms) {
  if (frame.size() != config_.frame_samples()) {
    throw VadError(VadError::Code::BadFrameLength,
                   "expected " + std::to_string(config_.frame_samples()) + " samples, got " +
                       std::to_string(frame.size()));
  }
  const FrameFeatures f = analyzer_.analyze(frame);
  FrameDecision d;
  d.frame_index = next_index_++;
  d.timestamp_ms = timestamp_ms;
  d.energy_db = f.energy_db;
  d.band_fraction = f.band_fraction;
  d.is_speech = f.energy_db > floor_db_ + config_.gate_margin_db &&
                f.band_fraction > config_.band_fraction_threshold;
  if (!d.is_speech) floor_db_ += alpha_ * (f.energy_db - floor_db_);
  return d;
}

void EnergyBandGate::reset() {
  floor_db_ = config_.energy_floor_db;
  next_index_ = 0;
}

}  // namespace facechat::vad
