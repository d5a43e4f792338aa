#pragma once

#include <cstdint>
#include <span>

#include "facechat/vad/config.hpp"
#include "facechat/vad/spectrum.hpp"

namespace facechat::vad {

struct FrameDecision {
  std::uint64_t frame_index = 0;
  bool is_speech = false;
  double energy_db = kSilenceDb;
  double band_fraction = 0.0;
  std::uint64_t timestamp_ms = 0;
};

// Stage 1: cheap recall-oriented frame gate. A frame is speech when its energy
// clears the adaptive floor by the configured margin and most of its spectral
// energy lies in the speech band. The floor tracks non-speech frames only.
class EnergyBandGate {
 public:
  explicit EnergyBandGate(const VadConfig& config);

  // Throws VadError(BadFrameLength) when the frame is not frame_samples long.
  FrameDecision classify(std::span<const std::int16_t> frame, std::uint64_t timestamp_ms);

  double floor_db() const { return floor_db_; }
  void reset();

 private:
  VadConfig config_;
  BandAnalyzer analyzer_;
  double floor_db_;
  double alpha_;
  std::uint64_t next_index_ = 0;
};

}  // namespace facechat::vad
