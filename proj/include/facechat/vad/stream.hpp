#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "facechat/vad/endpointer.hpp"
#include "facechat/vad/gate.hpp"

namespace facechat::vad {

// Two-stage pipeline over a continuous 16 kHz stream: frames are cut from the
// incoming samples, gated, and fed to the endpointer. Frame timestamps come from
// the running sample count, so the session clock is the audio timeline.
class VadStream {
 public:
  using DecisionObserver = std::function<void(const FrameDecision&)>;

  VadStream(const VadConfig& config, std::shared_ptr<SegmentVerifier> verifier = nullptr);

  std::vector<UtteranceSegment> push(std::span<const std::int16_t> samples_16k);

  void set_decision_observer(DecisionObserver observer) { observer_ = std::move(observer); }

  Endpointer& endpointer() { return endpointer_; }
  const Endpointer& endpointer() const { return endpointer_; }
  const EnergyBandGate& gate() const { return gate_; }
  const VadConfig& config() const { return config_; }

  // Audio-clock position (ms) of the next sample to arrive.
  std::uint64_t position_ms() const;

 private:
  VadConfig config_;
  EnergyBandGate gate_;
  Endpointer endpointer_;
  DecisionObserver observer_;
  std::vector<std::int16_t> pending_;
  std::uint64_t consumed_samples_ = 0;
};

}  // namespace facechat::vad
