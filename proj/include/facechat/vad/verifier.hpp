#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "facechat/vad/config.hpp"
#include "facechat/vad/spectrum.hpp"

namespace facechat::vad {

// Stage 2: scores a whole candidate segment in [0, 1]. Model-backed verifiers
// plug in behind this interface.
class SegmentVerifier {
 public:
  virtual ~SegmentVerifier() = default;
  virtual double score(std::span<const std::int16_t> samples_16k) = 0;
  virtual std::string name() const = 0;
};

// Mean over frames of (band fraction x static energy gate). The gate uses the
// configured initial floor plus margin, so the score depends only on the input.
class SpectralVerifier final : public SegmentVerifier {
 public:
  explicit SpectralVerifier(const VadConfig& config);

  double score(std::span<const std::int16_t> samples_16k) override;
  std::string name() const override { return "spectral"; }

 private:
  BandAnalyzer analyzer_;
  double gate_db_;
};

}  // namespace facechat::vad
