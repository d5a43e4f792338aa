#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "facechat/vad/config.hpp"
#include "facechat/vad/synthetic.hpp"
#include "facechat/vad/verifier.hpp"

namespace facechat::vad {

struct PrecisionRecall {
  double precision = 1.0;  // 1.0 when nothing was predicted
  double recall = 1.0;     // 1.0 when the reference has no speech
  std::uint64_t true_positive = 0;
  std::uint64_t false_positive = 0;
  std::uint64_t false_negative = 0;
};

enum class VadSystem {
  Stage1Only,          // raw frame gate decisions
  Stage2FixedWindows,  // verifier alone on back-to-back fixed windows
  TwoStage,            // gate + endpointer + verifier (speech span of each emitted segment)
};

std::string_view to_string(VadSystem system);

// Frame i covers [i*frame_ms, (i+1)*frame_ms) and is labeled speech when its
// midpoint lies inside an interval.
std::vector<bool> frame_labels(std::span<const Interval> intervals, std::size_t frames, int frame_ms);

std::vector<Interval> predict_intervals(const LabeledClip& clip, VadSystem system,
                                        const VadConfig& config,
                                        std::shared_ptr<SegmentVerifier> verifier = nullptr);

// Frame-level scoring of externally produced predictions, one list per clip.
PrecisionRecall evaluate_predictions(std::span<const LabeledClip> corpus,
                                     std::span<const std::vector<Interval>> predictions,
                                     int frame_ms);

// Throws VadError(EmptyCorpus) for an empty corpus.
PrecisionRecall evaluate_vad(std::span<const LabeledClip> corpus, VadSystem system,
                             const VadConfig& config,
                             std::shared_ptr<SegmentVerifier> verifier = nullptr);

}  // namespace facechat::vad
