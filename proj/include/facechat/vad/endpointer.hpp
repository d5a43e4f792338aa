#pragma once

#include <atomic>
#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "facechat/vad/config.hpp"
#include "facechat/vad/gate.hpp"
#include "facechat/vad/verifier.hpp"

namespace facechat::vad {

struct UtteranceSegment {
  std::vector<std::int16_t> samples;  // 16 kHz mono, preroll included
  std::uint64_t start_ms = 0;         // first buffered frame (onset minus available preroll)
  std::uint64_t onset_ms = 0;         // first speech frame
  std::uint64_t end_ms = 0;           // end of the last speech frame
  bool verified = false;
  double verifier_score = 0.0;

  std::uint64_t duration_ms() const { return end_ms - start_ms; }
  std::uint64_t speech_ms() const { return end_ms - onset_ms; }
};

enum class EndpointerState { Idle, Rising, Hangover };
std::string_view to_string(EndpointerState state);

// Turns gated frames into utterance segments.
//   Idle -> Rising      first speech frame (preroll frames prepended)
//   Rising -> Hangover  first non-speech frame
//   Hangover -> Rising  speech resumes before hangover_ms of silence
//   Hangover -> Idle    hangover_ms of silence accrued (emit, trailing silence trimmed)
//   Rising -> Idle      segment reached max_utterance_ms (emit)
// Emitted segments need at least min_utterance_ms of speech (onset to end) and a
// verifier score at or above the threshold; anything else is counted and dropped.
class Endpointer {
 public:
  Endpointer(const VadConfig& config, std::shared_ptr<SegmentVerifier> verifier);

  // Throws VadError(OutOfOrderFrame) unless timestamps strictly increase.
  std::optional<UtteranceSegment> step(const FrameDecision& decision,
                                       std::span<const std::int16_t> frame);

  EndpointerState state() const { return state_; }

  // While locked, frames are consumed but no new segment can open.
  void set_locked(bool locked) { locked_.store(locked); }
  bool locked() const { return locked_.load(); }

  std::uint64_t emitted() const { return emitted_; }
  std::uint64_t rejected_short() const { return rejected_short_; }
  std::uint64_t rejected_unverified() const { return rejected_unverified_; }
  std::uint64_t rejected() const { return rejected_short_ + rejected_unverified_; }

  void reset();

 private:
  struct BufferedFrame {
    std::uint64_t timestamp_ms;
    std::vector<std::int16_t> samples;
  };

  void open(const FrameDecision& decision, std::span<const std::int16_t> frame);
  std::optional<UtteranceSegment> finalize();
  void push_preroll(BufferedFrame frame);

  VadConfig config_;
  std::shared_ptr<SegmentVerifier> verifier_;
  std::size_t preroll_frames_;
  std::atomic<bool> locked_{false};

  EndpointerState state_ = EndpointerState::Idle;
  std::deque<BufferedFrame> preroll_;
  std::vector<BufferedFrame> current_;
  std::uint64_t start_ms_ = 0;
  std::uint64_t onset_ms_ = 0;
  std::uint64_t speech_end_ms_ = 0;
  std::uint64_t silence_ms_ = 0;
  std::optional<std::uint64_t> last_timestamp_;

  std::uint64_t emitted_ = 0;
  std::uint64_t rejected_short_ = 0;
  std::uint64_t rejected_unverified_ = 0;
};

}  // namespace facechat::vad
