#include "facechat/vad/endpointer.hpp"

#include <string>

namespace facechat::vad {

std::string_view to_string(EndpointerState state) {
  switch (state) {
    case EndpointerState::Idle: return "Idle";
    case EndpointerState::Rising: return "Rising";
    case EndpointerState::Hangover: return "Hangover";
  }
  return "Unknown";
}

Endpointer::Endpointer(const VadConfig& config, std::shared_ptr<SegmentVerifier> verifier)
    : config_(config),
      verifier_(std::move(verifier)),
      preroll_frames_(static_cast<std::size_t>((config.preroll_ms + config.frame_ms - 1) /
                                               config.frame_ms)) {
  config_.validate();
  if (config_.max_utterance_ms < config_.preroll_ms + 2 * config_.frame_ms) {
    throw VadError(VadError::Code::InvalidConfig,
                   "max_utterance_ms must exceed preroll_ms by at least two frames");
  }
  if (!verifier_) verifier_ = std::make_shared<SpectralVerifier>(config_);
}

void Endpointer::reset() {
  state_ = EndpointerState::Idle;
  preroll_.clear();
  current_.clear();
  silence_ms_ = 0;
  last_timestamp_.reset();
}

void Endpointer::push_preroll(BufferedFrame frame) {
  preroll_.push_back(std::move(frame));
  while (preroll_.size() > preroll_frames_) preroll_.pop_front();
}

void Endpointer::open(const FrameDecision& decision, std::span<const std::int16_t> frame) {
  current_.assign(std::make_move_iterator(preroll_.begin()), std::make_move_iterator(preroll_.end()));
  preroll_.clear();
  current_.push_back({decision.timestamp_ms, {frame.begin(), frame.end()}});
  start_ms_ = current_.front().timestamp_ms;
  onset_ms_ = decision.timestamp_ms;
  speech_end_ms_ = decision.timestamp_ms + static_cast<std::uint64_t>(config_.frame_ms);
  silence_ms_ = 0;
  state_ = EndpointerState::Rising;
}

std::optional<UtteranceSegment> Endpointer::finalize() {
  UtteranceSegment segment;
  segment.start_ms = start_ms_;
  segment.onset_ms = onset_ms_;
  segment.end_ms = speech_end_ms_;
  std::vector<std::int16_t> speech;
  for (auto& f : current_) {
    if (f.timestamp_ms < speech_end_ms_) {
      segment.samples.insert(segment.samples.end(), f.samples.begin(), f.samples.end());
      if (f.timestamp_ms >= onset_ms_) speech.insert(speech.end(), f.samples.begin(), f.samples.end());
    } else {
      push_preroll(std::move(f));
    }
  }
  current_.clear();
  state_ = EndpointerState::Idle;
  silence_ms_ = 0;

  if (segment.speech_ms() < static_cast<std::uint64_t>(config_.min_utterance_ms)) {
    ++rejected_short_;
    return std::nullopt;
  }
  segment.verifier_score = verifier_->score(speech);
  segment.verified = segment.verifier_score >= config_.verifier_threshold;
  if (!segment.verified) {
    ++rejected_unverified_;
    return std::nullopt;
  }
  ++emitted_;
  return segment;
}

std::optional<UtteranceSegment> Endpointer::step(const FrameDecision& decision,
                                                 std::span<const std::int16_t> frame) {
  if (last_timestamp_ && decision.timestamp_ms <= *last_timestamp_) {
    throw VadError(VadError::Code::OutOfOrderFrame,
                   "frame at " + std::to_string(decision.timestamp_ms) + " ms after " +
                       std::to_string(*last_timestamp_) + " ms");
  }
  last_timestamp_ = decision.timestamp_ms;

  const auto frame_ms = static_cast<std::uint64_t>(config_.frame_ms);
  const auto max_ms = static_cast<std::uint64_t>(config_.max_utterance_ms);
  const std::uint64_t frame_end = decision.timestamp_ms + frame_ms;

  std::optional<UtteranceSegment> out;
  if (state_ != EndpointerState::Idle && frame_end - start_ms_ > max_ms) {
    out = finalize();
  }

  switch (state_) {
    case EndpointerState::Idle:
      if (decision.is_speech && !locked()) {
        open(decision, frame);
      } else {
        push_preroll({decision.timestamp_ms, {frame.begin(), frame.end()}});
        return out;
      }
      break;
    case EndpointerState::Rising:
      current_.push_back({decision.timestamp_ms, {frame.begin(), frame.end()}});
      if (decision.is_speech) {
        speech_end_ms_ = frame_end;
      } else {
        state_ = EndpointerState::Hangover;
        silence_ms_ = frame_ms;
        if (silence_ms_ >= static_cast<std::uint64_t>(config_.hangover_ms)) return finalize();
      }
      break;
    case EndpointerState::Hangover:
      current_.push_back({decision.timestamp_ms, {frame.begin(), frame.end()}});
      if (decision.is_speech) {
        speech_end_ms_ = frame_end;
        silence_ms_ = 0;
        state_ = EndpointerState::Rising;
      } else {
        silence_ms_ += frame_ms;
        if (silence_ms_ >= static_cast<std::uint64_t>(config_.hangover_ms)) return finalize();
      }
      break;
  }

  if (state_ != EndpointerState::Idle && frame_end - start_ms_ >= max_ms) {
    auto forced = finalize();
    if (forced) out = std::move(forced);
  }
  return out;
}

}  // namespace facechat::vad
