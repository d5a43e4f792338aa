#include "facechat/vad/stream.hpp"

namespace facechat::vad {

VadStream::VadStream(const VadConfig& config, std::shared_ptr<SegmentVerifier> verifier)
    : config_(config),
      gate_(config),
      endpointer_(config, verifier ? std::move(verifier) : std::make_shared<SpectralVerifier>(config)) {}

std::vector<UtteranceSegment> VadStream::push(std::span<const std::int16_t> samples_16k) {
  std::vector<UtteranceSegment> segments;
  pending_.insert(pending_.end(), samples_16k.begin(), samples_16k.end());
  const std::size_t n = config_.frame_samples();
  std::size_t pos = 0;
  while (pending_.size() - pos >= n) {
    std::span<const std::int16_t> frame(pending_.data() + pos, n);
    const std::uint64_t ts = consumed_samples_ * 1000 / kSampleRate;
    FrameDecision decision = gate_.classify(frame, ts);
    if (observer_) observer_(decision);
    if (auto seg = endpointer_.step(decision, frame)) segments.push_back(std::move(*seg));
    consumed_samples_ += n;
    pos += n;
  }
  pending_.erase(pending_.begin(), pending_.begin() + static_cast<std::ptrdiff_t>(pos));
  return segments;
}

std::uint64_t VadStream::position_ms() const {
  return (consumed_samples_ + pending_.size()) * 1000 / kSampleRate;
}

}  // namespace facechat::vad
