#include "facechat/transport/session_buffers.hpp"

namespace facechat::transport {

SessionBuffers::SessionBuffers(BufferLimits limits) : limits_(limits) {}

bool SessionBuffers::push_audio(AudioFrame frame) {
  bool evicted = false;
  {
    std::lock_guard lock(mutex_);
    if (closed_) throw SessionClosed();
    audio_ms_ += frame.duration_ms();
    audio_.push_back(std::move(frame));
    while (!audio_.empty() && audio_ms_ > limits_.audio_capacity_ms) {
      audio_ms_ -= audio_.front().duration_ms();
      audio_.pop_front();
      ++dropped_audio_;
      evicted = true;
    }
    if (audio_.empty()) audio_ms_ = 0.0;
  }
  audio_cv_.notify_one();
  return evicted;
}

bool SessionBuffers::push_video(VideoFrame frame) {
  bool evicted = false;
  {
    std::lock_guard lock(mutex_);
    if (closed_) throw SessionClosed();
    video_.push_back(std::move(frame));
    while (video_.size() > limits_.video_capacity_frames) {
      video_.pop_front();
      ++dropped_video_;
      evicted = true;
    }
  }
  video_cv_.notify_one();
  return evicted;
}

std::optional<AudioFrame> SessionBuffers::pop_audio(std::chrono::milliseconds timeout) {
  std::unique_lock lock(mutex_);
  audio_cv_.wait_for(lock, timeout, [&] { return closed_ || !audio_.empty(); });
  if (audio_.empty()) return std::nullopt;
  AudioFrame frame = std::move(audio_.front());
  audio_.pop_front();
  audio_ms_ -= frame.duration_ms();
  if (audio_.empty()) audio_ms_ = 0.0;
  return frame;
}

std::optional<VideoFrame> SessionBuffers::take_latest_video(std::chrono::milliseconds timeout,
                                                            std::size_t* skipped) {
  std::unique_lock lock(mutex_);
  video_cv_.wait_for(lock, timeout, [&] { return closed_ || !video_.empty(); });
  if (video_.empty()) return std::nullopt;
  if (skipped) *skipped += video_.size() - 1;
  VideoFrame frame = std::move(video_.back());
  video_.clear();
  return frame;
}

void SessionBuffers::close() {
  {
    std::lock_guard lock(mutex_);
    closed_ = true;
  }
  audio_cv_.notify_all();
  video_cv_.notify_all();
}

bool SessionBuffers::closed() const {
  std::lock_guard lock(mutex_);
  return closed_;
}

double SessionBuffers::buffered_audio_ms() const {
  std::lock_guard lock(mutex_);
  return audio_ms_;
}

std::size_t SessionBuffers::buffered_video_frames() const {
  std::lock_guard lock(mutex_);
  return video_.size();
}

std::uint64_t SessionBuffers::dropped_audio() const {
  std::lock_guard lock(mutex_);
  return dropped_audio_;
}

std::uint64_t SessionBuffers::dropped_video() const {
  std::lock_guard lock(mutex_);
  return dropped_video_;
}

bool SequenceTracker::accept(PacketKind kind, std::uint32_t seq) {
  auto it = last_.find(kind);
  if (it != last_.end() && seq <= it->second) {
    ++dropped_;
    return false;
  }
  last_[kind] = seq;
  return true;
}

std::optional<std::uint32_t> SequenceTracker::last(PacketKind kind) const {
  auto it = last_.find(kind);
  if (it == last_.end()) return std::nullopt;
  return it->second;
}

}  // namespace facechat::transport
