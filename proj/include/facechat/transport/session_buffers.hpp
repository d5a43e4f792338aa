#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>

#include "facechat/transport/media.hpp"

namespace facechat::transport {

class SessionClosed : public std::runtime_error {
 public:
  SessionClosed() : std::runtime_error("SessionClosed: buffers are closed") {}
};

struct BufferLimits {
  double audio_capacity_ms = 30000.0;
  std::size_t video_capacity_frames = 64;
};

// Per-session bounded FIFOs with drop-oldest overflow. One writer, any number
// of readers; every operation takes the buffer lock.
class SessionBuffers {
 public:
  explicit SessionBuffers(BufferLimits limits = {});

  // Both return true when older entries were evicted to make room.
  bool push_audio(AudioFrame frame);
  bool push_video(VideoFrame frame);

  // Blocks until a frame is available, the buffers close, or the timeout lapses.
  std::optional<AudioFrame> pop_audio(std::chrono::milliseconds timeout);

  // Newest video frame; older queued frames are discarded and added to `skipped`.
  std::optional<VideoFrame> take_latest_video(std::chrono::milliseconds timeout,
                                              std::size_t* skipped = nullptr);

  void close();
  bool closed() const;

  double buffered_audio_ms() const;
  std::size_t buffered_video_frames() const;
  std::uint64_t dropped_audio() const;
  std::uint64_t dropped_video() const;
  const BufferLimits& limits() const { return limits_; }

 private:
  BufferLimits limits_;
  mutable std::mutex mutex_;
  std::condition_variable audio_cv_;
  std::condition_variable video_cv_;
  std::deque<AudioFrame> audio_;
  std::deque<VideoFrame> video_;
  double audio_ms_ = 0.0;
  std::uint64_t dropped_audio_ = 0;
  std::uint64_t dropped_video_ = 0;
  bool closed_ = false;
};

// Enforces strictly increasing seq per packet kind; the first packet of a kind
// is always accepted.
class SequenceTracker {
 public:
  bool accept(PacketKind kind, std::uint32_t seq);
  std::uint64_t dropped() const { return dropped_; }
  std::optional<std::uint32_t> last(PacketKind kind) const;

 private:
  std::map<PacketKind, std::uint32_t> last_;
  std::uint64_t dropped_ = 0;
};

}  // namespace facechat::transport
