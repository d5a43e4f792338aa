#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "facechat/adapters/adapter.hpp"
#include "facechat/emotion/label.hpp"
#include "facechat/transport/media.hpp"

namespace facechat::emotion {

class EmotionError : public std::runtime_error {
 public:
  enum class Code { UndecodableFrame, AdapterUnavailable };
  EmotionError(Code code, const std::string& detail);
  Code code() const noexcept { return code_; }

 private:
  Code code_;
};

std::string_view to_string(EmotionError::Code code);

// Majority label among entries with now_ms - window_ms <= timestamp <= now_ms.
// Ties go to the tied label seen last; an empty selection yields neutral with
// confidence 0. Confidence is the mean over the winning label's entries.
// Entries must be sorted by timestamp.
EmotionLabel current_emotion(std::span<const EmotionLabel> entries, std::uint64_t now_ms,
                             std::uint64_t window_ms);

struct WindowConfig {
  std::uint64_t window_ms = 3000;
  std::size_t capacity = 256;
};

// Sorted, bounded FIFO. After every push no entry is older than window_ms
// relative to the newest. One writer, any number of readers.
class EmotionWindow {
 public:
  explicit EmotionWindow(WindowConfig config = {});

  void push(const EmotionLabel& label);
  std::vector<EmotionLabel> snapshot() const;
  std::size_t size() const;
  std::optional<std::uint64_t> newest_ms() const;
  EmotionLabel current(std::uint64_t now_ms) const;
  // Evaluated at the newest entry's timestamp.
  EmotionLabel current() const;
  const WindowConfig& config() const { return config_; }

 private:
  WindowConfig config_;
  mutable std::shared_mutex mutex_;
  std::deque<EmotionLabel> entries_;
};

// Classifies video frames through the emotion adapter into a window. At most
// one classification is in flight; frames offered meanwhile are dropped.
class EmotionTracker {
 public:
  using Listener = std::function<void(const EmotionLabel&)>;
  using ErrorListener = std::function<void(const EmotionError&)>;

  EmotionTracker(std::shared_ptr<adapters::EmotionAdapter> adapter, WindowConfig config = {});
  ~EmotionTracker();
  EmotionTracker(const EmotionTracker&) = delete;
  EmotionTracker& operator=(const EmotionTracker&) = delete;

  // Synchronous. Returns the accepted label, or nothing when the frame was dropped
  // (classification in flight) or showed no face. Throws EmotionError; the window
  // is untouched on every error.
  std::optional<EmotionLabel> ingest_video_frame(const transport::VideoFrame& frame);

  // Asynchronous variant on an internal worker. Returns false if dropped.
  bool submit(const transport::VideoFrame& frame);
  // Blocks until no classification is in flight.
  void wait_idle();

  void set_listener(Listener listener);
  void set_error_listener(ErrorListener listener);

  const EmotionWindow& window() const { return window_; }
  EmotionLabel current_emotion() const { return window_.current(); }

  std::uint64_t classified() const { return classified_.load(); }
  std::uint64_t dropped() const { return dropped_.load(); }
  std::uint64_t no_face() const { return no_face_.load(); }
  std::uint64_t failures() const { return failures_.load(); }

 private:
  std::optional<EmotionLabel> classify_claimed(const transport::VideoFrame& frame);
  void worker_loop();

  std::shared_ptr<adapters::EmotionAdapter> adapter_;
  EmotionWindow window_;
  std::atomic<bool> in_flight_{false};
  std::atomic<std::uint64_t> classified_{0};
  std::atomic<std::uint64_t> dropped_{0};
  std::atomic<std::uint64_t> no_face_{0};
  std::atomic<std::uint64_t> failures_{0};

  std::mutex listener_mutex_;
  Listener listener_;
  ErrorListener error_listener_;

  std::mutex worker_mutex_;
  std::condition_variable worker_cv_;
  std::condition_variable idle_cv_;
  std::optional<transport::VideoFrame> pending_;
  bool stopping_ = false;
  std::thread worker_;
};

}  // namespace facechat::emotion
