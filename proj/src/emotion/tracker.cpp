#include "facechat/emotion/tracker.hpp"

#include <algorithm>
#include <array>

namespace facechat::emotion {

EmotionError::EmotionError(Code code, const std::string& detail)
    : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

std::string_view to_string(EmotionError::Code code) {
  return code == EmotionError::Code::UndecodableFrame ? "UndecodableFrame" : "AdapterUnavailable";
}

EmotionLabel current_emotion(std::span<const EmotionLabel> entries, std::uint64_t now_ms,
                             std::uint64_t window_ms) {
  const std::uint64_t lo = now_ms >= window_ms ? now_ms - window_ms : 0;
  std::array<std::size_t, kAllEmotions.size()> counts{};
  std::array<double, kAllEmotions.size()> confidence{};
  std::array<std::uint64_t, kAllEmotions.size()> last_ts{};
  // Position of each label's latest entry; ties resolve to the highest.
  std::array<std::ptrdiff_t, kAllEmotions.size()> last_pos;
  last_pos.fill(-1);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    if (e.timestamp_ms < lo || e.timestamp_ms > now_ms) continue;
    const auto k = static_cast<std::size_t>(e.label);
    ++counts[k];
    confidence[k] += e.confidence;
    last_ts[k] = e.timestamp_ms;
    last_pos[k] = static_cast<std::ptrdiff_t>(i);
  }
  std::optional<std::size_t> best;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    if (counts[k] == 0) continue;
    if (!best || counts[k] > counts[*best] ||
        (counts[k] == counts[*best] && last_pos[k] > last_pos[*best])) {
      best = k;
    }
  }
  if (!best) return {Emotion::Neutral, 0.0, now_ms};
  return {kAllEmotions[*best], confidence[*best] / static_cast<double>(counts[*best]),
          last_ts[*best]};
}

EmotionWindow::EmotionWindow(WindowConfig config) : config_(config) {
  if (config_.capacity == 0) config_.capacity = 1;
}

void EmotionWindow::push(const EmotionLabel& label) {
  std::unique_lock lock(mutex_);
  // Stable insert keeps arrival order among equal timestamps.
  auto pos = std::upper_bound(entries_.begin(), entries_.end(), label.timestamp_ms,
                              [](std::uint64_t t, const EmotionLabel& e) { return t < e.timestamp_ms; });
  entries_.insert(pos, label);
  const std::uint64_t newest = entries_.back().timestamp_ms;
  const std::uint64_t lo = newest >= config_.window_ms ? newest - config_.window_ms : 0;
  while (!entries_.empty() && entries_.front().timestamp_ms < lo) entries_.pop_front();
  while (entries_.size() > config_.capacity) entries_.pop_front();
}

std::vector<EmotionLabel> EmotionWindow::snapshot() const {
  std::shared_lock lock(mutex_);
  return {entries_.begin(), entries_.end()};
}

std::size_t EmotionWindow::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

std::optional<std::uint64_t> EmotionWindow::newest_ms() const {
  std::shared_lock lock(mutex_);
  if (entries_.empty()) return std::nullopt;
  return entries_.back().timestamp_ms;
}

EmotionLabel EmotionWindow::current(std::uint64_t now_ms) const {
  const auto entries = snapshot();
  return current_emotion(entries, now_ms, config_.window_ms);
}

EmotionLabel EmotionWindow::current() const {
  const auto entries = snapshot();
  const std::uint64_t now = entries.empty() ? 0 : entries.back().timestamp_ms;
  return current_emotion(entries, now, config_.window_ms);
}

EmotionTracker::EmotionTracker(std::shared_ptr<adapters::EmotionAdapter> adapter,
                               WindowConfig config)
    : adapter_(std::move(adapter)), window_(config) {
  worker_ = std::thread([this] { worker_loop(); });
}

EmotionTracker::~EmotionTracker() {
  {
    std::lock_guard lock(worker_mutex_);
    stopping_ = true;
  }
  worker_cv_.notify_all();
  worker_.join();
}

void EmotionTracker::set_listener(Listener listener) {
  std::lock_guard lock(listener_mutex_);
  listener_ = std::move(listener);
}

void EmotionTracker::set_error_listener(ErrorListener listener) {
  std::lock_guard lock(listener_mutex_);
  error_listener_ = std::move(listener);
}

std::optional<EmotionLabel> EmotionTracker::classify_claimed(const transport::VideoFrame& frame) {
  struct Release {
    EmotionTracker* self;
    ~Release() {
      {
        std::lock_guard lock(self->worker_mutex_);
        self->in_flight_.store(false);
      }
      self->idle_cv_.notify_all();
    }
  } release{this};

  if (!transport::inspect_jpeg(frame.jpeg_bytes)) {
    ++failures_;
    throw EmotionError(EmotionError::Code::UndecodableFrame,
                       "frame " + std::to_string(frame.seq) + " is not a decodable JPEG");
  }
  adapters::AdapterResult<EmotionLabel> result;
  try {
    result = adapter_->classify(frame);
  } catch (const adapters::AdapterError& e) {
    if (e.code() == adapters::AdapterError::Code::NoFaceDetected) {
      ++no_face_;
      return std::nullopt;
    }
    ++failures_;
    throw EmotionError(EmotionError::Code::AdapterUnavailable, e.what());
  }
  window_.push(result.value);
  ++classified_;
  Listener listener;
  {
    std::lock_guard lock(listener_mutex_);
    listener = listener_;
  }
  if (listener) listener(result.value);
  return result.value;
}

std::optional<EmotionLabel> EmotionTracker::ingest_video_frame(const transport::VideoFrame& frame) {
  if (in_flight_.exchange(true)) {
    ++dropped_;
    return std::nullopt;
  }
  return classify_claimed(frame);
}

bool EmotionTracker::submit(const transport::VideoFrame& frame) {
  if (in_flight_.exchange(true)) {
    ++dropped_;
    return false;
  }
  {
    std::lock_guard lock(worker_mutex_);
    pending_ = frame;
  }
  worker_cv_.notify_all();
  return true;
}

void EmotionTracker::wait_idle() {
  std::unique_lock lock(worker_mutex_);
  idle_cv_.wait(lock, [this] { return !in_flight_.load(); });
}

void EmotionTracker::worker_loop() {
  std::unique_lock lock(worker_mutex_);
  while (true) {
    worker_cv_.wait(lock, [this] { return stopping_ || pending_.has_value(); });
    if (pending_) {
      auto frame = std::move(*pending_);
      pending_.reset();
      lock.unlock();
      try {
        classify_claimed(frame);
      } catch (const EmotionError& e) {
        ErrorListener on_error;
        {
          std::lock_guard guard(listener_mutex_);
          on_error = error_listener_;
        }
        if (on_error) on_error(e);
      }
      lock.lock();
      continue;
    }
    if (stopping_) return;
  }
}

}  // namespace facechat::emotion
