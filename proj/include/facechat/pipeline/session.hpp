#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string_view>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "facechat/adapters/clock.hpp"
#include "facechat/adapters/factory.hpp"
#include "facechat/dialogue/history.hpp"
#include "facechat/emotion/tracker.hpp"
#include "facechat/pipeline/config.hpp"
#include "facechat/pipeline/event_log.hpp"
#include "facechat/pipeline/metrics.hpp"
#include "facechat/transport/packet.hpp"
#include "facechat/transport/resampler.hpp"
#include "facechat/transport/session_buffers.hpp"
#include "facechat/vad/stream.hpp"

namespace facechat::pipeline {

enum class TurnState { Listening, Recognizing, Generating, Synthesizing, Speaking };
std::string_view to_string(TurnState state);

// Legal edges: the five-state cycle plus any state back to Listening.
bool is_legal_transition(TurnState from, TurnState to);

// One conversation. Three internal workers: audio (resample, endpoint), video
// (newest-wins emotion classification), and the turn pipeline, which runs one
// turn at a time. At most one further segment waits; a newer one replaces it.
class Session {
 public:
  // Receives every outbound packet (server audio and server events) in order.
  using PacketSink = std::function<void(const transport::Packet&)>;
  using StateObserver = std::function<void(TurnState from, TurnState to)>;

  Session(transport::SessionId id, SessionConfig config, adapters::AdapterSet adapters,
          std::shared_ptr<adapters::Clock> clock, PacketSink sink = {},
          const std::filesystem::path& log_path = {});
  ~Session();
  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  // Inbound transport. Throws transport::WireException for malformed payloads or
  // server-only kinds; duplicate or stale seq numbers are dropped silently.
  void handle_packet(const transport::Packet& packet);

  // Turn pipeline entry; the audio worker calls it for every emitted segment.
  void on_utterance(vad::UtteranceSegment segment, double endpoint_delay_ms = 0.0);

  // `owner` tags the sink so a closing connection only detaches its own sink.
  void set_sink(PacketSink sink, std::uint64_t owner = 0);
  void release_sink(std::uint64_t owner);
  void report_error(std::string_view stage, std::string_view code, const std::string& message) {
    emit_error(stage, code, message);
  }
  void set_state_observer(StateObserver observer);

  // Stops the workers; queued work is abandoned. Idempotent.
  void close();

  const transport::SessionId& id() const { return id_; }
  TurnState state() const { return state_.load(); }
  bool suppression_active() const;

  // Finished turns, completed or failed.
  bool wait_for_turns(std::uint64_t count, std::chrono::milliseconds timeout) const;
  // Until every buffered audio frame has passed through the endpointer.
  bool wait_audio_drained(std::chrono::milliseconds timeout) const;

  SessionMetrics metrics() const;
  std::vector<LatencyRecord> records() const;
  dialogue::DialogHistory& history() { return history_; }
  const dialogue::DialogHistory& history() const { return history_; }
  emotion::EmotionTracker& emotion() { return tracker_; }
  const transport::SessionBuffers& buffers() const { return buffers_; }

  std::uint64_t completed_turns() const { return completed_.load(); }
  std::uint64_t failed_turns() const { return failed_.load(); }
  std::uint64_t dropped_segments() const { return dropped_segments_.load(); }
  std::uint64_t duplicate_packets() const;

 private:
  struct PendingSegment {
    vad::UtteranceSegment segment;
    double arrival_ms = 0.0;
    double endpoint_delay_ms = 0.0;
  };

  void audio_loop();
  void video_loop();
  void turn_loop();
  void run_turn(PendingSegment pending);
  void handle_control(const nlohmann::json& message);

  void set_state(TurnState next);
  void send_event(const nlohmann::json& event);
  void send_audio(const transport::AudioFrame& frame);
  void send_packet(transport::PacketKind kind, std::vector<std::uint8_t> payload);
  void emit_error(std::string_view stage, std::string_view code, const std::string& message);

  transport::SessionId id_;
  SessionConfig config_;
  adapters::AdapterSet adapters_;
  std::shared_ptr<adapters::Clock> clock_;
  EventLog log_;

  transport::SessionBuffers buffers_;
  mutable std::mutex seq_mutex_;
  transport::SequenceTracker inbound_seq_;

  vad::VadStream vad_;
  std::optional<transport::StreamingResampler> resampler_;
  emotion::EmotionTracker tracker_;
  dialogue::DialogHistory history_;

  std::mutex sink_mutex_;
  PacketSink sink_;
  std::uint64_t sink_owner_ = 0;
  StateObserver state_observer_;
  std::uint32_t out_audio_seq_ = 0;
  std::uint32_t out_event_seq_ = 0;

  std::atomic<TurnState> state_{TurnState::Listening};

  mutable std::mutex turn_mutex_;
  mutable std::condition_variable turn_cv_;
  std::optional<PendingSegment> pending_;
  std::vector<LatencyRecord> records_;
  bool stopping_ = false;

  mutable std::mutex audio_mutex_;
  mutable std::condition_variable audio_cv_;
  std::uint64_t audio_pushed_ = 0;
  std::uint64_t audio_processed_ = 0;

  std::atomic<std::uint64_t> completed_{0};
  std::atomic<std::uint64_t> failed_{0};
  std::atomic<std::uint64_t> dropped_segments_{0};

  std::thread audio_thread_;
  std::thread video_thread_;
  std::thread turn_thread_;
};

}  // namespace facechat::pipeline
