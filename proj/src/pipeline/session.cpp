#include "facechat/pipeline/session.hpp"

#include <algorithm>

#include "facechat/dialogue/prompt.hpp"

namespace facechat::pipeline {

namespace {

constexpr auto kPollInterval = std::chrono::milliseconds(20);

}  // namespace

std::string_view to_string(TurnState state) {
  switch (state) {
    case TurnState::Listening: return "listening";
    case TurnState::Recognizing: return "recognizing";
    case TurnState::Generating: return "generating";
    case TurnState::Synthesizing: return "synthesizing";
    case TurnState::Speaking: return "speaking";
  }
  return "unknown";
}

bool is_legal_transition(TurnState from, TurnState to) {
  if (to == TurnState::Listening) return from != TurnState::Listening;
  switch (from) {
    case TurnState::Listening: return to == TurnState::Recognizing;
    case TurnState::Recognizing: return to == TurnState::Generating;
    case TurnState::Generating: return to == TurnState::Synthesizing;
    case TurnState::Synthesizing: return to == TurnState::Speaking;
    case TurnState::Speaking: return false;
  }
  return false;
}

Session::Session(transport::SessionId id, SessionConfig config, adapters::AdapterSet adapters,
                 std::shared_ptr<adapters::Clock> clock, PacketSink sink,
                 const std::filesystem::path& log_path)
    : id_(id),
      config_(std::move(config)),
      adapters_(std::move(adapters)),
      clock_(clock ? std::move(clock) : adapters::SteadyClock::shared()),
      buffers_(config_.buffers),
      vad_(config_.vad),
      tracker_(adapters_.emotion, config_.emotion),
      sink_(std::move(sink)) {
  config_.validate();
  if (!log_path.empty()) log_.open(log_path);
  tracker_.set_listener([this](const emotion::EmotionLabel& label) {
    send_event({{"type", "emotion_update"},
                {"label", emotion::to_string(label.label)},
                {"confidence", label.confidence},
                {"timestamp_ms", label.timestamp_ms}});
  });
  audio_thread_ = std::thread([this] { audio_loop(); });
  video_thread_ = std::thread([this] { video_loop(); });
  turn_thread_ = std::thread([this] { turn_loop(); });
}

Session::~Session() { close(); }

void Session::close() {
  {
    std::lock_guard lock(turn_mutex_);
    if (stopping_) return;
    stopping_ = true;
  }
  turn_cv_.notify_all();
  buffers_.close();
  for (auto* t : {&audio_thread_, &video_thread_, &turn_thread_}) {
    if (t->joinable()) t->join();
  }
}

void Session::set_sink(PacketSink sink, std::uint64_t owner) {
  std::lock_guard lock(sink_mutex_);
  sink_ = std::move(sink);
  sink_owner_ = owner;
}

void Session::release_sink(std::uint64_t owner) {
  std::lock_guard lock(sink_mutex_);
  if (sink_owner_ != owner) return;
  sink_ = nullptr;
  sink_owner_ = 0;
}

void Session::set_state_observer(StateObserver observer) {
  std::lock_guard lock(sink_mutex_);
  state_observer_ = std::move(observer);
}

bool Session::suppression_active() const {
  return vad_.endpointer().locked();
}

std::uint64_t Session::duplicate_packets() const {
  std::lock_guard lock(seq_mutex_);
  return inbound_seq_.dropped();
}

void Session::handle_packet(const transport::Packet& packet) {
  using transport::PacketKind;
  if (packet.kind == PacketKind::ServerAudio || packet.kind == PacketKind::ServerEvent) {
    throw transport::WireException(transport::WireError::UnexpectedKind,
                                   "clients may not send " + std::string(transport::to_string(packet.kind)));
  }
  transport::validate_payload(packet);
  {
    std::lock_guard lock(seq_mutex_);
    if (!inbound_seq_.accept(packet.kind, packet.seq)) return;
  }
  switch (packet.kind) {
    case PacketKind::Audio: {
      {
        std::lock_guard lock(audio_mutex_);
        ++audio_pushed_;
      }
      buffers_.push_audio(transport::parse_audio_payload(packet.payload, packet));
      break;
    }
    case PacketKind::Video:
      buffers_.push_video(transport::parse_video_payload(packet.payload, packet));
      break;
    case PacketKind::Control: {
      const auto message = transport::parse_json_payload(packet.payload);
      log_.write(clock_->now_ms(), "in", message);
      handle_control(message);
      break;
    }
    default:
      break;
  }
}

void Session::handle_control(const nlohmann::json& message) {
  const auto type = message.at("type").get<std::string>();
  if (type == "transcript_edit") {
    if (!message.contains("turn_id") || !message["turn_id"].is_number_unsigned() ||
        !message.contains("text") || !message["text"].is_string()) {
      emit_error("dialogue", "BadControlJson", "transcript_edit needs turn_id and text");
      return;
    }
    try {
      const auto turn = history_.edit(message["turn_id"].get<std::uint64_t>(),
                                      message["text"].get<std::string>());
      send_event(dialogue::turn_event(turn));
    } catch (const dialogue::DialogueError& e) {
      emit_error("dialogue", dialogue::to_string(e.code()), e.what());
    }
  } else if (type == "get_metrics") {
    auto j = metrics().to_json();
    j["type"] = "metrics";
    j["completed_turns"] = completed_.load();
    j["failed_turns"] = failed_.load();
    j["dropped_segments"] = dropped_segments_.load();
    send_event(j);
  } else {
    emit_error("control", "UnknownControl", "unknown control type '" + type + "'");
  }
}

void Session::audio_loop() {
  while (true) {
    std::optional<transport::AudioFrame> frame;
    try {
      frame = buffers_.pop_audio(kPollInterval);
    } catch (const transport::SessionClosed&) {
      return;
    }
    if (!frame) {
      if (buffers_.closed()) return;
      continue;
    }
    try {
      std::vector<std::int16_t> pcm;
      if (frame->sample_rate_hz == transport::kRate16k) {
        pcm = std::move(frame->samples);
      } else {
        if (!resampler_ || resampler_->in_rate() != frame->sample_rate_hz) {
          resampler_.emplace(frame->sample_rate_hz);
        }
        pcm = resampler_->process(frame->samples);
      }
      for (auto& segment : vad_.push(pcm)) {
        const double delay = static_cast<double>(vad_.position_ms()) - static_cast<double>(segment.end_ms);
        on_utterance(std::move(segment), delay);
      }
    } catch (const std::exception& e) {
      emit_error("vad", "VadError", e.what());
    }
    {
      std::lock_guard lock(audio_mutex_);
      ++audio_processed_;
    }
    audio_cv_.notify_all();
  }
}

void Session::video_loop() {
  while (true) {
    std::optional<transport::VideoFrame> frame;
    try {
      frame = buffers_.take_latest_video(kPollInterval);
    } catch (const transport::SessionClosed&) {
      return;
    }
    if (!frame) {
      if (buffers_.closed()) return;
      continue;
    }
    try {
      tracker_.ingest_video_frame(*frame);
    } catch (const emotion::EmotionError& e) {
      emit_error("emotion", emotion::to_string(e.code()), e.what());
    }
  }
}

bool Session::wait_audio_drained(std::chrono::milliseconds timeout) const {
  std::unique_lock lock(audio_mutex_);
  return audio_cv_.wait_for(lock, timeout, [this] {
    return audio_processed_ + buffers_.dropped_audio() >= audio_pushed_;
  });
}

void Session::on_utterance(vad::UtteranceSegment segment, double endpoint_delay_ms) {
  {
    std::lock_guard lock(turn_mutex_);
    if (stopping_) return;
    if (pending_) ++dropped_segments_;
    pending_ = PendingSegment{std::move(segment), clock_->now_ms(), endpoint_delay_ms};
  }
  turn_cv_.notify_all();
}

void Session::turn_loop() {
  while (true) {
    PendingSegment next;
    {
      std::unique_lock lock(turn_mutex_);
      turn_cv_.wait(lock, [this] { return stopping_ || pending_.has_value(); });
      if (stopping_) return;
      next = std::move(*pending_);
      pending_.reset();
    }
    run_turn(std::move(next));
    turn_cv_.notify_all();
  }
}

void Session::run_turn(PendingSegment pending) {
  LatencyRecord record;
  record.speech_end_ms = pending.arrival_ms;
  record.endpoint_delay_ms = pending.endpoint_delay_ms;
  std::string_view stage = "asr";
  bool speaking_started = false;
  try {
    set_state(TurnState::Recognizing);
    auto asr = adapters_.asr->transcribe(pending.segment);
    record.asr_ms = asr.backend_latency_ms;
    if (dialogue::is_blank(asr.value)) {
      throw adapters::AdapterError(adapters::AdapterError::Code::BackendError, "empty transcript");
    }

    stage = "prompt";
    const auto emotion_now = tracker_.current_emotion();
    dialogue::PromptDocument doc{config_.persona, config_.instruction, history_.snapshot(), asr.value,
                                 emotion_now};
    const auto user_turn =
        history_.append(dialogue::Speaker::User, asr.value, emotion_now,
                        static_cast<std::uint64_t>(clock_->now_ms()));
    record.turn_id = user_turn.turn_id;
    send_event(dialogue::turn_event(user_turn));

    set_state(TurnState::Generating);
    const auto prompt = dialogue::render_prompt(doc, config_.budget, config_.prompt_template);
    stage = "chat";
    auto chat = adapters_.chat->complete(prompt);
    record.chat_ms = chat.backend_latency_ms;
    if (dialogue::is_blank(chat.value)) {
      throw adapters::AdapterError(adapters::AdapterError::Code::BackendError, "empty reply");
    }
    const auto system_turn = history_.append(dialogue::Speaker::System, chat.value, std::nullopt,
                                             static_cast<std::uint64_t>(clock_->now_ms()));
    send_event(dialogue::turn_event(system_turn));

    stage = "tts";
    set_state(TurnState::Synthesizing);
    auto tts = adapters_.tts->synthesize(chat.value);
    record.tts_first_chunk_ms = tts.backend_latency_ms;
    if (tts.value.empty()) {
      throw adapters::AdapterError(adapters::AdapterError::Code::BackendError, "no audio");
    }

    stage = "playback";
    set_state(TurnState::Speaking);
    if (config_.suppress_while_speaking) vad_.endpointer().set_locked(true);
    speaking_started = true;
    send_event({{"type", "speaking_start"}, {"turn_id", system_turn.turn_id}});
    const double play_start = clock_->now_ms();
    double offset_ms = 0.0;
    for (std::size_t i = 0; i < tts.value.size(); ++i) {
      if (config_.pacing == PlaybackPacing::Realtime && i > 0) {
        clock_->sleep_ms(play_start + offset_ms - clock_->now_ms());
      }
      send_audio(tts.value[i]);
      if (i == 0) record.response_start_ms = clock_->now_ms();
      offset_ms += tts.value[i].duration_ms();
    }
    if (config_.pacing == PlaybackPacing::Realtime) {
      clock_->sleep_ms(play_start + offset_ms - clock_->now_ms());
    }
    record.total_ms = record.response_start_ms - record.speech_end_ms;
    {
      std::lock_guard lock(turn_mutex_);
      records_.push_back(record);
    }
    vad_.endpointer().set_locked(false);
    send_event({{"type", "speaking_end"}, {"turn_id", system_turn.turn_id}, {"latency", record.to_json()}});
    log_.write(clock_->now_ms(), "record", record.to_json());
    set_state(TurnState::Listening);
    ++completed_;
  } catch (const std::exception& e) {
    if (speaking_started) vad_.endpointer().set_locked(false);
    std::string code = "Error";
    if (const auto* a = dynamic_cast<const adapters::AdapterError*>(&e)) {
      code = std::string(adapters::to_string(a->code()));
    } else if (const auto* d = dynamic_cast<const dialogue::DialogueError*>(&e)) {
      code = std::string(dialogue::to_string(d->code()));
    }
    emit_error(stage, code, e.what());
    if (speaking_started) send_event({{"type", "speaking_end"}, {"aborted", true}});
    set_state(TurnState::Listening);
    ++failed_;
  }
  turn_cv_.notify_all();
}

void Session::set_state(TurnState next) {
  const TurnState prev = state_.exchange(next);
  if (prev == next) return;
  StateObserver observer;
  {
    std::lock_guard lock(sink_mutex_);
    observer = state_observer_;
  }
  if (observer) observer(prev, next);
}

bool Session::wait_for_turns(std::uint64_t count, std::chrono::milliseconds timeout) const {
  std::unique_lock lock(turn_mutex_);
  return turn_cv_.wait_for(lock, timeout, [&] {
    return completed_.load() + failed_.load() >= count && state_.load() == TurnState::Listening;
  });
}

SessionMetrics Session::metrics() const { return compute_metrics(records()); }

std::vector<LatencyRecord> Session::records() const {
  std::lock_guard lock(turn_mutex_);
  return records_;
}

void Session::emit_error(std::string_view stage, std::string_view code, const std::string& message) {
  send_event({{"type", "error"}, {"stage", stage}, {"code", code}, {"message", message}});
}

void Session::send_event(const nlohmann::json& event) {
  log_.write(clock_->now_ms(), "out", event);
  send_packet(transport::PacketKind::ServerEvent, transport::encode_json_payload(event));
}

void Session::send_audio(const transport::AudioFrame& frame) {
  send_packet(transport::PacketKind::ServerAudio,
              transport::encode_audio_payload(frame.samples, frame.sample_rate_hz));
}

void Session::send_packet(transport::PacketKind kind, std::vector<std::uint8_t> payload) {
  std::lock_guard lock(sink_mutex_);
  transport::Packet p;
  p.kind = kind;
  p.session_id = id_;
  p.seq = kind == transport::PacketKind::ServerAudio ? out_audio_seq_++ : out_event_seq_++;
  p.timestamp_ms = static_cast<std::uint64_t>(clock_->now_ms());
  p.payload = std::move(payload);
  if (sink_) sink_(p);
}

}  // namespace facechat::pipeline
