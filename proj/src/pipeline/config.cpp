#include "facechat/pipeline/config.hpp"

#include <fstream>

namespace facechat::pipeline {

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

std::string trim_trailing_newlines(std::string s) {
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
  return s;
}

}  // namespace

std::string_view default_persona() {
  return "I am Mia, an AI companion who talks with people face to face.\n"
         "I love hiking, old movies and trying new recipes.\n"
         "I am curious about people and enjoy hearing about their day.";
}

std::string_view default_instruction() {
  return "You are having a casual chat. Reply as Mia in one or two short, natural sentences "
         "that fit the conversation so far. Each user line notes how the user looks; take the "
         "user's emotional state into account and adjust your tone to it.";
}

void SessionConfig::validate() const {
  adapters.validate();
  vad.validate();
  if (emotion.window_ms == 0) throw ConfigError("emotion.window_ms must be > 0");
  if (emotion.capacity == 0) throw ConfigError("emotion.capacity must be > 0");
  if (dialogue::is_blank(persona)) throw ConfigError("persona is blank");
  if (dialogue::is_blank(instruction)) throw ConfigError("instruction is blank");
  if (budget.max_chars == 0) throw ConfigError("dialogue.max_chars must be > 0");
  if (buffers.audio_capacity_ms <= 0) throw ConfigError("buffers.audio_capacity_ms must be > 0");
  if (buffers.video_capacity_frames == 0) throw ConfigError("buffers.video_capacity_frames must be > 0");
}

AppConfig AppConfig::from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  AppConfig c;
  try {
    if (j.contains("server")) {
      const auto& s = j.at("server");
      c.server.bind_address = s.value("bind_address", c.server.bind_address);
      c.server.port = s.value("port", c.server.port);
      if (s.contains("web_root")) c.server.web_root = resolve(base_dir, s.at("web_root").get<std::string>());
      if (s.contains("log_dir")) c.server.log_dir = resolve(base_dir, s.at("log_dir").get<std::string>());
      c.server.write_queue_limit = s.value("write_queue_limit", c.server.write_queue_limit);
    }
    if (j.contains("vad")) c.session.vad = vad::VadConfig::from_json(j.at("vad"));
    if (j.contains("emotion")) {
      const auto& e = j.at("emotion");
      c.session.emotion.window_ms = e.value("window_ms", c.session.emotion.window_ms);
      c.session.emotion.capacity = e.value("capacity", c.session.emotion.capacity);
    }
    if (j.contains("dialogue")) {
      const auto& d = j.at("dialogue");
      if (d.contains("template_path")) {
        c.session.prompt_template =
            dialogue::PromptTemplate::load(resolve(base_dir, d.at("template_path").get<std::string>()));
      }
      if (d.contains("persona_path")) {
        c.session.persona = trim_trailing_newlines(
            dialogue::read_text_file(resolve(base_dir, d.at("persona_path").get<std::string>())));
      }
      if (d.contains("instruction_path")) {
        c.session.instruction = trim_trailing_newlines(
            dialogue::read_text_file(resolve(base_dir, d.at("instruction_path").get<std::string>())));
      }
      c.session.budget.max_chars = d.value("max_chars", c.session.budget.max_chars);
    }
    if (j.contains("adapters")) c.session.adapters = adapters::AdapterSpecs::from_json(j.at("adapters"));
    if (j.contains("pipeline")) {
      const auto& p = j.at("pipeline");
      c.session.suppress_while_speaking = p.value("suppress_while_speaking", true);
      const auto pacing = p.value("playback_pacing", std::string("realtime"));
      if (pacing == "realtime") {
        c.session.pacing = PlaybackPacing::Realtime;
      } else if (pacing == "none") {
        c.session.pacing = PlaybackPacing::None;
      } else {
        throw ConfigError("pipeline.playback_pacing must be \"realtime\" or \"none\"");
      }
    }
    if (j.contains("buffers")) {
      const auto& b = j.at("buffers");
      c.session.buffers.audio_capacity_ms = b.value("audio_capacity_ms", c.session.buffers.audio_capacity_ms);
      c.session.buffers.video_capacity_frames =
          b.value("video_capacity_frames", c.session.buffers.video_capacity_frames);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  c.session.validate();
  return c;
}

AppConfig AppConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return from_json(j, path.parent_path());
}

}  // namespace facechat::pipeline
