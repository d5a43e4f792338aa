#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "facechat/adapters/factory.hpp"
#include "facechat/dialogue/prompt.hpp"
#include "facechat/emotion/tracker.hpp"
#include "facechat/transport/session_buffers.hpp"
#include "facechat/vad/config.hpp"

namespace facechat::pipeline {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Realtime holds the Speaking state for the synthesized audio's duration;
// None sends every chunk at once (benchmarks).
enum class PlaybackPacing { Realtime, None };

std::string_view default_persona();
std::string_view default_instruction();

struct SessionConfig {
  adapters::AdapterSpecs adapters;
  vad::VadConfig vad;
  emotion::WindowConfig emotion;
  std::string persona{default_persona()};
  std::string instruction{default_instruction()};
  dialogue::PromptTemplate prompt_template = dialogue::PromptTemplate::canonical();
  dialogue::PromptBudget budget;
  bool suppress_while_speaking = true;
  PlaybackPacing pacing = PlaybackPacing::Realtime;
  transport::BufferLimits buffers;

  // Throws ConfigError, or the owning module's error for its sub-config.
  void validate() const;
};

struct ServerConfig {
  std::string bind_address = "0.0.0.0";
  std::uint16_t port = 8080;
  std::filesystem::path web_root;  // empty: no static files
  std::filesystem::path log_dir;   // empty: no JSONL session logs
  std::size_t write_queue_limit = 512;
};

struct AppConfig {
  ServerConfig server;
  SessionConfig session;

  // Relative paths inside the file resolve against base_dir.
  static AppConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
  static AppConfig load(const std::filesystem::path& path);
};

}  // namespace facechat::pipeline
