#pragma once

#include <filesystem>
#include <fstream>
#include <mutex>

#include <nlohmann/json.hpp>

namespace facechat::pipeline {

// Append-only JSON-lines file; one object per line, flushed per write.
class EventLog {
 public:
  EventLog() = default;
  explicit EventLog(const std::filesystem::path& path) { open(path); }

  void open(const std::filesystem::path& path);

  bool enabled() const { return out_.is_open(); }
  void write(double t_ms, const std::string& direction, const nlohmann::json& event);

 private:
  std::mutex mutex_;
  std::ofstream out_;
};

}  // namespace facechat::pipeline
