#include "facechat/pipeline/event_log.hpp"

namespace facechat::pipeline {

void EventLog::open(const std::filesystem::path& path) {
  std::lock_guard lock(mutex_);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  out_.open(path, std::ios::app);
  if (!out_) throw std::runtime_error("cannot open event log " + path.string());
}

void EventLog::write(double t_ms, const std::string& direction, const nlohmann::json& event) {
  if (!out_.is_open()) return;
  const nlohmann::json line{{"t_ms", t_ms}, {"dir", direction}, {"event", event}};
  std::lock_guard lock(mutex_);
  out_ << line.dump() << '\n';
  out_.flush();
}

}  // namespace facechat::pipeline
