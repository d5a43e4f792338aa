// WebSocket conversation server.
#include <atomic>
#include <chrono>
#include <csignal>
#include <thread>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "facechat/pipeline/config.hpp"
#include "facechat/server/server.hpp"

using namespace facechat;

namespace {
std::atomic<bool> g_stop{false};
extern "C" void on_signal(int) { g_stop.store(true); }
}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Serve conversation sessions over WebSocket at /ws."};
  std::string config_path;
  int port = -1;
  bool fake_backends = false;
  std::string log_level = "info";
  std::string log_dir;
  std::string web_root;
  std::string bind;
  std::size_t threads = 2;
  app.add_option("--config", config_path, "Config file (JSON)")->check(CLI::ExistingFile);
  app.add_option("--port", port, "Listen port; 0 picks a free one")->check(CLI::Range(0, 65535));
  app.add_flag("--fake-backends", fake_backends, "Replace every adapter with its fake");
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));
  app.add_option("--log-dir", log_dir, "Write one JSONL event log per session here");
  app.add_option("--web-root", web_root, "Serve static files from this directory");
  app.add_option("--bind", bind, "Bind address");
  app.add_option("--threads", threads, "I/O threads")->check(CLI::Range(std::size_t{1}, std::size_t{64}));
  CLI11_PARSE(app, argc, argv);

  spdlog::set_level(spdlog::level::from_str(log_level));
  try {
    pipeline::AppConfig config;
    if (!config_path.empty()) config = pipeline::AppConfig::load(config_path);
    if (port >= 0) config.server.port = static_cast<std::uint16_t>(port);
    if (!log_dir.empty()) config.server.log_dir = log_dir;
    if (!web_root.empty()) config.server.web_root = web_root;
    if (!bind.empty()) config.server.bind_address = bind;
    if (fake_backends) config.session.adapters.force_fake();
    config.session.validate();
    if (!config.session.adapters.all_fake()) spdlog::warn("some adapters use real HTTP backends");

    server::Server srv(config);
    const auto bound = srv.start(threads);
    spdlog::info("listening on {}:{} (ws path /ws)", config.server.bind_address, bound);
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    while (!g_stop.load()) std::this_thread::sleep_for(std::chrono::milliseconds(100));
    spdlog::info("shutting down ({} sessions)", srv.registry().size());
    srv.stop();
    return 0;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 2;
  }
}
