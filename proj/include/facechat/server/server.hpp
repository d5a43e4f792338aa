#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <thread>
#include <vector>

#include "facechat/adapters/clock.hpp"
#include "facechat/pipeline/config.hpp"
#include "facechat/pipeline/session.hpp"
#include "facechat/transport/packet.hpp"

namespace facechat::server {

// Sessions keyed by client session id. A session outlives its connection, so a
// client reconnecting with the same id resumes history and seq tracking.
class SessionRegistry {
 public:
  using Factory = std::function<std::shared_ptr<pipeline::Session>(const transport::SessionId&)>;

  explicit SessionRegistry(Factory factory) : factory_(std::move(factory)) {}

  std::shared_ptr<pipeline::Session> acquire(const transport::SessionId& id);
  std::shared_ptr<pipeline::Session> find(const transport::SessionId& id) const;
  std::size_t size() const;
  void close_all();

 private:
  Factory factory_;
  mutable std::mutex mutex_;
  std::map<transport::SessionId, std::shared_ptr<pipeline::Session>> sessions_;
};

// WebSocket endpoint at /ws (binary frames, one packet per message) plus static
// files from web_root at /. A malformed packet gets an error event, then the
// connection closes. A client that falls more than write_queue_limit packets
// behind is disconnected.
class Server {
 public:
  Server(pipeline::AppConfig config, std::shared_ptr<adapters::Clock> clock = nullptr);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  // Binds and starts serving on `threads` workers; returns the bound port
  // (useful when the configured port is 0).
  std::uint16_t start(std::size_t threads = 2);
  // Blocks until stop().
  void wait();
  void stop();

  SessionRegistry& registry() { return registry_; }
  std::uint16_t port() const { return port_; }

 private:
  struct Impl;
  pipeline::AppConfig config_;
  std::shared_ptr<adapters::Clock> clock_;
  SessionRegistry registry_;
  std::unique_ptr<Impl> impl_;
  std::uint16_t port_ = 0;
};

}  // namespace facechat::server
