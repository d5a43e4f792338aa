#include "facechat/server/server.hpp"

#include <atomic>
#include <deque>
#include <fstream>
#include <sstream>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "facechat/adapters/factory.hpp"

namespace facechat::server {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;

std::shared_ptr<pipeline::Session> SessionRegistry::acquire(const transport::SessionId& id) {
  std::lock_guard lock(mutex_);
  auto& slot = sessions_[id];
  if (!slot) slot = factory_(id);
  return slot;
}

std::shared_ptr<pipeline::Session> SessionRegistry::find(const transport::SessionId& id) const {
  std::lock_guard lock(mutex_);
  auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : it->second;
}

std::size_t SessionRegistry::size() const {
  std::lock_guard lock(mutex_);
  return sessions_.size();
}

void SessionRegistry::close_all() {
  std::map<transport::SessionId, std::shared_ptr<pipeline::Session>> sessions;
  {
    std::lock_guard lock(mutex_);
    sessions.swap(sessions_);
  }
  for (auto& [id, s] : sessions) s->close();
}

namespace {

std::atomic<std::uint64_t> g_connection_ids{1};

std::string_view mime_type(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".html" || ext == ".htm") return "text/html; charset=utf-8";
  if (ext == ".js" || ext == ".mjs") return "text/javascript";
  if (ext == ".css") return "text/css";
  if (ext == ".json") return "application/json";
  if (ext == ".png") return "image/png";
  if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
  if (ext == ".svg") return "image/svg+xml";
  if (ext == ".wasm") return "application/wasm";
  return "application/octet-stream";
}

constexpr std::string_view kLandingPage =
    "<!doctype html><title>facechat</title><p>facechat server. Connect a client to <code>/ws</code>.</p>\n";

class WsConnection : public std::enable_shared_from_this<WsConnection> {
 public:
  WsConnection(tcp::socket&& socket, SessionRegistry& registry, std::size_t queue_limit)
      : ws_(std::move(socket)), registry_(registry), queue_limit_(queue_limit) {}

  ~WsConnection() {
    if (session_) session_->release_sink(id_);
  }

  void run(http::request<http::string_body> request) {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.read_message_max(transport::kHeaderSize + transport::kMaxPayload);
    ws_.binary(true);
    ws_.async_accept(request, beast::bind_front_handler(&WsConnection::on_accept, shared_from_this()));
  }

 private:
  void on_accept(beast::error_code ec) {
    if (ec) return;
    do_read();
  }

  void do_read() {
    ws_.async_read(buffer_, beast::bind_front_handler(&WsConnection::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec) {
      detach();
      return;
    }
    const auto data = buffer_.cdata();
    const auto* begin = static_cast<const std::uint8_t*>(data.data());
    std::vector<std::uint8_t> bytes(begin, begin + data.size());
    buffer_.consume(buffer_.size());
    try {
      if (!ws_.got_binary()) {
        throw transport::WireException(transport::WireError::TruncatedPayload,
                                       "packets must be sent as binary messages");
      }
      const auto packet = transport::decode_packet(bytes);
      if (!session_) {
        session_ = registry_.acquire(packet.session_id);
        std::weak_ptr<WsConnection> weak = shared_from_this();
        session_->set_sink(
            [weak](const transport::Packet& p) {
              if (auto self = weak.lock()) self->enqueue(transport::encode_packet(p));
            },
            id_);
      } else if (packet.session_id != session_->id()) {
        throw transport::WireException(transport::WireError::UnexpectedKind,
                                       "session id changed within a connection");
      }
      session_->handle_packet(packet);
    } catch (const transport::WireException& e) {
      fail(transport::to_string(e.code()), e.what());
      return;
    } catch (const std::exception& e) {
      fail("InternalError", e.what());
      return;
    }
    do_read();
  }

  // Error event first, then a policy close once the queue has flushed.
  void fail(std::string_view code, const std::string& message) {
    if (session_) {
      session_->report_error("transport", code, message);
    } else {
      transport::Packet p;
      p.kind = transport::PacketKind::ServerEvent;
      p.payload = transport::encode_json_payload(
          {{"type", "error"}, {"stage", "transport"}, {"code", code}, {"message", message}});
      enqueue(transport::encode_packet(p));
    }
    detach();
    net::post(ws_.get_executor(), [self = shared_from_this()] {
      self->close_after_flush_ = true;
      if (self->queue_.empty()) self->do_close(websocket::close_code::policy_error);
    });
  }

  void enqueue(std::vector<std::uint8_t> bytes) {
    net::post(ws_.get_executor(), [self = shared_from_this(), bytes = std::move(bytes)]() mutable {
      self->on_enqueue(std::move(bytes));
    });
  }

  void on_enqueue(std::vector<std::uint8_t> bytes) {
    if (closing_) return;
    if (queue_.size() >= queue_limit_) {
      // The front element may be mid-write; keep it alive.
      while (queue_.size() > 1) queue_.pop_back();
      do_close(websocket::close_code::try_again_later);
      return;
    }
    queue_.push_back(std::move(bytes));
    if (queue_.size() == 1) do_write();
  }

  void do_write() {
    ws_.async_write(net::buffer(queue_.front()),
                    beast::bind_front_handler(&WsConnection::on_write, shared_from_this()));
  }

  void on_write(beast::error_code ec, std::size_t) {
    if (ec) {
      queue_.clear();
      detach();
      return;
    }
    if (!queue_.empty()) queue_.pop_front();
    if (closing_) {
      queue_.clear();
      return;
    }
    if (!queue_.empty()) {
      do_write();
    } else if (close_after_flush_) {
      do_close(websocket::close_code::policy_error);
    }
  }

  void do_close(websocket::close_code code) {
    if (closing_) return;
    closing_ = true;
    detach();
    ws_.async_close(code, [self = shared_from_this()](beast::error_code) {});
  }

  void detach() {
    if (session_) session_->release_sink(id_);
  }

  websocket::stream<beast::tcp_stream> ws_;
  SessionRegistry& registry_;
  std::size_t queue_limit_;
  std::uint64_t id_ = g_connection_ids.fetch_add(1);
  beast::flat_buffer buffer_;
  std::shared_ptr<pipeline::Session> session_;
  std::deque<std::vector<std::uint8_t>> queue_;
  bool closing_ = false;
  bool close_after_flush_ = false;
};

class HttpConnection : public std::enable_shared_from_this<HttpConnection> {
 public:
  HttpConnection(tcp::socket&& socket, SessionRegistry& registry, const pipeline::ServerConfig& config)
      : stream_(std::move(socket)), registry_(registry), config_(config) {}

  void run() {
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buffer_, request_,
                     beast::bind_front_handler(&HttpConnection::on_read, shared_from_this()));
  }

 private:
  void on_read(beast::error_code ec, std::size_t) {
    if (ec) return;
    if (websocket::is_upgrade(request_)) {
      if (request_.target() == "/ws") {
        stream_.expires_never();
        std::make_shared<WsConnection>(stream_.release_socket(), registry_, config_.write_queue_limit)
            ->run(std::move(request_));
        return;
      }
      respond(http::status::not_found, "text/plain", "websocket endpoint is /ws\n");
      return;
    }
    if (request_.method() != http::verb::get && request_.method() != http::verb::head) {
      respond(http::status::method_not_allowed, "text/plain", "GET only\n");
      return;
    }
    serve_static(std::string(request_.target()));
  }

  void serve_static(std::string target) {
    if (auto q = target.find('?'); q != std::string::npos) target.resize(q);
    if (target == "/healthz") {
      respond(http::status::ok, "text/plain", "ok\n");
      return;
    }
    if (target.empty() || target[0] != '/' || target.find("..") != std::string::npos) {
      respond(http::status::bad_request, "text/plain", "bad path\n");
      return;
    }
    if (config_.web_root.empty()) {
      if (target == "/" || target == "/index.html") {
        respond(http::status::ok, "text/html; charset=utf-8", std::string(kLandingPage));
      } else {
        respond(http::status::not_found, "text/plain", "not found\n");
      }
      return;
    }
    std::filesystem::path path = config_.web_root / target.substr(1);
    if (target.back() == '/') path /= "index.html";
    std::ifstream in(path, std::ios::binary);
    if (!in) {
      respond(http::status::not_found, "text/plain", "not found\n");
      return;
    }
    std::ostringstream body;
    body << in.rdbuf();
    respond(http::status::ok, mime_type(path), body.str());
  }

  void respond(http::status status, std::string_view content_type, std::string body) {
    auto res = std::make_shared<http::response<http::string_body>>(status, request_.version());
    res->set(http::field::server, "facechat");
    res->set(http::field::content_type, std::string(content_type));
    res->keep_alive(false);
    if (request_.method() != http::verb::head) res->body() = std::move(body);
    res->prepare_payload();
    http::async_write(stream_, *res, [self = shared_from_this(), res](beast::error_code, std::size_t) {
      beast::error_code ignored;
      self->stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
    });
  }

  beast::tcp_stream stream_;
  SessionRegistry& registry_;
  const pipeline::ServerConfig& config_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> request_;
};

}  // namespace

struct Server::Impl {
  net::io_context ioc;
  tcp::acceptor acceptor{ioc};
  std::vector<std::thread> threads;
  std::mutex stop_mutex;
  std::condition_variable stop_cv;
  bool stopped = false;

  void do_accept(SessionRegistry& registry, const pipeline::ServerConfig& config) {
    acceptor.async_accept(net::make_strand(ioc), [this, &registry, &config](beast::error_code ec,
                                                                           tcp::socket socket) {
      if (ec) {
        if (ec == net::error::operation_aborted) return;
      } else {
        std::make_shared<HttpConnection>(std::move(socket), registry, config)->run();
      }
      do_accept(registry, config);
    });
  }
};

Server::Server(pipeline::AppConfig config, std::shared_ptr<adapters::Clock> clock)
    : config_(std::move(config)),
      clock_(clock ? std::move(clock) : adapters::SteadyClock::shared()),
      registry_([this](const transport::SessionId& id) {
        std::filesystem::path log_path;
        if (!config_.server.log_dir.empty()) {
          log_path = config_.server.log_dir / (transport::session_id_hex(id) + ".jsonl");
        }
        return std::make_shared<pipeline::Session>(
            id, config_.session, adapters::make_adapters(config_.session.adapters, clock_), clock_,
            pipeline::Session::PacketSink{}, log_path);
      }),
      impl_(std::make_unique<Impl>()) {
  config_.session.validate();
}

Server::~Server() { stop(); }

std::uint16_t Server::start(std::size_t threads) {
  const auto address = net::ip::make_address(config_.server.bind_address);
  tcp::endpoint endpoint(address, config_.server.port);
  impl_->acceptor.open(endpoint.protocol());
  impl_->acceptor.set_option(net::socket_base::reuse_address(true));
  impl_->acceptor.bind(endpoint);
  impl_->acceptor.listen(net::socket_base::max_listen_connections);
  port_ = impl_->acceptor.local_endpoint().port();
  impl_->do_accept(registry_, config_.server);
  for (std::size_t i = 0; i < std::max<std::size_t>(1, threads); ++i) {
    impl_->threads.emplace_back([this] { impl_->ioc.run(); });
  }
  return port_;
}

void Server::wait() {
  std::unique_lock lock(impl_->stop_mutex);
  impl_->stop_cv.wait(lock, [this] { return impl_->stopped; });
}

void Server::stop() {
  {
    std::lock_guard lock(impl_->stop_mutex);
    if (impl_->stopped) return;
    impl_->stopped = true;
  }
  impl_->stop_cv.notify_all();
  beast::error_code ignored;
  impl_->acceptor.close(ignored);
  registry_.close_all();
  impl_->ioc.stop();
  for (auto& t : impl_->threads) {
    if (t.joinable()) t.join();
  }
}

}  // namespace facechat::server
