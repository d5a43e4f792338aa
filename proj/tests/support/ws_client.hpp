#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <vector>

#include <boost/asio/connect.hpp>
#include <boost/asio/io_context.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <nlohmann/json.hpp>

#include "facechat/transport/media.hpp"
#include "facechat/transport/packet.hpp"

namespace facechat::testing {

// Single-threaded test client; every read is bounded by a deadline.
class WsClient {
 public:
  explicit WsClient(std::uint16_t port, std::string target = "/ws") : ws_(ioc_) {
    namespace net = boost::asio;
    net::ip::tcp::resolver resolver(ioc_);
    net::connect(ws_.next_layer(), resolver.resolve("127.0.0.1", std::to_string(port)));
    ws_.handshake("127.0.0.1:" + std::to_string(port), target);
    ws_.binary(true);
  }

  void send_raw(const std::vector<std::uint8_t>& bytes) { ws_.write(boost::asio::buffer(bytes)); }
  void send(const transport::Packet& p) { send_raw(transport::encode_packet(p)); }

  // nullopt on timeout or once the server has closed the connection.
  std::optional<transport::Packet> next(std::chrono::milliseconds timeout) {
    if (closed_) return std::nullopt;
    boost::beast::flat_buffer buf;
    bool done = false;
    boost::system::error_code ec;
    ws_.async_read(buf, [&](boost::system::error_code e, std::size_t) {
      ec = e;
      done = true;
    });
    ioc_.restart();
    ioc_.run_for(timeout);
    if (!done) {
      ws_.next_layer().cancel();
      ioc_.restart();
      ioc_.run();
      closed_ = true;
      return std::nullopt;
    }
    if (ec) {
      closed_ = true;
      if (ec == boost::beast::websocket::error::closed) close_code_ = ws_.reason().code;
      return std::nullopt;
    }
    const auto data = static_cast<const std::uint8_t*>(buf.data().data());
    return transport::decode_packet({data, buf.size()});
  }

  // Next server event (audio packets are counted and skipped).
  std::optional<nlohmann::json> next_event(std::chrono::milliseconds timeout) {
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    while (true) {
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
      if (left.count() <= 0) return std::nullopt;
      auto p = next(left);
      if (!p) return std::nullopt;
      if (p->kind == transport::PacketKind::ServerAudio) {
        ++audio_packets_;
        continue;
      }
      return transport::parse_json_payload(p->payload);
    }
  }

  // Skips events until one of the given type arrives.
  std::optional<nlohmann::json> wait_event(const std::string& type, std::chrono::milliseconds timeout,
                                           std::vector<nlohmann::json>* seen = nullptr) {
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    while (true) {
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
      auto e = next_event(left);
      if (!e) return std::nullopt;
      if (seen) seen->push_back(*e);
      if ((*e)["type"] == type) return e;
    }
  }

  void close() {
    if (closed_) return;
    boost::system::error_code ec;
    ws_.close(boost::beast::websocket::close_code::normal, ec);
    closed_ = true;
  }

  bool closed() const { return closed_; }
  std::optional<std::uint16_t> close_code() const { return close_code_; }
  std::size_t audio_packets() const { return audio_packets_; }

 private:
  boost::asio::io_context ioc_;
  boost::beast::websocket::stream<boost::asio::ip::tcp::socket> ws_;
  bool closed_ = false;
  std::optional<std::uint16_t> close_code_;
  std::size_t audio_packets_ = 0;
};

}  // namespace facechat::testing
