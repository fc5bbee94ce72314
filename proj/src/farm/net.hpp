#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace rvm::farm::net {

struct Address {
  std::string host;
  std::uint16_t port = 0;
  std::string str() const { return host + ":" + std::to_string(port); }
};

/// "host:port". Throws Error.
Address parse_address(const std::string& text);

/// Bound, listening socket; `bound` receives the actual port.
int listen_on(const Address& addr, std::uint16_t& bound);

/// Throws PeerUnreachable when no connection is made within `timeout`.
int connect_to(const Address& addr, std::chrono::milliseconds timeout);

/// Throws PeerUnreachable on a broken connection.
void send_all(int fd, std::string_view data);

/// Buffered line reader over a socket.
class LineReader {
 public:
  explicit LineReader(int fd) : fd_(fd) {}
  /// Next line without the newline; nullopt on EOF or timeout.
  std::optional<std::string> next(std::chrono::milliseconds timeout);

 private:
  int fd_;
  std::string buf_;
};

/// Closes on scope exit.
class Socket {
 public:
  explicit Socket(int fd) : fd_(fd) {}
  ~Socket();
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  int fd() const { return fd_; }

 private:
  int fd_;
};

}  // namespace rvm::farm::net
