#include "net.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "rvm/farm/farm.hpp"

namespace rvm::farm::net {

Address parse_address(const std::string& text) {
  auto colon = text.rfind(':');
  if (colon == std::string::npos || colon == 0) throw Error("address must be host:port: " + text);
  Address a;
  a.host = text.substr(0, colon);
  try {
    std::size_t used = 0;
    unsigned long port = std::stoul(text.substr(colon + 1), &used);
    if (used != text.size() - colon - 1 || port > 65535) throw std::invalid_argument("port");
    a.port = static_cast<std::uint16_t>(port);
  } catch (const std::logic_error&) {
    throw Error("bad port in address " + text);
  }
  return a;
}

namespace {

addrinfo* resolve(const Address& addr, bool passive) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  if (passive) hints.ai_flags = AI_PASSIVE;
  addrinfo* res = nullptr;
  int rc = getaddrinfo(addr.host.c_str(), std::to_string(addr.port).c_str(), &hints, &res);
  if (rc != 0) throw PeerUnreachable("cannot resolve " + addr.host + ": " + gai_strerror(rc));
  return res;
}

}  // namespace

int listen_on(const Address& addr, std::uint16_t& bound) {
  addrinfo* res = resolve(addr, true);
  int fd = socket(res->ai_family, res->ai_socktype, 0);
  if (fd < 0) {
    freeaddrinfo(res);
    throw Error(std::string("socket: ") + std::strerror(errno));
  }
  int one = 1;
  setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  if (bind(fd, res->ai_addr, res->ai_addrlen) != 0 || listen(fd, 16) != 0) {
    std::string why = std::strerror(errno);
    freeaddrinfo(res);
    close(fd);
    throw Error("cannot listen on " + addr.str() + ": " + why);
  }
  freeaddrinfo(res);
  sockaddr_in sa{};
  socklen_t len = sizeof sa;
  getsockname(fd, reinterpret_cast<sockaddr*>(&sa), &len);
  bound = ntohs(sa.sin_port);
  return fd;
}

int connect_to(const Address& addr, std::chrono::milliseconds timeout) {
  addrinfo* res = resolve(addr, false);
  int fd = socket(res->ai_family, res->ai_socktype, 0);
  if (fd < 0) {
    freeaddrinfo(res);
    throw PeerUnreachable(std::string("socket: ") + std::strerror(errno));
  }
  int flags = fcntl(fd, F_GETFL, 0);
  fcntl(fd, F_SETFL, flags | O_NONBLOCK);
  int rc = connect(fd, res->ai_addr, res->ai_addrlen);
  freeaddrinfo(res);
  if (rc != 0 && errno != EINPROGRESS) {
    std::string why = std::strerror(errno);
    close(fd);
    throw PeerUnreachable("cannot connect to " + addr.str() + ": " + why);
  }
  if (rc != 0) {
    pollfd p{fd, POLLOUT, 0};
    int err = 0;
    socklen_t len = sizeof err;
    if (::poll(&p, 1, static_cast<int>(timeout.count())) != 1 ||
        getsockopt(fd, SOL_SOCKET, SO_ERROR, &err, &len) != 0 || err != 0) {
      close(fd);
      throw PeerUnreachable("cannot connect to " + addr.str() + (err ? std::string(": ") + std::strerror(err) : ""));
    }
  }
  fcntl(fd, F_SETFL, flags);
  return fd;
}

void send_all(int fd, std::string_view data) {
  while (!data.empty()) {
    ssize_t n = ::send(fd, data.data(), data.size(), MSG_NOSIGNAL);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) throw PeerUnreachable(std::string("send failed: ") + std::strerror(errno));
    data.remove_prefix(static_cast<std::size_t>(n));
  }
}

std::optional<std::string> LineReader::next(std::chrono::milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  for (;;) {
    auto nl = buf_.find('\n');
    if (nl != std::string::npos) {
      std::string line = buf_.substr(0, nl);
      buf_.erase(0, nl + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      return line;
    }
    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) return std::nullopt;
    pollfd p{fd_, POLLIN, 0};
    int rc = ::poll(&p, 1, static_cast<int>(left.count()));
    if (rc < 0 && errno == EINTR) continue;
    if (rc <= 0) return std::nullopt;
    char chunk[4096];
    ssize_t n = ::recv(fd_, chunk, sizeof chunk, 0);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return std::nullopt;
    buf_.append(chunk, static_cast<std::size_t>(n));
  }
}

Socket::~Socket() {
  if (fd_ >= 0) close(fd_);
}

}  // namespace rvm::farm::net
