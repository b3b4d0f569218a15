#pragma once

// Blocking loopback TCP sockets carrying length-prefixed frames.

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <optional>
#include <span>
#include <string>
#include <utility>

#include "bridgelab/wire.hpp"

namespace bridgelab {

class TransportError : public ProtocolError {
 public:
  using ProtocolError::ProtocolError;
};

class TimeoutError : public TransportError {
 public:
  using TransportError::TransportError;
};

namespace detail {

inline std::string errno_text(const char* what) { return std::string(what) + ": " + std::strerror(errno); }

}  // namespace detail

class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  Socket(Socket&& o) noexcept : fd_(std::exchange(o.fd_, -1)) {}
  Socket& operator=(Socket&& o) noexcept {
    if (this != &o) {
      close();
      fd_ = std::exchange(o.fd_, -1);
    }
    return *this;
  }
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  ~Socket() { close(); }

  int fd() const noexcept { return fd_; }
  bool valid() const noexcept { return fd_ >= 0; }

  void close() noexcept {
    if (fd_ >= 0) {
      ::close(fd_);
      fd_ = -1;
    }
  }

  // Wakes any thread blocked on this socket without releasing the descriptor.
  void shutdown() noexcept {
    if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
  }

  void write_all(std::string_view bytes) {
    while (!bytes.empty()) {
      const auto n = ::send(fd_, bytes.data(), bytes.size(), MSG_NOSIGNAL);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw TransportError(detail::errno_text("send"));
      }
      bytes.remove_prefix(static_cast<std::size_t>(n));
    }
  }

  // Waits until readable. Returns false on timeout.
  bool wait_readable(std::optional<std::chrono::milliseconds> timeout) const {
    pollfd p{fd_, POLLIN, 0};
    for (;;) {
      const int ms = timeout ? static_cast<int>(std::min<long long>(timeout->count(), 0x7fffffff)) : -1;
      const int r = ::poll(&p, 1, ms);
      if (r < 0 && errno == EINTR) continue;
      if (r < 0) throw TransportError(detail::errno_text("poll"));
      return r > 0;
    }
  }

  // Reads exactly n bytes. Returns false on EOF before the first byte.
  bool read_exact(char* out, std::size_t n) {
    std::size_t got = 0;
    while (got < n) {
      const auto r = ::recv(fd_, out + got, n - got, 0);
      if (r < 0) {
        if (errno == EINTR) continue;
        throw TransportError(detail::errno_text("recv"));
      }
      if (r == 0) {
        if (got == 0) return false;
        throw FrameError("connection closed mid-frame");
      }
      got += static_cast<std::size_t>(r);
    }
    return true;
  }

  void send_message(const BridgeMessage& m) { write_all(encode_frame(m)); }

  // Returns nullopt on clean EOF; throws TimeoutError if nothing arrives
  // within `timeout`.
  std::optional<BridgeMessage> receive_message(std::optional<std::chrono::milliseconds> timeout = std::nullopt) {
    if (timeout && !wait_readable(timeout)) throw TimeoutError("timed out waiting for peer");
    char prefix[4];
    if (!read_exact(prefix, 4)) return std::nullopt;
    const auto n = read_length_prefix(std::span<const std::uint8_t, 4>(reinterpret_cast<std::uint8_t*>(prefix), 4));
    if (n > kMaxFrameBody) throw FrameError("declared body length " + std::to_string(n) + " exceeds 16 MiB");
    std::string body(n, '\0');
    if (n > 0 && !read_exact(body.data(), n)) throw FrameError("connection closed mid-frame");
    return decode_body(body);
  }

 private:
  int fd_ = -1;
};

inline void set_nodelay(const Socket& s) {
  int one = 1;
  ::setsockopt(s.fd(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
}

inline Socket connect_tcp(const std::string& host, std::uint16_t port) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  const std::string h = host == "localhost" ? "127.0.0.1" : host;
  if (::inet_pton(AF_INET, h.c_str(), &addr.sin_addr) != 1) throw TransportError("bad IPv4 address '" + host + "'");
  Socket s(::socket(AF_INET, SOCK_STREAM, 0));
  if (!s.valid()) throw TransportError(detail::errno_text("socket"));
  if (::connect(s.fd(), reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
    throw TransportError(detail::errno_text(("connect " + host + ":" + std::to_string(port)).c_str()));
  }
  set_nodelay(s);
  return s;
}

// Listens on 127.0.0.1 only. Port 0 picks an ephemeral port.
class Listener {
 public:
  explicit Listener(std::uint16_t port) : sock_(::socket(AF_INET, SOCK_STREAM, 0)) {
    if (!sock_.valid()) throw TransportError(detail::errno_text("socket"));
    int one = 1;
    ::setsockopt(sock_.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    if (::bind(sock_.fd(), reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
      throw TransportError(detail::errno_text(("bind 127.0.0.1:" + std::to_string(port)).c_str()));
    }
    if (::listen(sock_.fd(), 8) != 0) throw TransportError(detail::errno_text("listen"));
    socklen_t len = sizeof addr;
    ::getsockname(sock_.fd(), reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
  }

  std::uint16_t port() const noexcept { return port_; }

  Socket accept(std::optional<std::chrono::milliseconds> timeout) {
    if (timeout && !sock_.wait_readable(timeout)) throw TimeoutError("no guest connected in time");
    Socket s(::accept(sock_.fd(), nullptr, nullptr));
    if (!s.valid()) throw TransportError(detail::errno_text("accept"));
    set_nodelay(s);
    return s;
  }

  void close() noexcept { sock_.close(); }

 private:
  Socket sock_;
  std::uint16_t port_ = 0;
};

}  // namespace bridgelab
