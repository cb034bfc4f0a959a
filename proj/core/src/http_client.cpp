#include "http_client.hpp"

#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/time.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cstring>
#include <utility>

#include "coldfaas/clock.hpp"
#include "coldfaas/error.hpp"

namespace coldfaas::http {

namespace {

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

void set_timeouts(int fd, std::chrono::milliseconds timeout) {
  timeval tv{};
  tv.tv_sec = static_cast<time_t>(timeout.count() / 1000);
  tv.tv_usec = static_cast<suseconds_t>((timeout.count() % 1000) * 1000);
  ::setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
  ::setsockopt(fd, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof(tv));
}

}  // namespace

Target resolve_target(std::string_view url) {
  constexpr std::string_view kScheme = "http://";
  if (url.substr(0, kScheme.size()) != kScheme) {
    throw Error(ErrorCode::invalid_argument, "only http:// URLs are supported: " + std::string(url));
  }
  url.remove_prefix(kScheme.size());
  Target target;
  auto slash = url.find('/');
  std::string_view authority = url.substr(0, slash);
  target.path = slash == std::string_view::npos ? "/" : std::string(url.substr(slash));
  auto colon = authority.rfind(':');
  if (colon != std::string_view::npos) {
    target.host = std::string(authority.substr(0, colon));
    auto port_text = authority.substr(colon + 1);
    auto [_, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), target.port);
    if (ec != std::errc{} || target.port <= 0 || target.port > 65535) {
      throw Error(ErrorCode::invalid_argument, "bad port in URL");
    }
  } else {
    target.host = std::string(authority);
  }
  if (target.host.empty()) throw Error(ErrorCode::invalid_argument, "URL has no host");

  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  auto port = std::to_string(target.port);
  int rc = ::getaddrinfo(target.host.c_str(), port.c_str(), &hints, &res);
  if (rc != 0 || res == nullptr) {
    throw Error(ErrorCode::unreachable, "cannot resolve " + target.host + ": " + ::gai_strerror(rc));
  }
  std::memcpy(&target.addr, res->ai_addr, res->ai_addrlen);
  target.addr_len = static_cast<socklen_t>(res->ai_addrlen);
  ::freeaddrinfo(res);
  return target;
}

std::optional<std::int64_t> Response::header_int(const std::string& name) const {
  auto it = headers.find(name);
  if (it == headers.end()) return std::nullopt;
  std::int64_t v = 0;
  auto [_, ec] = std::from_chars(it->second.data(), it->second.data() + it->second.size(), v);
  if (ec != std::errc{}) return std::nullopt;
  return v;
}

Connection::~Connection() { close(); }

Connection::Connection(Connection&& other) noexcept
    : fd_(std::exchange(other.fd_, -1)), buffer_(std::move(other.buffer_)) {}

Connection& Connection::operator=(Connection&& other) noexcept {
  if (this != &other) {
    close();
    fd_ = std::exchange(other.fd_, -1);
    buffer_ = std::move(other.buffer_);
  }
  return *this;
}

void Connection::close() {
  if (fd_ >= 0) ::close(fd_);
  fd_ = -1;
  buffer_.clear();
}

bool Connection::open(const Target& target, std::chrono::milliseconds timeout, std::int64_t& connect_ns,
                      std::string& error) {
  close();
  const ClockReading start = SteadyClock::read();
  int fd = ::socket(target.addr.ss_family, SOCK_STREAM | SOCK_CLOEXEC, 0);
  if (fd < 0) {
    error = std::string("socket: ") + std::strerror(errno);
    return false;
  }
  set_timeouts(fd, timeout);
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  int rc;
  do {
    rc = ::connect(fd, reinterpret_cast<const sockaddr*>(&target.addr), target.addr_len);
  } while (rc != 0 && errno == EINTR);
  connect_ns = SteadyClock::read() - start;
  if (rc != 0) {
    error = std::string("connect: ") + std::strerror(errno);
    ::close(fd);
    return false;
  }
  fd_ = fd;
  return true;
}

bool Connection::exchange(const Target& target, std::string_view method, std::string_view body, bool keep_alive,
                          Response& response, std::string& error) {
  response = Response{};
  std::string request;
  request.reserve(256 + body.size());
  request.append(method).append(" ").append(target.path).append(" HTTP/1.1\r\nHost: ");
  request.append(target.host).append(":").append(std::to_string(target.port)).append("\r\n");
  request.append("Content-Length: ").append(std::to_string(body.size())).append("\r\n");
  if (!body.empty()) request.append("Content-Type: application/octet-stream\r\n");
  request.append(keep_alive ? "Connection: keep-alive\r\n\r\n" : "Connection: close\r\n\r\n");
  request.append(body);

  std::size_t sent = 0;
  while (sent < request.size()) {
    ssize_t n = ::send(fd_, request.data() + sent, request.size() - sent, MSG_NOSIGNAL);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) {
      error = std::string("send: ") + std::strerror(errno);
      close();
      return false;
    }
    sent += static_cast<std::size_t>(n);
  }

  char chunk[65536];
  auto fill = [&]() -> bool {
    for (;;) {
      ssize_t n = ::recv(fd_, chunk, sizeof(chunk), 0);
      if (n > 0) {
        buffer_.append(chunk, static_cast<std::size_t>(n));
        return true;
      }
      if (n < 0 && errno == EINTR) continue;
      error = n == 0 ? "connection closed by peer" : std::string("recv: ") + std::strerror(errno);
      return false;
    }
  };

  std::size_t header_end;
  while ((header_end = buffer_.find("\r\n\r\n")) == std::string::npos) {
    if (!fill()) {
      close();
      return false;
    }
  }

  std::string_view head(buffer_.data(), header_end);
  auto line_end = head.find("\r\n");
  std::string_view status_line = head.substr(0, line_end);
  auto sp = status_line.find(' ');
  if (sp == std::string_view::npos) {
    error = "malformed status line";
    close();
    return false;
  }
  std::from_chars(status_line.data() + sp + 1, status_line.data() + status_line.size(), response.status);
  std::string_view rest = line_end == std::string_view::npos ? std::string_view{} : head.substr(line_end + 2);
  while (!rest.empty()) {
    auto eol = rest.find("\r\n");
    std::string_view line = rest.substr(0, eol);
    rest = eol == std::string_view::npos ? std::string_view{} : rest.substr(eol + 2);
    auto colon = line.find(':');
    if (colon == std::string_view::npos) continue;
    response.headers[lowercase(trim(line.substr(0, colon)))] = std::string(trim(line.substr(colon + 1)));
  }
  if (auto it = response.headers.find("connection"); it != response.headers.end()) {
    response.server_keeps_alive = lowercase(it->second) != "close";
  }

  std::size_t body_len = 0;
  if (auto len = response.header_int("content-length")) {
    body_len = static_cast<std::size_t>(*len);
  } else if (response.headers.count("transfer-encoding")) {
    error = "chunked responses are not supported";
    close();
    return false;
  } else {
    response.server_keeps_alive = false;  // body runs to EOF
    buffer_.erase(0, header_end + 4);
    while (fill()) {
    }
    response.body = std::move(buffer_);
    close();
    return true;
  }

  const std::size_t body_start = header_end + 4;
  while (buffer_.size() < body_start + body_len) {
    if (!fill()) {
      close();
      return false;
    }
  }
  response.body = buffer_.substr(body_start, body_len);
  buffer_.erase(0, body_start + body_len);
  if (!keep_alive || !response.server_keeps_alive) close();
  return true;
}

}  // namespace coldfaas::http
