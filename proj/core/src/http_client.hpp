#pragma once

// Minimal blocking HTTP/1.1 client used by the load generator. It exists so
// connect() can be timed separately from the exchange, and so connection
// reuse is fully under the caller's control.

#include <sys/socket.h>

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace coldfaas::http {

struct Target {
  std::string host;
  int port = 80;
  std::string path = "/";
  sockaddr_storage addr{};
  socklen_t addr_len = 0;
};

// http://host[:port][/path]; resolves the host once. Throws Error{invalid_argument | unreachable}.
Target resolve_target(std::string_view url);

struct Response {
  int status = 0;
  std::map<std::string, std::string> headers;  // lowercase names
  std::string body;
  bool server_keeps_alive = true;

  std::optional<std::int64_t> header_int(const std::string& name) const;
};

class Connection {
 public:
  Connection() = default;
  ~Connection();
  Connection(Connection&& other) noexcept;
  Connection& operator=(Connection&& other) noexcept;
  Connection(const Connection&) = delete;
  Connection& operator=(const Connection&) = delete;

  // Returns false and fills `error` on failure. `connect_ns` receives the
  // duration of socket() + connect().
  bool open(const Target& target, std::chrono::milliseconds timeout, std::int64_t& connect_ns, std::string& error);

  bool exchange(const Target& target, std::string_view method, std::string_view body, bool keep_alive,
                Response& response, std::string& error);

  bool is_open() const { return fd_ >= 0; }
  void close();

 private:
  int fd_ = -1;
  std::string buffer_;  // bytes read past the previous response
};

}  // namespace coldfaas::http
