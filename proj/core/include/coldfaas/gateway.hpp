#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>

#include "coldfaas/platform.hpp"

namespace coldfaas {

struct ListenAddress {
  std::string host;
  int port = 0;
};

// "host:port"; throws Error{invalid_argument}.
ListenAddress parse_listen_address(std::string_view text);

struct GatewayConfig {
  std::string listen_address = "127.0.0.1:8080";
  std::size_t max_body_bytes = kDefaultMaxPayloadBytes;
  std::size_t max_deploy_bytes = 256u << 20;
  bool keep_alive = true;
  int http_threads = 96;  // connection handlers; must exceed the highest parallelism served
};

struct GatewayStats {
  std::uint64_t in_flight = 0;
  std::uint64_t max_in_flight = 0;
};

// HTTP/1.1 front door:
//   POST /invoke/{name}   body = payload; 200 + output, timing in X-*-Ns headers
//   GET  /noop            queue + worker round trip without a driver
//   POST /deploy          multipart {spec, image} or a JSON spec; ?overwrite=true
//   GET  /waste           warm-pool waste ledger
//   GET  /stats           dispatcher and gateway counters
//   GET  /functions       deployed functions with image sizes
// Errors are JSON {"error": <code>, "detail": <text>}.
class Gateway {
 public:
  Gateway(GatewayConfig config, Platform& platform);
  ~Gateway();

  Gateway(const Gateway&) = delete;
  Gateway& operator=(const Gateway&) = delete;

  // Binds (port 0 picks a free one) and serves on a background thread.
  // Returns the bound port. Throws Error{io_error}.
  int start();

  // Binds and serves on the calling thread until stop().
  void serve_forever();

  void stop();
  int port() const;
  std::string base_url() const;
  GatewayStats stats() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace coldfaas
