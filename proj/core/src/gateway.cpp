#define CPPHTTPLIB_LISTEN_BACKLOG 1024
#define CPPHTTPLIB_TCP_NODELAY true
#include <httplib.h>

#include "coldfaas/gateway.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <mutex>
#include <thread>

#include <nlohmann/json.hpp>

#include "coldfaas/error.hpp"
#include "coldfaas/json.hpp"

namespace coldfaas {

using nlohmann::json;

ListenAddress parse_listen_address(std::string_view text) {
  auto colon = text.rfind(':');
  if (colon == std::string_view::npos || colon + 1 == text.size()) {
    throw Error(ErrorCode::invalid_argument, "listen address must be host:port, got '" + std::string(text) + "'");
  }
  ListenAddress addr;
  addr.host = std::string(text.substr(0, colon));
  if (addr.host.size() >= 2 && addr.host.front() == '[' && addr.host.back() == ']') {
    addr.host = addr.host.substr(1, addr.host.size() - 2);
  }
  if (addr.host.empty()) addr.host = "0.0.0.0";
  auto port_text = text.substr(colon + 1);
  auto [ptr, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), addr.port);
  if (ec != std::errc{} || ptr != port_text.data() + port_text.size() || addr.port < 0 || addr.port > 65535) {
    throw Error(ErrorCode::invalid_argument, "bad port in listen address '" + std::string(text) + "'");
  }
  return addr;
}

namespace {

int status_for(Outcome outcome) {
  switch (outcome) {
    case Outcome::ok: return 200;
    case Outcome::not_found:
    case Outcome::image_missing: return 404;
    case Outcome::timeout: return 408;
    case Outcome::payload_too_large: return 413;
    case Outcome::rejected: return 429;
    case Outcome::function_error:
    case Outcome::spawn_failure:
    case Outcome::transport_error: return 500;
  }
  return 500;
}

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_spec:
    case ErrorCode::invalid_profile:
    case ErrorCode::invalid_argument: return 400;
    case ErrorCode::not_found: return 404;
    case ErrorCode::already_exists: return 409;
    default: return 500;
  }
}

void send_error(httplib::Response& res, int status, std::string_view code, std::string_view detail) {
  res.status = status;
  res.set_content(json{{"error", code}, {"detail", detail}}.dump(), "application/json");
}

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void set_timing_headers(httplib::Response& res, const DispatchResult& result) {
  const auto& r = result.record;
  res.set_header("X-Request-Id", r.request_id);
  res.set_header("X-Outcome", std::string(to_string(r.outcome)));
  res.set_header("X-Queue-Wait-Ns", std::to_string(r.queue_wait_ns));
  res.set_header("X-Startup-Ns", std::to_string(r.startup_ns));
  res.set_header("X-Execution-Ns", std::to_string(r.execution_ns));
  res.set_header("X-Total-Ns", std::to_string(r.total_ns));
  if (r.warm) res.set_header("X-Warm", *r.warm ? "true" : "false");
}

}  // namespace

struct Gateway::Impl {
  Impl(GatewayConfig c, Platform& p) : config(std::move(c)), platform(p) {}

  GatewayConfig config;
  Platform& platform;
  httplib::Server server;
  std::thread thread;
  int bound_port = 0;
  std::string host;

  mutable std::mutex stats_mu;
  GatewayStats stats;

  struct InFlight {
    Impl& impl;
    explicit InFlight(Impl& i) : impl(i) {
      std::lock_guard lock(impl.stats_mu);
      ++impl.stats.in_flight;
      impl.stats.max_in_flight = std::max(impl.stats.max_in_flight, impl.stats.in_flight);
    }
    ~InFlight() {
      std::lock_guard lock(impl.stats_mu);
      --impl.stats.in_flight;
    }
  };

  void install_routes();
  void handle_invoke(const httplib::Request& req, httplib::Response& res);
  void handle_noop(httplib::Response& res);
  void handle_deploy(const httplib::Request& req, httplib::Response& res);
  int bind();
};

void Gateway::Impl::handle_invoke(const httplib::Request& req, httplib::Response& res) {
  const ClockReading arrival = platform.clock().now();
  InFlight guard(*this);
  const auto& name = req.path_params.at("name");
  if (req.body.size() > config.max_body_bytes) {
    send_error(res, 413, "payload_too_large",
               "body of " + std::to_string(req.body.size()) + " bytes exceeds " + std::to_string(config.max_body_bytes));
    return;
  }
  DispatchResult result = platform.dispatcher().dispatch(name, req.body, arrival);
  set_timing_headers(res, result);
  if (result.record.outcome == Outcome::ok) {
    res.status = 200;
    res.set_content(std::move(result.output), "application/octet-stream");
    return;
  }
  send_error(res, status_for(result.record.outcome), to_string(result.record.outcome), result.detail);
}

void Gateway::Impl::handle_noop(httplib::Response& res) {
  const ClockReading arrival = platform.clock().now();
  InFlight guard(*this);
  DispatchResult result = platform.dispatcher().dispatch_noop(arrival);
  set_timing_headers(res, result);
  if (result.record.outcome != Outcome::ok) {
    send_error(res, status_for(result.record.outcome), to_string(result.record.outcome), result.detail);
    return;
  }
  res.status = 200;
  res.set_content("", "text/plain");
}

void Gateway::Impl::handle_deploy(const httplib::Request& req, httplib::Response& res) {
  InFlight guard(*this);
  const bool overwrite = req.has_param("overwrite") && req.get_param_value("overwrite") == "true";
  std::string spec_text;
  std::optional<std::string> image;
  if (req.is_multipart_form_data()) {
    if (!req.has_file("spec")) {
      send_error(res, 400, "invalid_spec", "multipart body needs a 'spec' part");
      return;
    }
    spec_text = req.get_file_value("spec").content;
    if (req.has_file("image")) image = req.get_file_value("image").content;
  } else {
    spec_text = req.body;
  }
  try {
    auto doc = json::parse(spec_text, nullptr, false);
    if (doc.is_discarded()) throw Error(ErrorCode::invalid_spec, "spec is not valid JSON");
    auto spec = doc.get<FunctionSpec>();
    auto entry = image ? platform.deploy(spec, std::string_view(*image), overwrite)
                       : platform.deploy(spec, std::nullopt, overwrite);
    json body{{"name", entry.spec.name}, {"version", entry.version}, {"spec", entry.spec}};
    if (entry.image) {
      body["checksum"] = entry.image->checksum;
      body["digest_algorithm"] = entry.digest_algorithm;
      body["size_bytes"] = entry.image->size_bytes;
    }
    send_json(res, 201, body);
  } catch (const Error& e) {
    send_error(res, status_for(e.code()), to_string(e.code()), e.detail());
  }
}

void Gateway::Impl::install_routes() {
  server.Post("/invoke/:name", [this](const httplib::Request& req, httplib::Response& res) { handle_invoke(req, res); });
  server.Get("/noop", [this](const httplib::Request&, httplib::Response& res) { handle_noop(res); });
  server.Post("/deploy", [this](const httplib::Request& req, httplib::Response& res) { handle_deploy(req, res); });

  server.Get("/waste", [this](const httplib::Request&, httplib::Response& res) {
    auto ledger = platform.warm_pool().ledger();
    send_json(res, 200,
              json{{"idle_executor_seconds", ledger.idle_executor_seconds},
                   {"reserved_memory_mb_seconds", ledger.reserved_memory_mb_seconds},
                   {"cold_starts", ledger.cold_starts},
                   {"warm_hits", ledger.warm_hits},
                   {"reaped", ledger.reaped},
                   {"live_warm_executors", platform.warm_pool().live_executor_count()},
                   {"live_cold_executors", platform.live_cold_executors()}});
  });

  server.Get("/stats", [this](const httplib::Request&, httplib::Response& res) {
    auto s = platform.dispatcher().stats_snapshot();
    GatewayStats g;
    {
      std::lock_guard lock(stats_mu);
      g = stats;
    }
    json outcomes = json::object();
    for (int i = 0; i < kOutcomeCount; ++i) {
      outcomes[std::string(to_string(static_cast<Outcome>(i)))] = s.outcomes[static_cast<std::size_t>(i)];
    }
    send_json(res, 200,
              json{{"arrivals", s.arrivals},
                   {"in_flight", s.in_flight},
                   {"queued", s.queued},
                   {"completed", s.completed},
                   {"max_in_flight", s.max_in_flight},
                   {"outcomes", outcomes},
                   {"gateway_in_flight", g.in_flight},
                   {"gateway_max_in_flight", g.max_in_flight},
                   {"workers", platform.dispatcher().config().workers}});
  });

  server.Get("/functions", [this](const httplib::Request&, httplib::Response& res) {
    json items = json::array();
    for (const auto& name : platform.registry().names()) {
      auto entry = platform.registry().find(name);
      if (!entry) continue;
      json item{{"spec", entry->spec}, {"version", entry->version}};
      if (entry->image) item["size_bytes"] = entry->image->size_bytes;
      items.push_back(std::move(item));
    }
    send_json(res, 200, items);
  });

  server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (!res.body.empty()) return;
    std::string code = res.status == 413 ? "payload_too_large" : res.status == 404 ? "not_found" : "http_error";
    send_error(res, res.status, code, httplib::status_message(res.status));
  });
  server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    std::string detail = "unknown error";
    try {
      if (ep) std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      detail = e.what();
    } catch (...) {
    }
    send_error(res, 500, "internal", detail);
  });
}

int Gateway::Impl::bind() {
  auto addr = parse_listen_address(config.listen_address);
  host = addr.host;
  const int threads = std::max(4, config.http_threads);
  server.new_task_queue = [threads] { return new httplib::ThreadPool(static_cast<std::size_t>(threads)); };
  server.set_tcp_nodelay(true);
  server.set_keep_alive_max_count(config.keep_alive ? 1'000'000 : 1);
  server.set_keep_alive_timeout(60);
  server.set_payload_max_length(std::max(config.max_body_bytes, config.max_deploy_bytes));
  install_routes();
  if (addr.port == 0) {
    bound_port = server.bind_to_any_port(addr.host);
    if (bound_port <= 0) throw Error(ErrorCode::io_error, "cannot bind " + config.listen_address);
  } else {
    if (!server.bind_to_port(addr.host, addr.port)) throw Error(ErrorCode::io_error, "cannot bind " + config.listen_address);
    bound_port = addr.port;
  }
  return bound_port;
}

Gateway::Gateway(GatewayConfig config, Platform& platform) : impl_(std::make_unique<Impl>(std::move(config), platform)) {}

Gateway::~Gateway() { stop(); }

int Gateway::start() {
  int port = impl_->bind();
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return port;
}

void Gateway::serve_forever() {
  impl_->bind();
  impl_->server.listen_after_bind();
}

void Gateway::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

int Gateway::port() const { return impl_->bound_port; }

std::string Gateway::base_url() const {
  std::string host = impl_->host == "0.0.0.0" ? "127.0.0.1" : impl_->host;
  return "http://" + host + ":" + std::to_string(impl_->bound_port);
}

GatewayStats Gateway::stats() const {
  std::lock_guard lock(impl_->stats_mu);
  return impl_->stats;
}

}  // namespace coldfaas
