#include "coldfaas/json.hpp"

#include "coldfaas/error.hpp"

namespace coldfaas {

using nlohmann::json;

void to_json(json& j, const FunctionSpec& spec) {
  j = json{{"name", spec.name},
           {"driver", to_string(spec.driver)},
           {"image_ref", spec.image_ref},
           {"timeout_ms", spec.timeout_ms},
           {"memory_mb", spec.memory_mb}};
  if (spec.profile_name) j["profile_name"] = *spec.profile_name;
}

void from_json(const json& j, FunctionSpec& spec) {
  if (!j.is_object()) throw Error(ErrorCode::invalid_spec, "function spec must be a JSON object");
  spec = FunctionSpec{};
  try {
    spec.name = j.at("name").get<std::string>();
    auto driver_text = j.value("driver", std::string("process"));
    auto driver = parse_driver_kind(driver_text);
    if (!driver) throw Error(ErrorCode::invalid_spec, "unknown driver '" + driver_text + "'");
    spec.driver = *driver;
    spec.image_ref = j.value("image_ref", spec.name);
    if (spec.image_ref.empty()) spec.image_ref = spec.name;
    spec.timeout_ms = j.value("timeout_ms", kDefaultTimeoutMs);
    spec.memory_mb = j.value("memory_mb", kDefaultMemoryMb);
    if (auto it = j.find("profile_name"); it != j.end() && !it->is_null()) {
      spec.profile_name = it->get<std::string>();
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::invalid_spec, e.what());
  }
}

void to_json(json& j, const InvocationRecord& r) {
  j = json{{"request_id", r.request_id},
           {"function", r.function},
           {"arrival_ns", r.arrival.ns},
           {"queue_wait_ns", r.queue_wait_ns},
           {"startup_ns", r.startup_ns},
           {"execution_ns", r.execution_ns},
           {"total_ns", r.total_ns},
           {"outcome", to_string(r.outcome)},
           {"lane", r.lane}};
  if (r.connection_setup_ns) j["connection_setup_ns"] = *r.connection_setup_ns;
  if (r.warm) j["warm"] = *r.warm;
}

void from_json(const json& j, InvocationRecord& r) {
  r = InvocationRecord{};
  r.request_id = j.value("request_id", std::string());
  r.function = j.value("function", std::string());
  r.arrival.ns = j.value("arrival_ns", std::int64_t{0});
  r.queue_wait_ns = j.value("queue_wait_ns", std::int64_t{0});
  r.startup_ns = j.value("startup_ns", std::int64_t{0});
  r.execution_ns = j.value("execution_ns", std::int64_t{0});
  r.total_ns = j.value("total_ns", std::int64_t{0});
  r.lane = j.value("lane", 0);
  auto outcome_text = j.value("outcome", std::string("ok"));
  auto outcome = parse_outcome(outcome_text);
  if (!outcome) throw Error(ErrorCode::invalid_argument, "unknown outcome '" + outcome_text + "'");
  r.outcome = *outcome;
  if (auto it = j.find("connection_setup_ns"); it != j.end() && !it->is_null()) {
    r.connection_setup_ns = it->get<std::int64_t>();
  }
  if (auto it = j.find("warm"); it != j.end() && !it->is_null()) r.warm = it->get<bool>();
}

void to_json(json& j, const RuntimeProfile& p) {
  j = json{{"name", p.name},
           {"median_ms", p.median_ms},
           {"p99_ms", p.p99_ms},
           {"cores", p.cores},
           {"contention_exponent", p.contention_exponent},
           {"fixed_overhead_ms", p.fixed_overhead_ms},
           {"source", p.source}};
}

void from_json(const json& j, RuntimeProfile& p) {
  p = RuntimeProfile{};
  try {
    p.name = j.at("name").get<std::string>();
    p.median_ms = j.at("median_ms").get<double>();
    p.p99_ms = j.at("p99_ms").get<double>();
    p.cores = j.value("cores", 24);
    p.contention_exponent = j.value("contention_exponent", 1.0);
    p.fixed_overhead_ms = j.value("fixed_overhead_ms", 0.0);
    p.source = j.value("source", std::string());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::invalid_profile, e.what());
  }
}

}  // namespace coldfaas
