#include "coldfaas/platform.hpp"

#include "coldfaas/error.hpp"

namespace coldfaas {

namespace {

SimulatedDriverConfig simulated_config(const PlatformConfig& config) {
  SimulatedDriverConfig sim;
  sim.mode = config.simulation_mode;
  sim.seed = config.seed;
  sim.streams = config.dispatcher.workers;
  sim.execution_ms = config.simulated_execution_ms;
  return sim;
}

}  // namespace

Platform::Platform(PlatformConfig config, const Clock& clock)
    : config_(std::move(config)),
      clock_(clock),
      registry_(config_.registry_dir),
      process_(config_.process),
      simulated_(config_.profiles, simulated_config(config_)) {
  if (config_.warm_pool.inner_profile && !profiles().contains(*config_.warm_pool.inner_profile)) {
    throw Error(ErrorCode::invalid_profile, "warm pool inner profile '" + *config_.warm_pool.inner_profile + "' unknown");
  }
  Driver& inner = config_.warm_pool.inner_profile ? static_cast<Driver&>(simulated_) : static_cast<Driver&>(process_);
  warm_pool_ = std::make_unique<WarmPoolDriver>(config_.warm_pool, inner);
  if (config_.run_reaper) warm_pool_->start_reaper(clock_);
  dispatcher_ = std::make_unique<Dispatcher>(config_.dispatcher, registry_,
                                             DriverSet{&process_, &simulated_, warm_pool_.get()}, clock_);
}

Platform::~Platform() {
  dispatcher_.reset();
  if (warm_pool_) warm_pool_->stop_reaper();
}

RegistryEntry Platform::deploy(const FunctionSpec& spec, std::optional<std::string_view> image, bool overwrite) {
  if (spec.profile_name && !profiles().contains(*spec.profile_name)) {
    throw Error(ErrorCode::invalid_spec, "unknown runtime profile '" + *spec.profile_name + "'");
  }
  return registry_.put(spec, image, overwrite);
}

std::size_t Platform::live_cold_executors() const {
  return process_.live_executor_count() + simulated_.live_executor_count();
}

}  // namespace coldfaas
