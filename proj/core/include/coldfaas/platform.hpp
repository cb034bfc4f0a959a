#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string_view>

#include "coldfaas/clock.hpp"
#include "coldfaas/dispatcher.hpp"
#include "coldfaas/process_driver.hpp"
#include "coldfaas/profiles.hpp"
#include "coldfaas/registry.hpp"
#include "coldfaas/simulated_driver.hpp"
#include "coldfaas/warm_pool.hpp"

namespace coldfaas {

struct PlatformConfig {
  std::filesystem::path registry_dir = "registry";
  DispatcherConfig dispatcher;
  ProfileTable profiles = default_profiles();
  SimulationMode simulation_mode = SimulationMode::realtime;
  std::uint64_t seed = 1;
  double simulated_execution_ms = 0.0;
  ProcessDriverConfig process;
  WarmPoolConfig warm_pool;
  bool run_reaper = true;
};

// Registry, the three drivers and the dispatcher wired together on one host.
class Platform {
 public:
  explicit Platform(PlatformConfig config, const Clock& clock = SteadyClock::instance());
  ~Platform();

  Platform(const Platform&) = delete;
  Platform& operator=(const Platform&) = delete;

  // Checks the function profile against the profile table before storing it.
  // Throws Error{invalid_spec | already_exists | io_error}.
  RegistryEntry deploy(const FunctionSpec& spec, std::optional<std::string_view> image, bool overwrite = false);

  // Executors alive across the cold drivers (process + simulated).
  std::size_t live_cold_executors() const;

  Registry& registry() { return registry_; }
  Dispatcher& dispatcher() { return *dispatcher_; }
  ProcessDriver& process_driver() { return process_; }
  SimulatedDriver& simulated_driver() { return simulated_; }
  WarmPoolDriver& warm_pool() { return *warm_pool_; }
  const ProfileTable& profiles() const { return simulated_.profiles(); }
  const Clock& clock() const { return clock_; }
  const PlatformConfig& config() const { return config_; }

 private:
  PlatformConfig config_;
  const Clock& clock_;
  Registry registry_;
  ProcessDriver process_;
  SimulatedDriver simulated_;
  std::unique_ptr<WarmPoolDriver> warm_pool_;
  std::unique_ptr<Dispatcher> dispatcher_;
};

}  // namespace coldfaas
