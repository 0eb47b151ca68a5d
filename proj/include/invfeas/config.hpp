#ifndef INVFEAS_CONFIG_HPP
#define INVFEAS_CONFIG_HPP

#include <stdexcept>
#include <string>
#include <vector>

#include "invfeas/simulator.hpp"
#include "invfeas/types.hpp"

namespace invfeas {

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

QuantityPair parse_pair(const std::string& name);      // "pq" | "pv2" | "qv2"
std::string pair_name(QuantityPair pair);
ControllerKind parse_controller(const std::string& name);

/// Full run configuration. Defaults carry the reference circuit, droop and OC
/// parameters plus the stock scenarios, so a missing or minimal config
/// file still produces runnable simulations.
struct ConfigFile {
  InverterParams inverter;
  DroopParams droop;
  OcParams oc;
  SimConfig sim;
  std::vector<Scenario> scenarios;

  static ConfigFile defaults();

  /// Strict JSON parse: unknown keys are rejected, every value type-checked.
  /// Missing sections fall back to defaults. Throws ConfigError.
  static ConfigFile load(const std::string& path);
  static ConfigFile from_json_text(const std::string& text);
  std::string to_json_text() const;

  const Scenario* find_scenario(const std::string& name) const;
};

}  // namespace invfeas

#endif
