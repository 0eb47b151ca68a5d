#include "invfeas/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace invfeas {

using nlohmann::json;

QuantityPair parse_pair(const std::string& name) {
  if (name == "pq") return {OutputQuantity::ActivePower, OutputQuantity::ReactivePower};
  if (name == "pv2") return {OutputQuantity::ActivePower, OutputQuantity::SquaredVoltage};
  if (name == "qv2") return {OutputQuantity::ReactivePower, OutputQuantity::SquaredVoltage};
  throw ConfigError("unknown quantity pair '" + name + "' (expected pq, pv2 or qv2)");
}

std::string pair_name(QuantityPair pair) {
  if (pair.first == OutputQuantity::ActivePower && pair.second == OutputQuantity::ReactivePower)
    return "pq";
  if (pair.first == OutputQuantity::ActivePower && pair.second == OutputQuantity::SquaredVoltage)
    return "pv2";
  if (pair.first == OutputQuantity::ReactivePower && pair.second == OutputQuantity::SquaredVoltage)
    return "qv2";
  throw ConfigError("unsupported quantity pair ordering");
}

ControllerKind parse_controller(const std::string& name) {
  if (name == "oc") return ControllerKind::Oc;
  if (name == "droop_pq") return ControllerKind::DroopPQ;
  if (name == "droop_pv2") return ControllerKind::DroopPV2;
  throw ConfigError("unknown controller '" + name + "' (expected oc, droop_pq or droop_pv2)");
}

namespace {

void reject_unknown(const json& obj, const std::string& where,
                    const std::set<std::string>& allowed) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (!allowed.count(key))
      throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

double get_number(const json& obj, const std::string& where, const std::string& key,
                  double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number())
    throw ConfigError("key '" + key + "' in " + where + " must be a number");
  return obj[key].get<double>();
}

}  // namespace

ConfigFile ConfigFile::defaults() {
  ConfigFile cfg;
  const double vsq_nom = cfg.inverter.e_mag * cfg.inverter.e_mag;
  cfg.scenarios = {
      {"oc_pq", ControllerKind::Oc, parse_pair("pq"), {800.0, 0.0}, {1100.0, 0.0}, false},
      {"oc_pv2", ControllerKind::Oc, parse_pair("pv2"), {200.0, vsq_nom}, {850.0, vsq_nom}, false},
      {"oc_qv2", ControllerKind::Oc, parse_pair("qv2"), {0.0, vsq_nom}, {-500.0, vsq_nom}, false},
      {"droop_pq", ControllerKind::DroopPQ, parse_pair("pq"), {800.0, 0.0}, {1100.0, 0.0}, false},
      {"droop_pv2", ControllerKind::DroopPV2, parse_pair("pv2"), {200.0, vsq_nom},
       {850.0, vsq_nom}, false},
  };
  return cfg;
}

ConfigFile ConfigFile::from_json_text(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& err) {
    throw ConfigError(std::string("config parse failure: ") + err.what());
  }
  if (!root.is_object()) throw ConfigError("config root must be an object");
  reject_unknown(root, "config root", {"inverter", "droop", "oc", "sim", "scenarios"});

  ConfigFile cfg = defaults();

  if (root.contains("inverter")) {
    const json& j = root["inverter"];
    reject_unknown(j, "inverter", {"r", "l", "omega", "e_mag", "i_max"});
    cfg.inverter.r = get_number(j, "inverter", "r", cfg.inverter.r);
    cfg.inverter.l = get_number(j, "inverter", "l", cfg.inverter.l);
    cfg.inverter.omega = get_number(j, "inverter", "omega", cfg.inverter.omega);
    cfg.inverter.e_mag = get_number(j, "inverter", "e_mag", cfg.inverter.e_mag);
    cfg.inverter.i_max = get_number(j, "inverter", "i_max", cfg.inverter.i_max);
  }
  if (root.contains("droop")) {
    const json& j = root["droop"];
    reject_unknown(j, "droop", {"m_p", "m_q", "m_v2", "omega_c"});
    cfg.droop.m_p = get_number(j, "droop", "m_p", cfg.droop.m_p);
    cfg.droop.m_q = get_number(j, "droop", "m_q", cfg.droop.m_q);
    cfg.droop.m_v2 = get_number(j, "droop", "m_v2", cfg.droop.m_v2);
    cfg.droop.omega_c = get_number(j, "droop", "omega_c", cfg.droop.omega_c);
  }
  if (root.contains("oc")) {
    const json& j = root["oc"];
    reject_unknown(j, "oc", {"k_v"});
    cfg.oc.k_v = get_number(j, "oc", "k_v", cfg.oc.k_v);
  }
  if (root.contains("sim")) {
    const json& j = root["sim"];
    reject_unknown(j, "sim", {"dt", "t_end", "t0"});
    cfg.sim.dt = get_number(j, "sim", "dt", cfg.sim.dt);
    cfg.sim.t_end = get_number(j, "sim", "t_end", cfg.sim.t_end);
    cfg.sim.t0 = get_number(j, "sim", "t0", cfg.sim.t0);
  }
  if (root.contains("scenarios")) {
    if (!root["scenarios"].is_array()) throw ConfigError("'scenarios' must be an array");
    cfg.scenarios.clear();
    for (const json& j : root["scenarios"]) {
      if (!j.is_object()) throw ConfigError("each scenario must be an object");
      reject_unknown(j, "scenario",
                     {"name", "controller", "pair", "pre", "post", "optimize", "delta0_deg"});
      Scenario sc;
      if (!j.contains("name") || !j["name"].is_string())
        throw ConfigError("scenario requires a string 'name'");
      sc.name = j["name"].get<std::string>();
      if (!j.contains("controller") || !j["controller"].is_string())
        throw ConfigError("scenario '" + sc.name + "' requires a string 'controller'");
      sc.controller = parse_controller(j["controller"].get<std::string>());
      if (!j.contains("pair") || !j["pair"].is_string())
        throw ConfigError("scenario '" + sc.name + "' requires a string 'pair'");
      sc.pair = parse_pair(j["pair"].get<std::string>());
      auto setpoint = [&](const char* key) -> std::pair<double, double> {
        if (!j.contains(key) || !j[key].is_array() || j[key].size() != 2 ||
            !j[key][0].is_number() || !j[key][1].is_number())
          throw ConfigError("scenario '" + sc.name + "' requires '" + key +
                            "' as [s1, s2] numbers");
        return {j[key][0].get<double>(), j[key][1].get<double>()};
      };
      sc.pre_setpoint = setpoint("pre");
      sc.post_setpoint = setpoint("post");
      if (j.contains("optimize")) {
        if (!j["optimize"].is_boolean())
          throw ConfigError("scenario '" + sc.name + "': 'optimize' must be a boolean");
        sc.optimize_setpoints = j["optimize"].get<bool>();
      }
      // Angles in the config are degrees; internal computation is radians.
      sc.delta0 = get_number(j, "scenario '" + sc.name + "'", "delta0_deg", 0.0) * M_PI / 180.0;
      cfg.scenarios.push_back(sc);
    }
  }
  return cfg;
}

ConfigFile ConfigFile::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str());
}

std::string ConfigFile::to_json_text() const {
  json root;
  root["inverter"] = {{"r", inverter.r},
                      {"l", inverter.l},
                      {"omega", inverter.omega},
                      {"e_mag", inverter.e_mag},
                      {"i_max", inverter.i_max}};
  root["droop"] = {{"m_p", droop.m_p},
                   {"m_q", droop.m_q},
                   {"m_v2", droop.m_v2},
                   {"omega_c", droop.omega_c}};
  root["oc"] = {{"k_v", oc.k_v}};
  root["sim"] = {{"dt", sim.dt}, {"t_end", sim.t_end}, {"t0", sim.t0}};
  root["scenarios"] = json::array();
  for (const Scenario& sc : scenarios) {
    root["scenarios"].push_back({{"name", sc.name},
                                 {"controller", to_string(sc.controller)},
                                 {"pair", pair_name(sc.pair)},
                                 {"pre", {sc.pre_setpoint.first, sc.pre_setpoint.second}},
                                 {"post", {sc.post_setpoint.first, sc.post_setpoint.second}},
                                 {"optimize", sc.optimize_setpoints},
                                 {"delta0_deg", sc.delta0 * 180.0 / M_PI}});
  }
  return root.dump(2) + "\n";
}

const Scenario* ConfigFile::find_scenario(const std::string& name) const {
  for (const Scenario& sc : scenarios)
    if (sc.name == name) return &sc;
  return nullptr;
}

}  // namespace invfeas
