#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "invfeas/config.hpp"
#include "invfeas/csv.hpp"
#include "invfeas/optimizer.hpp"
#include "invfeas/region.hpp"
#include "invfeas/simulator.hpp"
#include "invfeas/verify.hpp"

namespace {

using namespace invfeas;

constexpr int kExitConfig = 2;
constexpr int kExitNotConverged = 3;
constexpr int kExitNonFinite = 4;

ConfigFile load_config(const std::string& path) {
  if (path.empty()) return ConfigFile::defaults();
  return ConfigFile::load(path);
}

int cmd_region(const std::string& config_path, const std::string& pair_name, int n_samples,
               const std::string& out_path) {
  const ConfigFile cfg = load_config(config_path);
  const QuantityPair pair = parse_pair(pair_name);
  const BoundaryPolyline poly = boundary(cfg.inverter, pair, n_samples);

  CsvTable table;
  table.header = {"s1", "s2", "i_d", "i_q"};
  for (const BoundaryVertex& v : poly.vertices)
    table.add_row({v.s1, v.s2, v.preimage.d, v.preimage.q});
  table.write_file(out_path);

  // Companion file: the current-disk circle itself.
  CsvTable disk;
  disk.header = {"i_d", "i_q"};
  for (int i = 0; i < n_samples; ++i) {
    const double phi = 2.0 * M_PI * i / n_samples;
    disk.add_row({cfg.inverter.i_max * std::cos(phi), cfg.inverter.i_max * std::sin(phi)});
  }
  disk.write_file(out_path + ".disk.csv");

  std::cout << "wrote " << table.rows.size() << " boundary vertices to " << out_path << "\n";
  return 0;
}

int cmd_optimize(const std::string& config_path, const std::string& pair_name, double target1,
                 double target2, double gamma, const std::string& method,
                 const std::string& out_path) {
  const ConfigFile cfg = load_config(config_path);
  const QuantityPair pair = parse_pair(pair_name);
  const TrackingObjective obj{target1, target2, gamma};
  obj.validate();

  SolveReport rep;
  if (method == "sdp") {
    rep = solve_sdp(cfg.inverter, pair, obj);
  } else if (method == "fw") {
    rep = solve_frank_wolfe(cfg.inverter, pair, obj);
  } else if (method == "grid") {
    rep = brute_force(cfg.inverter, pair, obj, 501);
  } else {
    throw ConfigError("unknown method '" + method + "' (expected sdp, fw or grid)");
  }

  std::ostream* out = &std::cout;
  std::ofstream file;
  if (!out_path.empty()) {
    file.open(out_path);
    if (!file) throw ConfigError("cannot open output file: " + out_path);
    out = &file;
  }
  *out << "method " << method << "\n"
       << "s1 " << CsvTable::format_value(rep.s1) << "\n"
       << "s2 " << CsvTable::format_value(rep.s2) << "\n"
       << "i_d " << CsvTable::format_value(rep.i_star.d) << "\n"
       << "i_q " << CsvTable::format_value(rep.i_star.q) << "\n"
       << "objective " << CsvTable::format_value(rep.objective) << "\n"
       << "rank1_residual " << CsvTable::format_value(rep.rank1_residual) << "\n"
       << "iterations " << rep.iterations << "\n"
       << "converged " << (rep.converged ? "yes" : "no") << "\n";
  return rep.converged ? 0 : kExitNotConverged;
}

int cmd_simulate(const std::string& config_path, const std::string& scenario_name, bool optimize,
                 const std::string& out_path) {
  const ConfigFile cfg = load_config(config_path);
  const Scenario* found = cfg.find_scenario(scenario_name);
  if (!found) throw ConfigError("scenario '" + scenario_name + "' not found in config");
  Scenario scenario = *found;
  if (optimize) scenario.optimize_setpoints = true;

  const Trajectory traj = run_scenario(cfg.inverter, scenario, cfg.sim, cfg.droop, cfg.oc);

  CsvTable table;
  const bool internals = scenario.controller != ControllerKind::Oc;
  table.header = {"t", "i_d", "i_q", "i_mag", "v_d", "v_q", "P", "Q", "Vsq"};
  if (internals) {
    table.header.push_back("p_filt");
    table.header.push_back("q_filt");
    table.header.push_back("delta");
  }
  for (const TrajectorySample& s : traj.samples) {
    std::vector<double> row{s.t, s.i_d, s.i_q, s.i_mag, s.v_d, s.v_q, s.p, s.q, s.v_sq};
    if (internals) {
      row.push_back(s.p_filt);
      row.push_back(s.q_filt);
      row.push_back(s.delta);
    }
    table.add_row(std::move(row));
  }
  table.write_file(out_path);
  std::cout << "wrote " << table.rows.size() << " samples to " << out_path << "\n";
  if (traj.non_finite) {
    std::cerr << "simulation left the finite range; trajectory truncated\n";
    return kExitNonFinite;
  }
  return 0;
}

int cmd_verify(const std::string& config_path, std::uint64_t seed, bool fault_inject,
               const std::string& out_path) {
  const ConfigFile cfg = load_config(config_path);
  VerifyOptions opts;
  opts.seed = seed;
  opts.fault_inject_support = fault_inject;

  const std::vector<SuiteResult> results = run_verification(cfg, opts);

  std::ostream* out = &std::cout;
  std::ofstream file;
  if (!out_path.empty()) {
    file.open(out_path);
    if (!file) throw ConfigError("cannot open output file: " + out_path);
    out = &file;
  }
  bool all_passed = true;
  for (const SuiteResult& r : results) {
    *out << (r.passed ? "PASS" : "FAIL") << " " << r.name << ": " << r.detail << "\n";
    all_passed = all_passed && r.passed;
  }
  *out << (all_passed ? "all suites passed" : "some suites failed") << "\n";
  return all_passed ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Feasible-region analysis and simulation for current-limited inverters"};
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path, "JSON config file (defaults embedded)")
      ->configurable(false);

  std::string pair_name = "pq";
  int n_samples = 360;
  std::string out_path = "out.csv";
  auto* region = app.add_subcommand("region", "Sample the feasible-region boundary to CSV");
  region->add_option("--pair", pair_name, "Quantity pair: pq, pv2 or qv2");
  region->add_option("--samples", n_samples, "Number of support directions");
  region->add_option("--out", out_path, "Output CSV path");

  std::vector<double> target;
  double gamma = 1.0;
  std::string method = "sdp";
  std::string opt_out;
  auto* optimize = app.add_subcommand("optimize", "Solve the setpoint-tracking problem");
  optimize->add_option("--pair", pair_name, "Quantity pair: pq, pv2 or qv2");
  optimize->add_option("--target", target, "Target setpoint S1 S2")->expected(2)->required();
  optimize->add_option("--gamma", gamma, "Weight on the second quantity");
  optimize->add_option("--method", method, "Solver: sdp, fw or grid");
  optimize->add_option("--out", opt_out, "Write the report to a file instead of stdout");

  std::string scenario_name;
  bool opt_flag = false;
  auto* simulate = app.add_subcommand("simulate", "Run a controller scenario to CSV");
  simulate->add_option("--scenario", scenario_name, "Scenario name from the config")->required();
  simulate->add_flag("--optimize", opt_flag, "Replace setpoints by the tracking optimum");
  simulate->add_option("--out", out_path, "Output CSV path");

  std::uint64_t seed = 1;
  bool fault_inject = false;
  std::string verify_out;
  auto* verify = app.add_subcommand("verify", "Run the cross-module verification suites");
  verify->add_option("--seed", seed, "RNG seed for the randomized suites");
  verify->add_option("--out", verify_out, "Write the report to a file instead of stdout");
  verify->add_flag("--fault-inject", fault_inject, "Corrupt support values (negative control)")
      ->group("");  // hidden

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (region->parsed()) return cmd_region(config_path, pair_name, n_samples, out_path);
    if (optimize->parsed())
      return cmd_optimize(config_path, pair_name, target[0], target[1], gamma, method, opt_out);
    if (simulate->parsed()) return cmd_simulate(config_path, scenario_name, opt_flag, out_path);
    if (verify->parsed()) return cmd_verify(config_path, seed, fault_inject, verify_out);
  } catch (const invfeas::ConfigError& err) {
    std::cerr << "config error: " << err.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& err) {
    std::cerr << "usage error: " << err.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return 0;
}
