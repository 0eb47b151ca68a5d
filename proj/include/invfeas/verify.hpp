#ifndef INVFEAS_VERIFY_HPP
#define INVFEAS_VERIFY_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "invfeas/config.hpp"
#include "invfeas/types.hpp"

namespace invfeas {

/// Brute-force support value over a polar grid of currents: max of dir.s with
/// no use of the closed-form path. Shared oracle for the verification command
/// and the test suites.
double grid_support_oracle(const InverterParams& params, QuantityPair pair,
                           double dir_x, double dir_y, int n_radii, int n_angles);

/// Exact reference trajectory for the linear OC closed loop, stepped with the
/// matrix exponential of the 4-state system. Row k is [i_d, i_q, v_d, v_q] at
/// t = k*dt, including the setpoint switch at t0.
std::vector<std::array<double, 4>> oc_reference_trajectory(
    const InverterParams& params, double k_v, DqVector v_pre, DqVector v_post,
    double dt, double t_end, double t0);

struct SuiteResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct VerifyOptions {
  std::uint64_t seed = 1;
  bool fault_inject_support = false;  // negative-control mode: corrupt support values
};

/// Runs the cross-module verification suites: support-vs-grid agreement,
/// convexity midpoint witnesses, three-way solver agreement, OC-vs-matrix-
/// exponential fidelity and the rank-1 census.
std::vector<SuiteResult> run_verification(const ConfigFile& cfg, const VerifyOptions& opts);

}  // namespace invfeas

#endif
