#ifndef INVFEAS_SIMULATOR_HPP
#define INVFEAS_SIMULATOR_HPP

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "invfeas/model.hpp"
#include "invfeas/types.hpp"

namespace invfeas {

struct SimConfig {
  double dt = 1e-4;    // s
  double t_end = 1.0;  // s
  double t0 = 0.2;     // disturbance instant, s

  void validate() const {
    if (!(dt > 0.0 && dt <= 1e-3)) throw std::invalid_argument("SimConfig: dt must be in (0, 1e-3]");
    if (!(t0 >= 0.0 && t0 < t_end)) throw std::invalid_argument("SimConfig: need 0 <= t0 < t_end");
  }
};

struct DroopParams {
  double m_p = 2.6e-3;   // rad/(s W)
  double m_q = 5.0e-3;   // V/VAr
  double m_v2 = 5.0;     // 1/s gain on squared voltage
  double omega_c = 2.0 * M_PI * 60.0;  // rad/s

  void validate() const {
    if (!(m_p > 0 && m_q > 0 && m_v2 > 0 && omega_c > 0))
      throw std::invalid_argument("DroopParams: all gains must be > 0");
  }
};

struct OcParams {
  double k_v = 10.0;  // 1/s

  void validate() const {
    if (!(k_v > 0)) throw std::invalid_argument("OcParams: k_v must be > 0");
  }
};

enum class ControllerKind { Oc, DroopPQ, DroopPV2 };

const char* to_string(ControllerKind kind);

struct Scenario {
  std::string name;
  ControllerKind controller = ControllerKind::Oc;
  QuantityPair pair;
  std::pair<double, double> pre_setpoint{0.0, 0.0};
  std::pair<double, double> post_setpoint{0.0, 0.0};
  bool optimize_setpoints = false;
  double delta0 = 0.0;  // initial internal voltage angle, rad
};

struct TrajectorySample {
  double t = 0;
  double i_d = 0, i_q = 0, i_mag = 0;
  double v_d = 0, v_q = 0;
  double p = 0, q = 0, v_sq = 0;
  // Controller internals; zero for the OC controller.
  double p_filt = 0, q_filt = 0, delta = 0;
};

struct Trajectory {
  ControllerKind controller = ControllerKind::Oc;
  std::vector<TrajectorySample> samples;
  bool non_finite = false;   // the run blew up and was truncated
  bool clamped_vsq = false;  // squared voltage was clamped at zero
};

class NonFiniteState : public std::runtime_error {
 public:
  explicit NonFiniteState(const std::string& what) : std::runtime_error(what) {}
};

/// Classical fixed-step RK4 update. Throws NonFiniteState if the result has a
/// non-finite entry.
template <std::size_t N, class F>
std::array<double, N> rk4_step(F&& deriv, const std::array<double, N>& y, double t, double dt) {
  std::array<double, N> k1 = deriv(y, t);
  std::array<double, N> tmp;
  for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + 0.5 * dt * k1[i];
  std::array<double, N> k2 = deriv(tmp, t + 0.5 * dt);
  for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + 0.5 * dt * k2[i];
  std::array<double, N> k3 = deriv(tmp, t + 0.5 * dt);
  for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + dt * k3[i];
  std::array<double, N> k4 = deriv(tmp, t + dt);

  std::array<double, N> out;
  for (std::size_t i = 0; i < N; ++i) {
    out[i] = y[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    if (!std::isfinite(out[i])) throw NonFiniteState("rk4_step: non-finite state entry");
  }
  return out;
}

// State layouts:
//   OC:       [i_d, i_q, v_d, v_q]
//   DroopPQ:  [i_d, i_q, p_filt, q_filt, delta, v_mag]
//   DroopPV2: [i_d, i_q, p_filt, q_filt, delta, v_sq]

std::array<double, 4> oc_derivatives(const InverterParams& params, const OcParams& ocp,
                                     DqVector v_target, const std::array<double, 4>& s);

std::array<double, 6> droop_pq_derivatives(const InverterParams& params, const DroopParams& dp,
                                           std::pair<double, double> setpoint,
                                           const std::array<double, 6>& s);

std::array<double, 6> droop_pv2_derivatives(const InverterParams& params, const DroopParams& dp,
                                            std::pair<double, double> setpoint,
                                            const std::array<double, 6>& s);

/// Integrates a scenario from cold start, switching the setpoint at the first
/// sample >= t0. With optimize_setpoints, pre and post setpoints are replaced
/// by the tracking optimum before the run.
Trajectory run_scenario(const InverterParams& params, const Scenario& scenario,
                        const SimConfig& cfg, const DroopParams& droop, const OcParams& oc);

struct SteadyStateMetrics {
  double mean_i_mag = 0, max_i_mag = 0;
  double mean_p = 0, max_p = 0;
  double mean_q = 0, max_q = 0;
  double mean_v_sq = 0, max_v_sq = 0;
};

SteadyStateMetrics steady_state_metrics(const Trajectory& traj, double window);

}  // namespace invfeas

#endif
