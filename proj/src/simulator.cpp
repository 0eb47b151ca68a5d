#include "invfeas/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "invfeas/optimizer.hpp"

namespace invfeas {

const char* to_string(ControllerKind kind) {
  switch (kind) {
    case ControllerKind::Oc: return "oc";
    case ControllerKind::DroopPQ: return "droop_pq";
    case ControllerKind::DroopPV2: return "droop_pv2";
  }
  return "?";
}

namespace {

// RL branch dynamics, Idot = A I + (1/L)(V - E).
DqVector current_rate(const InverterParams& params, const Mat2& a, DqVector i, DqVector v) {
  const DqVector drive = (1.0 / params.l) * (v - params.grid_voltage());
  return a.apply(i) + drive;
}

struct InstantPq {
  double p, q;
};

InstantPq instant_pq(DqVector i, DqVector v) {
  return {1.5 * dot(i, v), 1.5 * dot(i, kRotJ.apply(v))};
}

}  // namespace

std::array<double, 4> oc_derivatives(const InverterParams& params, const OcParams& ocp,
                                     DqVector v_target, const std::array<double, 4>& s) {
  const Mat2 a = system_matrix(params);
  const DqVector i{s[0], s[1]};
  const DqVector v{s[2], s[3]};
  const DqVector idot = current_rate(params, a, i, v);
  const DqVector vdot = -ocp.k_v * (v - v_target);
  return {idot.d, idot.q, vdot.d, vdot.q};
}

std::array<double, 6> droop_pq_derivatives(const InverterParams& params, const DroopParams& dp,
                                           std::pair<double, double> setpoint,
                                           const std::array<double, 6>& s) {
  const Mat2 a = system_matrix(params);
  const DqVector i{s[0], s[1]};
  const double p_filt = s[2], q_filt = s[3], delta = s[4], v_mag = s[5];
  const DqVector v{v_mag * std::cos(delta), v_mag * std::sin(delta)};
  const InstantPq pq = instant_pq(i, v);

  const DqVector idot = current_rate(params, a, i, v);
  return {idot.d,
          idot.q,
          dp.omega_c * (pq.p - p_filt),
          dp.omega_c * (pq.q - q_filt),
          -dp.m_p * (p_filt - setpoint.first),
          dp.m_q * dp.omega_c * (q_filt - pq.q)};
}

std::array<double, 6> droop_pv2_derivatives(const InverterParams& params, const DroopParams& dp,
                                            std::pair<double, double> setpoint,
                                            const std::array<double, 6>& s) {
  const Mat2 a = system_matrix(params);
  const DqVector i{s[0], s[1]};
  const double p_filt = s[2], q_filt = s[3], delta = s[4];
  const double v_sq = std::max(s[5], 0.0);
  const double v_mag = std::sqrt(v_sq);
  const DqVector v{v_mag * std::cos(delta), v_mag * std::sin(delta)};
  const InstantPq pq = instant_pq(i, v);

  const DqVector idot = current_rate(params, a, i, v);
  return {idot.d,
          idot.q,
          dp.omega_c * (pq.p - p_filt),
          dp.omega_c * (pq.q - q_filt),
          -dp.m_p * (p_filt - setpoint.first),
          -dp.m_v2 * (s[5] - setpoint.second)};
}

Trajectory run_scenario(const InverterParams& params, const Scenario& scenario,
                        const SimConfig& cfg, const DroopParams& droop, const OcParams& oc) {
  params.validate();
  cfg.validate();
  droop.validate();
  oc.validate();
  scenario.pair.validate();

  std::pair<double, double> pre = scenario.pre_setpoint;
  std::pair<double, double> post = scenario.post_setpoint;

  // The OC controller always needs a target current; droop controllers only
  // get one when the caller asks for optimized setpoints.
  DqVector i_star_pre, i_star_post;
  const bool need_solve = scenario.optimize_setpoints || scenario.controller == ControllerKind::Oc;
  if (need_solve) {
    const SolveReport pre_rep =
        solve_sdp(params, scenario.pair, {pre.first, pre.second, 1.0});
    const SolveReport post_rep =
        solve_sdp(params, scenario.pair, {post.first, post.second, 1.0});
    i_star_pre = pre_rep.i_star;
    i_star_post = post_rep.i_star;
    if (scenario.optimize_setpoints) {
      pre = {pre_rep.s1, pre_rep.s2};
      post = {post_rep.s1, post_rep.s2};
    }
  }

  const auto n_steps = static_cast<std::size_t>(std::llround(cfg.t_end / cfg.dt));
  Trajectory traj;
  traj.controller = scenario.controller;
  traj.samples.reserve(n_steps + 1);

  const DqVector e = params.grid_voltage();

  auto record = [&](double t, DqVector i, DqVector v, double p_filt, double q_filt,
                    double delta) {
    const InstantPq pq = instant_pq(i, v);
    traj.samples.push_back({t, i.d, i.q, i.norm(), v.d, v.q, pq.p, pq.q, v.norm2(), p_filt,
                            q_filt, delta});
  };

  switch (scenario.controller) {
    case ControllerKind::Oc: {
      const DqVector v_pre = steady_state_voltage(params, i_star_pre);
      const DqVector v_post = steady_state_voltage(params, i_star_post);
      std::array<double, 4> s{0.0, 0.0, e.d, e.q};
      record(0.0, {s[0], s[1]}, {s[2], s[3]}, 0, 0, 0);
      for (std::size_t k = 0; k < n_steps; ++k) {
        const double t = k * cfg.dt;
        const DqVector v_target = t >= cfg.t0 ? v_post : v_pre;
        auto deriv = [&](const std::array<double, 4>& y, double) {
          return oc_derivatives(params, oc, v_target, y);
        };
        try {
          s = rk4_step<4>(deriv, s, t, cfg.dt);
        } catch (const NonFiniteState&) {
          traj.non_finite = true;
          return traj;
        }
        record((k + 1) * cfg.dt, {s[0], s[1]}, {s[2], s[3]}, 0, 0, 0);
      }
      break;
    }
    case ControllerKind::DroopPQ:
    case ControllerKind::DroopPV2: {
      const bool pv2 = scenario.controller == ControllerKind::DroopPV2;
      std::array<double, 6> s{0.0, 0.0, 0.0, 0.0, scenario.delta0, pv2 ? e.norm2() : e.norm()};
      auto voltage = [&](const std::array<double, 6>& y) {
        const double mag = pv2 ? std::sqrt(std::max(y[5], 0.0)) : y[5];
        return DqVector{mag * std::cos(y[4]), mag * std::sin(y[4])};
      };
      record(0.0, {s[0], s[1]}, voltage(s), s[2], s[3], s[4]);
      for (std::size_t k = 0; k < n_steps; ++k) {
        const double t = k * cfg.dt;
        const std::pair<double, double> sp = t >= cfg.t0 ? post : pre;
        auto deriv = [&](const std::array<double, 6>& y, double) {
          return pv2 ? droop_pv2_derivatives(params, droop, sp, y)
                     : droop_pq_derivatives(params, droop, sp, y);
        };
        try {
          s = rk4_step<6>(deriv, s, t, cfg.dt);
        } catch (const NonFiniteState&) {
          traj.non_finite = true;
          return traj;
        }
        if (pv2 && s[5] < 0.0) {
          s[5] = 0.0;
          traj.clamped_vsq = true;
        }
        record((k + 1) * cfg.dt, {s[0], s[1]}, voltage(s), s[2], s[3], s[4]);
      }
      break;
    }
  }
  return traj;
}

SteadyStateMetrics steady_state_metrics(const Trajectory& traj, double window) {
  if (traj.samples.empty()) throw std::invalid_argument("steady_state_metrics: empty trajectory");
  const double t_end = traj.samples.back().t;
  const double t_from = t_end - window;

  SteadyStateMetrics m;
  m.max_i_mag = m.max_p = m.max_q = m.max_v_sq = -std::numeric_limits<double>::infinity();
  std::size_t count = 0;
  for (const TrajectorySample& s : traj.samples) {
    if (s.t < t_from) continue;
    ++count;
    m.mean_i_mag += s.i_mag;
    m.mean_p += s.p;
    m.mean_q += s.q;
    m.mean_v_sq += s.v_sq;
    m.max_i_mag = std::max(m.max_i_mag, s.i_mag);
    m.max_p = std::max(m.max_p, s.p);
    m.max_q = std::max(m.max_q, s.q);
    m.max_v_sq = std::max(m.max_v_sq, s.v_sq);
  }
  if (count == 0) throw std::invalid_argument("steady_state_metrics: window has no samples");
  const double inv = 1.0 / static_cast<double>(count);
  m.mean_i_mag *= inv;
  m.mean_p *= inv;
  m.mean_q *= inv;
  m.mean_v_sq *= inv;
  return m;
}

}  // namespace invfeas
