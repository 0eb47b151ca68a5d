#include <cmath>
#include <limits>

#include <doctest.h>

#include "invfeas/optimizer.hpp"
#include "invfeas/simulator.hpp"
#include "invfeas/verify.hpp"

using namespace invfeas;

namespace {

const QuantityPair kPq{OutputQuantity::ActivePower, OutputQuantity::ReactivePower};
const QuantityPair kPv2{OutputQuantity::ActivePower, OutputQuantity::SquaredVoltage};

Scenario make_scenario(const char* name, ControllerKind kind, QuantityPair pair,
                       std::pair<double, double> pre, std::pair<double, double> post) {
  Scenario sc;
  sc.name = name;
  sc.controller = kind;
  sc.pair = pair;
  sc.pre_setpoint = pre;
  sc.post_setpoint = post;
  return sc;
}

// Equilibrium current for a held voltage: 0 = A I + (V - E)/L.
DqVector equilibrium_current(const InverterParams& p, DqVector v) {
  const Mat2 a = system_matrix(p);
  return a.solve((-1.0 / p.l) * (v - p.grid_voltage()));
}

}  // namespace

TEST_CASE("rk4 step") {
  SUBCASE("zero derivative keeps the state") {
    auto deriv = [](const std::array<double, 2>&, double) { return std::array<double, 2>{0, 0}; };
    const std::array<double, 2> y = rk4_step<2>(deriv, {1.5, -2.5}, 0.0, 1e-3);
    CHECK(y[0] == 1.5);
    CHECK(y[1] == -2.5);
  }

  SUBCASE("single step on exponential decay") {
    auto deriv = [](const std::array<double, 1>& y, double) {
      return std::array<double, 1>{-y[0]};
    };
    const std::array<double, 1> y = rk4_step<1>(deriv, {1.0}, 0.0, 0.1);
    CHECK(y[0] == doctest::Approx(0.9048375).epsilon(1e-6));
    CHECK(y[0] == doctest::Approx(std::exp(-0.1)).epsilon(1e-6));
  }

  SUBCASE("fourth-order convergence on the decay problem") {
    auto deriv = [](const std::array<double, 1>& y, double) {
      return std::array<double, 1>{-y[0]};
    };
    auto integrate = [&](double dt) {
      std::array<double, 1> y{1.0};
      const int n = static_cast<int>(std::llround(1.0 / dt));
      for (int k = 0; k < n; ++k) y = rk4_step<1>(deriv, y, k * dt, dt);
      return std::abs(y[0] - std::exp(-1.0));
    };
    const double coarse = integrate(1e-2);
    const double fine = integrate(5e-3);
    CHECK(coarse / fine >= 14.0);
    CHECK(coarse / fine <= 18.0);
  }

  SUBCASE("non-finite result throws") {
    auto deriv = [](const std::array<double, 1>&, double) {
      return std::array<double, 1>{std::numeric_limits<double>::infinity()};
    };
    CHECK_THROWS_AS((rk4_step<1>(deriv, {0.0}, 0.0, 1e-4)), NonFiniteState);
  }
}

TEST_CASE("oc derivatives vanish at the closed-loop equilibrium") {
  const InverterParams p;
  const OcParams oc;
  const DqVector i_star{2.0, -1.0};
  const DqVector v_star = steady_state_voltage(p, i_star);
  const std::array<double, 4> rate =
      oc_derivatives(p, oc, v_star, {i_star.d, i_star.q, v_star.d, v_star.q});
  for (const double r : rate) CHECK(std::abs(r) <= 1e-9);
}

TEST_CASE("droop derivatives vanish at consistent fixed points") {
  const InverterParams p;
  const DroopParams dp;
  const double delta = 0.05;

  SUBCASE("pq controller") {
    const double v_mag = 118.0;
    const DqVector v{v_mag * std::cos(delta), v_mag * std::sin(delta)};
    const DqVector i = equilibrium_current(p, v);
    const double pw = 1.5 * dot(i, v);
    const double qw = 1.5 * dot(i, kRotJ.apply(v));
    const std::array<double, 6> rate =
        droop_pq_derivatives(p, dp, {pw, 0.0}, {i.d, i.q, pw, qw, delta, v_mag});
    for (const double r : rate) CHECK(std::abs(r) <= 1e-7);
  }

  SUBCASE("pv2 controller") {
    const double v_sq = 118.0 * 118.0;
    const double v_mag = std::sqrt(v_sq);
    const DqVector v{v_mag * std::cos(delta), v_mag * std::sin(delta)};
    const DqVector i = equilibrium_current(p, v);
    const double pw = 1.5 * dot(i, v);
    const double qw = 1.5 * dot(i, kRotJ.apply(v));
    const std::array<double, 6> rate =
        droop_pv2_derivatives(p, dp, {pw, v_sq}, {i.d, i.q, pw, qw, delta, v_sq});
    for (const double r : rate) CHECK(std::abs(r) <= 1e-7);
  }
}

TEST_CASE("oc scenario") {
  InverterParams p;
  p.i_max = 6.667;
  const SimConfig cfg;
  const DroopParams dp;
  const OcParams oc;

  SUBCASE("zero setpoint keeps the current at zero") {
    const Scenario sc = make_scenario("hold", ControllerKind::Oc, kPq, {0, 0}, {0, 0});
    const Trajectory traj = run_scenario(p, sc, cfg, dp, oc);
    REQUIRE_FALSE(traj.non_finite);
    for (const TrajectorySample& s : traj.samples) {
      CHECK(s.i_mag <= 1e-3);
      CHECK(s.v_sq == doctest::Approx(p.e_mag * p.e_mag).epsilon(1e-6));
    }
  }

  SUBCASE("current converges to the tracking optimum") {
    const Scenario sc = make_scenario("track", ControllerKind::Oc, kPq, {800, 0}, {800, 0});
    const Trajectory traj = run_scenario(p, sc, cfg, dp, oc);
    REQUIRE_FALSE(traj.non_finite);
    const SolveReport rep = solve_sdp(p, kPq, {800.0, 0.0, 1.0});
    const TrajectorySample& last = traj.samples.back();
    CHECK(std::abs(last.i_d - rep.i_star.d) <= 1e-3);
    CHECK(std::abs(last.i_q - rep.i_star.q) <= 1e-3);
    CHECK(last.p == doctest::Approx(800.0).epsilon(1e-3));
  }

  SUBCASE("matches the matrix-exponential reference") {
    const Scenario sc = make_scenario("ref", ControllerKind::Oc, kPq, {800, 0}, {1100, 0});
    const Trajectory traj = run_scenario(p, sc, cfg, dp, oc);
    REQUIRE_FALSE(traj.non_finite);

    const SolveReport pre = solve_sdp(p, kPq, {800.0, 0.0, 1.0});
    const SolveReport post = solve_sdp(p, kPq, {1100.0, 0.0, 1.0});
    const auto ref = oc_reference_trajectory(p, oc.k_v, steady_state_voltage(p, pre.i_star),
                                             steady_state_voltage(p, post.i_star), cfg.dt,
                                             cfg.t_end, cfg.t0);
    REQUIRE(ref.size() == traj.samples.size());
    double worst = 0.0, scale = 1.0;
    for (std::size_t k = 0; k < ref.size(); ++k) {
      const TrajectorySample& s = traj.samples[k];
      const std::array<double, 4> sim{s.i_d, s.i_q, s.v_d, s.v_q};
      for (int i = 0; i < 4; ++i) {
        worst = std::max(worst, std::abs(sim[i] - ref[k][i]));
        scale = std::max(scale, std::abs(ref[k][i]));
      }
    }
    CHECK(worst / scale <= 1e-6);
  }
}

TEST_CASE("droop pq scenario settles on the active power setpoints") {
  InverterParams p;
  p.i_max = 6.667;
  const SimConfig cfg;
  const DroopParams dp;
  const OcParams oc;
  const Scenario sc = make_scenario("pq", ControllerKind::DroopPQ, kPq, {800, 0}, {1100, 0});
  const Trajectory traj = run_scenario(p, sc, cfg, dp, oc);
  REQUIRE_FALSE(traj.non_finite);

  // Sample just before the setpoint switch, and at the end of the run.
  const TrajectorySample* before = nullptr;
  for (const TrajectorySample& s : traj.samples) {
    if (s.t < cfg.t0) before = &s;
  }
  REQUIRE(before != nullptr);
  CHECK(before->p_filt == doctest::Approx(800.0).epsilon(0.01));
  CHECK(traj.samples.back().p_filt == doctest::Approx(1100.0).epsilon(0.01));
  CHECK(steady_state_metrics(traj, 0.05).max_i_mag <= p.i_max * 1.05);
}

TEST_CASE("droop pv2 scenario with an out-of-region setpoint") {
  InverterParams p;
  p.i_max = 6.667;
  const SimConfig cfg;
  const DroopParams dp;
  const OcParams oc;

  Scenario sc = make_scenario("pv2", ControllerKind::DroopPV2, kPv2, {200, 14400}, {850, 14400});

  SUBCASE("raw setpoints violate the current limit in steady state") {
    const Trajectory traj = run_scenario(p, sc, cfg, dp, oc);
    REQUIRE_FALSE(traj.non_finite);
    CHECK(steady_state_metrics(traj, 0.05).mean_i_mag > p.i_max);
  }

  SUBCASE("optimized setpoints respect the current limit") {
    sc.optimize_setpoints = true;
    const Trajectory traj = run_scenario(p, sc, cfg, dp, oc);
    REQUIRE_FALSE(traj.non_finite);
    // Droop control leaves a small proportional steady-state offset, so allow
    // a fraction of a percent above the limit.
    CHECK(steady_state_metrics(traj, 0.05).mean_i_mag <= p.i_max * 1.005);
  }
}

TEST_CASE("repeated runs are bit-identical") {
  InverterParams p;
  p.i_max = 6.667;
  const SimConfig cfg;
  const DroopParams dp;
  const OcParams oc;
  const Scenario sc = make_scenario("pq", ControllerKind::DroopPQ, kPq, {800, 0}, {1100, 0});
  const Trajectory a = run_scenario(p, sc, cfg, dp, oc);
  const Trajectory b = run_scenario(p, sc, cfg, dp, oc);
  REQUIRE(a.samples.size() == b.samples.size());
  for (std::size_t k = 0; k < a.samples.size(); ++k) {
    CHECK(a.samples[k].i_d == b.samples[k].i_d);
    CHECK(a.samples[k].i_q == b.samples[k].i_q);
    CHECK(a.samples[k].v_d == b.samples[k].v_d);
    CHECK(a.samples[k].v_q == b.samples[k].v_q);
    CHECK(a.samples[k].delta == b.samples[k].delta);
  }
}

TEST_CASE("recorded outputs are consistent with the recorded state") {
  InverterParams p;
  p.i_max = 6.667;
  SimConfig cfg;
  cfg.t_end = 0.3;
  const Scenario sc = make_scenario("pq", ControllerKind::DroopPQ, kPq, {800, 0}, {800, 0});
  const Trajectory traj = run_scenario(p, sc, cfg, DroopParams{}, OcParams{});
  for (const TrajectorySample& s : traj.samples) {
    const DqVector i{s.i_d, s.i_q};
    const DqVector v{s.v_d, s.v_q};
    const double scale = std::max({1.0, std::abs(s.p), std::abs(s.q), s.v_sq});
    CHECK(std::abs(s.i_mag - i.norm()) <= 1e-12 * std::max(1.0, i.norm()));
    CHECK(std::abs(s.p - 1.5 * dot(i, v)) <= 1e-9 * scale);
    CHECK(std::abs(s.q - 1.5 * dot(i, kRotJ.apply(v))) <= 1e-9 * scale);
    CHECK(std::abs(s.v_sq - v.norm2()) <= 1e-9 * scale);
  }
}

TEST_CASE("steady state metrics") {
  Trajectory traj;
  traj.samples.push_back({0.0, 0, 0, 1.0, 0, 0, 10.0, -4.0, 100.0, 0, 0, 0});
  traj.samples.push_back({0.1, 0, 0, 3.0, 0, 0, 30.0, -2.0, 300.0, 0, 0, 0});
  traj.samples.push_back({0.2, 0, 0, 2.0, 0, 0, 20.0, -6.0, 200.0, 0, 0, 0});

  SUBCASE("window covering the last two samples") {
    const SteadyStateMetrics m = steady_state_metrics(traj, 0.1);
    CHECK(m.mean_i_mag == doctest::Approx(2.5));
    CHECK(m.max_i_mag == doctest::Approx(3.0));
    CHECK(m.mean_p == doctest::Approx(25.0));
    CHECK(m.max_q == doctest::Approx(-2.0));
    CHECK(m.mean_v_sq == doctest::Approx(250.0));
  }

  SUBCASE("empty trajectory is rejected") {
    CHECK_THROWS_AS(steady_state_metrics(Trajectory{}, 0.1), std::invalid_argument);
  }
}

TEST_CASE("sim config validation") {
  SimConfig cfg;
  cfg.dt = 2e-3;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = SimConfig{};
  cfg.t0 = 2.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
