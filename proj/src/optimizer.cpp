#include "invfeas/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "invfeas/region.hpp"

namespace invfeas {

MomentMatrix build_moment_matrix(const InverterParams& params, OutputQuantity qty) {
  const QuadraticOutputMap map = quadratic_map(params, qty);
  MomentMatrix mm;
  mm.m(0, 0) = map.alpha;
  mm.m(1, 1) = map.alpha;
  mm.m(0, 2) = mm.m(2, 0) = 0.5 * map.a_vec.d;
  mm.m(1, 2) = mm.m(2, 1) = 0.5 * map.a_vec.q;
  mm.m(2, 2) = map.offset;
  return mm;
}

ExtractResult extract_current(const GramMatrix& w, double tol) {
  ExtractResult res;
  res.current = w.linear_block();

  Mat3 defect;  // top-left block minus I I^T, rest zero
  defect(0, 0) = w.w(0, 0) - res.current.d * res.current.d;
  defect(0, 1) = w.w(0, 1) - res.current.d * res.current.q;
  defect(1, 0) = w.w(1, 0) - res.current.q * res.current.d;
  defect(1, 1) = w.w(1, 1) - res.current.q * res.current.q;
  res.residual = defect.frobenius() / std::max(1.0, w.w.trace());

  if (res.residual > tol) {
    const SymEigen3 eig = eigen_sym3(w.w);
    const double lead = eig.values[2];
    const double u0 = eig.vectors(0, 2), u1 = eig.vectors(1, 2), u2 = eig.vectors(2, 2);
    if (std::abs(u2) * std::sqrt(std::max(lead, 0.0)) > 1e-12) {
      res.current = {u0 / u2, u1 / u2};
      res.fallback = true;
    }
  }
  return res;
}

namespace {

struct SdpProblem {
  Mat3 m1, m2;
  TrackingObjective obj;
  double imax2;
  double reg_weight = 0.0;  // nuclear-norm (trace) weight

  double objective(const Mat3& w) const {
    return obj.eval(trace_product(m1, w), trace_product(m2, w)) + reg_weight * w.trace();
  }

  Mat3 gradient(const Mat3& w) const {
    const double e1 = trace_product(m1, w) - obj.target1;
    const double e2 = trace_product(m2, w) - obj.target2;
    Mat3 g = e1 * m1 + (obj.gamma * e2) * m2;
    g(0, 0) += reg_weight;
    g(1, 1) += reg_weight;
    g(2, 2) += reg_weight;
    return g;
  }

  // Alternating projection onto {W psd} and {W33 = 1, W11 + W22 <= imax2}.
  Mat3 project(Mat3 w) const {
    constexpr int kRounds = 50;
    for (int r = 0; r < kRounds; ++r) {
      w = project_psd(w);
      w(2, 2) = 1.0;
      const double diag = w(0, 0) + w(1, 1);
      if (diag > imax2) {
        const double s = imax2 / diag;
        w(0, 0) *= s;
        w(1, 1) *= s;
      }
      const SymEigen3 eig = eigen_sym3(w);
      if (eig.values[0] >= -1e-12 * std::max(1.0, w.trace())) break;
    }
    return w;
  }
};

/// Rank-minimal lift of a reduced point (u, x): top-left block x x^T plus the
/// PSD slack u - |x|^2 spread over the diagonal.
Mat3 reduced_lift(double u, DqVector x) {
  const double slack = std::max(u - x.norm2(), 0.0);
  Mat3 w;
  w(0, 0) = x.d * x.d + 0.5 * slack;
  w(1, 1) = x.q * x.q + 0.5 * slack;
  w(0, 1) = w(1, 0) = x.d * x.q;
  w(0, 2) = w(2, 0) = x.d;
  w(1, 2) = w(2, 1) = x.q;
  w(2, 2) = 1.0;
  return w;
}

/// Exact minimum of the reduced problem. Both traces depend on W only through
/// u = W11 + W22 and x = (W13, W23), and for fixed x the optimal u is the
/// clamp of a closed-form scalar; the remaining problem in x is a convex
/// partial minimum over the disk |x| <= i_max, found by shrinking compass
/// search. Used to warm-start the projected-gradient iteration.
struct ReducedPoint {
  double u;
  DqVector x;
};

ReducedPoint reduced_minimum(const SdpProblem& prob) {
  const double al1 = prob.m1(0, 0), al2 = prob.m2(0, 0);
  const DqVector a1{2.0 * prob.m1(0, 2), 2.0 * prob.m1(1, 2)};
  const DqVector a2{2.0 * prob.m2(0, 2), 2.0 * prob.m2(1, 2)};
  const double k1 = prob.m1(2, 2) - prob.obj.target1;
  const double k2 = prob.m2(2, 2) - prob.obj.target2;
  const double gam = prob.obj.gamma;
  const double cap = prob.imax2;
  const double denom = al1 * al1 + gam * al2 * al2;

  auto u_star = [&](DqVector x) {
    const double num = al1 * (dot(a1, x) + k1) + gam * al2 * (dot(a2, x) + k2);
    const double u = denom > 0.0 ? -num / denom : x.norm2();
    return std::clamp(u, x.norm2(), cap);
  };
  auto value = [&](DqVector x) {
    const double u = u_star(x);
    const double e1 = al1 * u + dot(a1, x) + k1;
    const double e2 = al2 * u + dot(a2, x) + k2;
    return 0.5 * (e1 * e1 + gam * e2 * e2);
  };

  const double rad = std::sqrt(cap);
  DqVector best{0.0, 0.0};
  double best_f = value(best);
  double h = 0.5 * rad;
  for (int round = 0; round < 60; ++round) {
    bool improved = true;
    while (improved) {
      improved = false;
      for (const DqVector d : {DqVector{h, 0}, DqVector{-h, 0}, DqVector{0, h}, DqVector{0, -h},
                               DqVector{h, h}, DqVector{h, -h}, DqVector{-h, h},
                               DqVector{-h, -h}}) {
        DqVector cand = best + d;
        const double n = cand.norm();
        if (n > rad) cand = (rad / n) * cand;
        const double f = value(cand);
        if (f < best_f) {
          best_f = f;
          best = cand;
          improved = true;
        }
      }
    }
    h *= 0.5;
  }
  return {u_star(best), best};
}

SolveReport run_sdp_once(const InverterParams& params, QuantityPair pair,
                         const TrackingObjective& obj, const SdpOptions& opts,
                         double reg_weight) {
  SdpProblem prob;
  prob.m1 = build_moment_matrix(params, pair.first).m;
  prob.m2 = build_moment_matrix(params, pair.second).m;
  prob.obj = obj;
  prob.imax2 = params.i_max * params.i_max;
  prob.reg_weight = reg_weight;

  // Safeguard 1/L step from the quadratic objective's Lipschitz constant in W
  // space; the working steps below are exact line searches, which adapt to the
  // severe scale mismatch between e.g. a power map and a squared-voltage map.
  const double lip = prob.m1.frobenius() * prob.m1.frobenius() +
                     obj.gamma * prob.m2.frobenius() * prob.m2.frobenius();
  const double step = 1.0 / std::max(lip, 1e-12);

  // Curvature of f along a search direction d: <d, H d> with the rank-2
  // Hessian H = m1 m1^T + gamma m2 m2^T (the trace term is linear).
  auto curvature = [&](const Mat3& d) {
    const double c1 = trace_product(prob.m1, d);
    const double c2 = trace_product(prob.m2, d);
    return c1 * c1 + obj.gamma * c2 * c2;
  };

  Mat3 w = GramMatrix::from_current({0.0, 0.0}).w;
  double f = prob.objective(w);
  const double scale = std::max(1.0, f);
  {
    // Warm start at the exact reduced minimum; the projected-gradient loop
    // below then mainly refines and certifies stationarity.
    const ReducedPoint rp = reduced_minimum(prob);
    const Mat3 warm = reduced_lift(rp.u, rp.x);
    const double wf = prob.objective(warm);
    if (wf < f) {
      w = warm;
      f = wf;
    }
  }

  std::vector<double> history;
  history.reserve(256);
  history.push_back(f);
  Mat3 w_prev = w;

  SolveReport rep;
  rep.method = SolveMethod::Sdp;
  std::int64_t iter = 0;
  bool plateau = false;
  bool kkt_ok = false;
  const double kkt_bound = opts.kkt_tol * std::max(1.0, std::sqrt(lip * scale));
  auto gradient_mapping = [&](const Mat3& at) {
    const Mat3 g = prob.gradient(at);
    return (at - prob.project(at - step * g)).frobenius() / step;
  };
  for (; iter < opts.max_iterations; ++iter) {
    if (iter % 25 == 0 && gradient_mapping(w) <= kkt_bound) {
      kkt_ok = true;
      break;
    }
    const Mat3 g = prob.gradient(w);
    const double gnorm2 = trace_product(g, g);

    bool accepted = false;
    Mat3 next = w;
    double next_f = f;

    // The feasible set is convex, so for any projected candidate the segment
    // from w to it stays feasible; an exact line search along that segment
    // guarantees descent whenever the direction points downhill.
    auto segment_step = [&](const Mat3& candidate) {
      const Mat3 d = candidate - w;
      const double slope = trace_product(g, d);
      if (slope >= 0.0) return false;
      const double curv = curvature(d);
      const double eta = curv > 0.0 ? std::min(-slope / curv, 1.0) : 1.0;
      const Mat3 cand = w + eta * d;
      const double cf = prob.objective(cand);
      if (cf >= f) return false;
      next = cand;
      next_f = cf;
      accepted = true;
      return true;
    };

    // Gauss-Newton candidate: the gradient lies in span{m1, m2}, so the
    // Newton direction of the rank-2 quadratic solves a 2x2 Gram system and
    // w - d hits the unconstrained minimizer in one jump, sidestepping the
    // scale mismatch between the two moment matrices entirely.
    {
      const double e1 = trace_product(prob.m1, w) - obj.target1;
      const double e2 = trace_product(prob.m2, w) - obj.target2;
      const double g11 = trace_product(prob.m1, prob.m1);
      const double g12 = trace_product(prob.m1, prob.m2);
      const double g22 = trace_product(prob.m2, prob.m2);
      const double det = g11 * g22 - g12 * g12;
      if (det > 1e-14 * g11 * g22) {
        const double u1 = (e1 * g22 - e2 * g12) / det;
        const double u2 = (g11 * e2 - g12 * e1) / det;
        segment_step(prob.project(w - u1 * prob.m1 - u2 * prob.m2));
      }
    }
    // Two-direction exact step over span{-g, w - w_prev}: on the rank-2
    // quadratic this is conjugate-gradient-like and collapses the zigzag of
    // plain steepest descent, including along an active constraint face.
    if (!accepted) {
      const Mat3 d1 = w - w_prev;
      const double p10 = trace_product(prob.m1, g), p20 = trace_product(prob.m2, g);
      const double p11 = trace_product(prob.m1, d1), p21 = trace_product(prob.m2, d1);
      const double a00 = p10 * p10 + obj.gamma * p20 * p20;
      const double a01 = -(p10 * p11 + obj.gamma * p20 * p21);
      const double a11 = p11 * p11 + obj.gamma * p21 * p21;
      const double det = a00 * a11 - a01 * a01;
      if (det > 1e-14 * std::max(a00 * a11, 1.0)) {
        const double r0 = gnorm2;                 // -<grad, -g>
        const double r1 = -trace_product(g, d1);  // -<grad, d1>
        const double a = (r0 * a11 - r1 * a01) / det;
        const double b = (a00 * r1 - a01 * r0) / det;
        segment_step(prob.project(w - a * g + b * d1));
      }
    }
    if (!accepted) {
      // Exact line search along the projected-gradient direction.
      const double curv = curvature(g);
      const double eta = curv > 0.0 ? gnorm2 / curv : step;
      segment_step(prob.project(w - eta * g));
    }
    if (!accepted) segment_step(prob.project(w - step * g));
    if (!accepted) {
      // Fixed point of every projected descent map: nothing left to do.
      plateau = true;
      ++iter;
      break;
    }

    w_prev = w;
    w = next;
    f = next_f;
    history.push_back(f);
    const std::size_t n = history.size();
    // Plateau on either an absolute scale or relative to the current value:
    // in the asymptotic tail the residual distance to the optimum is of the
    // order of the per-window decrease, so both are convergence signals.
    if (n > 20 && (history[n - 21] - f < opts.plateau_tol * scale ||
                   history[n - 21] - f < 1e-8 * std::abs(f))) {
      plateau = true;
      ++iter;
      break;
    }
  }

  rep.iterations = iter;
  if (!kkt_ok && !plateau) rep.converged = gradient_mapping(w) <= kkt_bound;

  // Both traces depend on W only through u = W11 + W22 and x = (W13, W23), so
  // the level set reached above contains a one-parameter family of equally
  // good W. Slide to its minimal-trace end, where u = |x|^2 and W is exactly
  // rank 1 (this is the constructive face of the rank-1 observation).
  {
    const QuadraticOutputMap q1 = quadratic_map(params, pair.first);
    const QuadraticOutputMap q2 = quadratic_map(params, pair.second);
    double u = w(0, 0) + w(1, 1);
    DqVector x{w(0, 2), w(1, 2)};
    const Mat2 asys{q1.a_vec.d, q1.a_vec.q, q2.a_vec.d, q2.a_vec.q};
    const double det_scale = q1.a_vec.norm() * q2.a_vec.norm();
    if (std::abs(asys.det()) > 1e-12 * std::max(det_scale, 1e-300)) {
      // Null direction of both trace maps with du = -1: a_i . nx = alpha_i.
      const DqVector nx = asys.solve({q1.alpha, q2.alpha});
      const double aq = nx.norm2();
      const double bq = 2.0 * dot(x, nx) + 1.0;
      const double cq = x.norm2() - u;
      if (cq < 0.0 && aq > 0.0) {
        const double disc = bq * bq - 4.0 * aq * cq;
        const double root = std::sqrt(std::max(disc, 0.0));
        const double t = bq >= 0.0 ? 2.0 * (-cq) / (bq + root) : (root - bq) / (2.0 * aq);
        if (std::isfinite(t) && t > 0.0) {
          u -= t;
          x = x + t * nx;
        }
      }
      const double slack = std::max(u - x.norm2(), 0.0);
      Mat3 wr;
      wr(0, 0) = x.d * x.d + 0.5 * slack;
      wr(1, 1) = x.q * x.q + 0.5 * slack;
      wr(0, 1) = wr(1, 0) = x.d * x.q;
      wr(0, 2) = wr(2, 0) = x.d;
      wr(1, 2) = wr(2, 1) = x.q;
      wr(2, 2) = 1.0;
      w = wr;
    }
  }

  GramMatrix gram;
  gram.w = w;
  rep.w_star = gram;
  return rep;
}

/// Deterministic local refinement of the extracted current: shrinking-step
/// compass search over the disk. The lifted solve localizes the global basin;
/// this drives the reported setpoint to full floating-point stationarity.
DqVector polish_current(const InverterParams& params, QuantityPair pair,
                        const TrackingObjective& obj, DqVector start) {
  const QuadraticOutputMap m1 = quadratic_map(params, pair.first);
  const QuadraticOutputMap m2 = quadratic_map(params, pair.second);
  auto value = [&](DqVector i) { return obj.eval(m1.eval(i), m2.eval(i)); };

  DqVector best = start;
  double best_f = value(best);
  double h = params.i_max * 1e-2;
  for (int round = 0; round < 48; ++round) {
    bool improved = true;
    while (improved) {
      improved = false;
      for (const DqVector d : {DqVector{h, 0}, DqVector{-h, 0}, DqVector{0, h}, DqVector{0, -h},
                               DqVector{h, h}, DqVector{h, -h}, DqVector{-h, h},
                               DqVector{-h, -h}}) {
        DqVector cand = best + d;
        const double n = cand.norm();
        if (n > params.i_max) cand = (params.i_max / n) * cand;
        const double f = value(cand);
        if (f < best_f) {
          best_f = f;
          best = cand;
          improved = true;
        }
      }
    }
    h *= 0.5;
  }
  return best;
}

}  // namespace

SolveReport solve_sdp(const InverterParams& params, QuantityPair pair,
                      const TrackingObjective& obj, const SdpOptions& opts) {
  pair.validate();
  obj.validate();
  params.validate();

  const double obj_scale =
      std::max(1.0, obj.eval(output_triple(params, {0, 0}).get(pair.first),
                             output_triple(params, {0, 0}).get(pair.second)));

  double reg = opts.regularize ? 1e-6 * obj_scale : 0.0;
  SolveReport rep = run_sdp_once(params, pair, obj, opts, reg);
  ExtractResult ex = extract_current(*rep.w_star, opts.rank1_tol);

  if (ex.residual > opts.rank1_tol && reg == 0.0) {
    // One retry with a small trace (nuclear-norm) penalty to bias toward
    // low-rank solutions.
    reg = 1e-6 * obj_scale;
    SolveReport rep2 = run_sdp_once(params, pair, obj, opts, reg);
    rep2.iterations += rep.iterations;
    rep2.regularized = true;
    ExtractResult ex2 = extract_current(*rep2.w_star, opts.rank1_tol);
    if (ex2.residual <= ex.residual) {
      rep = rep2;
      ex = ex2;
    } else {
      rep.iterations = rep2.iterations;
      rep.regularized = true;
    }
  }

  rep.rank1_residual = ex.residual;
  rep.rank1_fallback = ex.fallback;
  rep.i_star = ex.current;
  const double imag = rep.i_star.norm();
  if (imag > params.i_max) rep.i_star = (params.i_max / imag) * rep.i_star;
  rep.i_star = polish_current(params, pair, obj, rep.i_star);

  const auto [s1, s2] = output_triple(params, rep.i_star).project(pair);
  rep.s1 = s1;
  rep.s2 = s2;
  rep.objective = obj.eval(s1, s2);
  return rep;
}

SolveReport solve_frank_wolfe(const InverterParams& params, QuantityPair pair,
                              const TrackingObjective& obj) {
  pair.validate();
  obj.validate();
  params.validate();

  DqVector i_curr{0.0, 0.0};
  auto outputs = [&](DqVector i) { return output_triple(params, i).project(pair); };
  auto [s1, s2] = outputs(i_curr);
  const double scale = std::max(1.0, obj.eval(s1, s2));

  SolveReport rep;
  rep.method = SolveMethod::FrankWolfe;
  constexpr std::int64_t kMaxIter = 10000;
  constexpr double kGapTol = 1e-8;

  bool converged = false;
  std::int64_t k = 0;
  for (; k < kMaxIter; ++k) {
    const double g1 = s1 - obj.target1;
    const double g2 = obj.gamma * (s2 - obj.target2);
    const SupportResult sr = support(params, pair, Direction{-g1, -g2});
    const auto [v1, v2] = outputs(sr.maximizer_current);
    const double gap = g1 * (s1 - v1) + g2 * (s2 - v2);
    if (gap < kGapTol * scale) {
      converged = true;
      break;
    }
    // Exact line search along the vertex direction (f is quadratic); the
    // classical 2/(k+2) schedule stalls far above the gap tolerance.
    const double u1 = v1 - s1, u2 = v2 - s2;
    const double curv = u1 * u1 + obj.gamma * u2 * u2;
    double eta = curv > 0.0 ? std::clamp(-(g1 * u1 + g2 * u2) / curv, 0.0, 1.0) : 1.0;
    if (eta == 0.0) eta = 2.0 / (k + 2.0);

    i_curr = midpoint_witness(params, pair, sr.maximizer_current, i_curr, eta);
    std::tie(s1, s2) = outputs(i_curr);
  }

  rep.iterations = k;
  rep.converged = converged;
  rep.i_star = polish_current(params, pair, obj, i_curr);
  std::tie(rep.s1, rep.s2) = outputs(rep.i_star);
  rep.objective = obj.eval(rep.s1, rep.s2);
  return rep;
}

SolveReport brute_force(const InverterParams& params, QuantityPair pair,
                        const TrackingObjective& obj, int grid_n) {
  pair.validate();
  obj.validate();
  params.validate();
  if (grid_n < 101) throw std::invalid_argument("brute_force: grid_n must be >= 101");

  const QuadraticOutputMap m1 = quadratic_map(params, pair.first);
  const QuadraticOutputMap m2 = quadratic_map(params, pair.second);
  auto value = [&](DqVector i) { return obj.eval(m1.eval(i), m2.eval(i)); };

  DqVector best{0.0, 0.0};
  double best_f = value(best);
  const int n_angles = 4 * grid_n;
  for (int jr = 0; jr < grid_n; ++jr) {
    const double rho = params.i_max * (jr + 1) / grid_n;
    for (int ja = 0; ja < n_angles; ++ja) {
      const double phi = 2.0 * M_PI * ja / n_angles;
      const DqVector i{rho * std::cos(phi), rho * std::sin(phi)};
      const double f = value(i);
      if (f < best_f) {
        best_f = f;
        best = i;
      }
    }
  }

  // Local refinement from the best grid cell down to floating-point precision.
  best = polish_current(params, pair, obj, best);

  SolveReport rep;
  rep.method = SolveMethod::Grid;
  rep.iterations = grid_n;
  rep.i_star = best;
  const auto [s1, s2] = output_triple(params, best).project(pair);
  rep.s1 = s1;
  rep.s2 = s2;
  rep.objective = obj.eval(s1, s2);
  return rep;
}

}  // namespace invfeas
