#include "invfeas/region.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace invfeas {

namespace {

struct DirectionalForm {
  double gamma;  // combined quadratic coefficient
  DqVector dvec; // combined linear coefficient
  double k;      // combined offset
};

DirectionalForm combine(const InverterParams& params, QuantityPair pair, Direction dir) {
  const QuadraticOutputMap m1 = quadratic_map(params, pair.first);
  const QuadraticOutputMap m2 = quadratic_map(params, pair.second);
  return {dir.x * m1.alpha + dir.y * m2.alpha,
          dir.x * m1.a_vec + dir.y * m2.a_vec,
          dir.x * m1.offset + dir.y * m2.offset};
}

}  // namespace

SupportResult support(const InverterParams& params, QuantityPair pair, Direction dir) {
  pair.validate();
  const DirectionalForm f = combine(params, pair, dir);
  const double dnorm = f.dvec.norm();

  // Radial profile gamma*rho^2 + |d|*rho is maximized at rho = i_max when
  // gamma >= 0, otherwise at the parabola vertex capped by i_max.
  double rho = params.i_max;
  if (f.gamma < 0.0) rho = std::min(params.i_max, dnorm / (-2.0 * f.gamma));

  DqVector unit{1.0, 0.0};
  if (dnorm > 0.0) unit = (1.0 / dnorm) * f.dvec;

  SupportResult res;
  res.maximizer_current = rho * unit;
  res.value = f.gamma * rho * rho + dnorm * rho + f.k;
  return res;
}

BoundaryPolyline boundary(const InverterParams& params, QuantityPair pair, int n_samples) {
  pair.validate();
  if (n_samples < 3) throw std::invalid_argument("boundary: n_samples too small");

  BoundaryPolyline poly;
  poly.vertices.reserve(static_cast<std::size_t>(n_samples));
  for (int i = 0; i < n_samples; ++i) {
    const double theta = 2.0 * M_PI * i / n_samples;
    const SupportResult sr = support(params, pair, Direction::from_angle(theta));
    const auto [s1, s2] = output_triple(params, sr.maximizer_current).project(pair);
    const double scale = std::max({1.0, std::abs(s1), std::abs(s2)});
    if (!poly.vertices.empty()) {
      const BoundaryVertex& prev = poly.vertices.back();
      if (std::abs(prev.s1 - s1) <= 1e-9 * scale && std::abs(prev.s2 - s2) <= 1e-9 * scale)
        continue;
    }
    poly.vertices.push_back({s1, s2, sr.maximizer_current});
  }
  // Merge the wrap-around duplicate as well.
  if (poly.vertices.size() > 1) {
    const BoundaryVertex& first = poly.vertices.front();
    const BoundaryVertex& last = poly.vertices.back();
    const double scale = std::max({1.0, std::abs(first.s1), std::abs(first.s2)});
    if (std::abs(first.s1 - last.s1) <= 1e-9 * scale &&
        std::abs(first.s2 - last.s2) <= 1e-9 * scale)
      poly.vertices.pop_back();
  }
  return poly;
}

bool contains(const InverterParams& params, QuantityPair pair,
              std::pair<double, double> point, double tol) {
  pair.validate();
  if (!(tol > 0.0)) throw std::invalid_argument("contains: tol must be > 0");

  constexpr int kCoarse = 720;
  const double step = 2.0 * M_PI / kCoarse;

  auto margin = [&](double theta) {
    const Direction dir = Direction::from_angle(theta);
    const SupportResult sr = support(params, pair, dir);
    const double scale = std::max(1.0, std::abs(sr.value));
    return (dir.x * point.first + dir.y * point.second - sr.value) / scale;
  };

  double worst = -std::numeric_limits<double>::infinity();
  double worst_theta = 0.0;
  for (int i = 0; i < kCoarse; ++i) {
    const double m = margin(step * i);
    if (m > worst) {
      worst = m;
      worst_theta = step * i;
    }
  }

  // 8x angular subdivision around the most violated direction sharpens the
  // verdict for points near the boundary.
  for (int j = -8; j <= 8; ++j) {
    if (j == 0) continue;
    worst = std::max(worst, margin(worst_theta + j * step / 8.0));
  }
  return worst <= tol;
}

DqVector convex_combination_preimage(const LemmaForm& lf, DqVector x1, DqVector x2,
                                     double lambda) {
  constexpr double kSlack = 1e-9;
  if (x1.norm2() > 1.0 + kSlack || x2.norm2() > 1.0 + kSlack)
    throw std::domain_error("convex_combination_preimage: endpoint outside unit disk");
  if (!(lambda >= 0.0 && lambda <= 1.0))
    throw std::domain_error("convex_combination_preimage: lambda outside [0,1]");

  const DqVector z = lambda * x1 + (1.0 - lambda) * x2;
  const double zeta = lambda * x1.norm2() + (1.0 - lambda) * x2.norm2();
  const DqVector c = lf.c_vec;

  const double a = c.norm2();
  if (a < 1e-14) {
    // Affine limit: the quadratic collapses, mu = zeta - |z|^2.
    return (zeta - z.norm2()) * c + z;
  }

  const double b = 2.0 * dot(c, z) + 1.0;
  const double cc = z.norm2() - zeta;  // <= 0 up to rounding
  const double disc = std::max(b * b - 4.0 * a * cc, 0.0);
  const double sq = std::sqrt(disc);

  // Stable root pair; the constant term is non-positive, so exactly one root
  // is non-negative, and that is the one we need.
  double mu;
  const double qq = -0.5 * (b + std::copysign(sq, b));
  if (qq == 0.0) {
    mu = 0.0;
  } else if (b >= 0.0) {
    mu = cc / qq;
  } else {
    mu = qq / a;
  }
  mu = std::max(mu, 0.0);
  return mu * c + z;
}

DqVector midpoint_witness(const InverterParams& params, QuantityPair pair,
                          DqVector i1, DqVector i2, double lambda) {
  pair.validate();
  const double slack = params.i_max * (1.0 + 1e-9);
  if (i1.norm() > slack || i2.norm() > slack)
    throw std::domain_error("midpoint_witness: endpoint current exceeds i_max");

  auto normalize = [&](DqVector v) {
    DqVector x = (1.0 / params.i_max) * v;
    const double n = x.norm();
    if (n > 1.0) x = (1.0 / n) * x;  // shave rounding overshoot
    return x;
  };

  const LemmaForm lf = lemma_form(params, pair.first, pair.second);
  const DqVector y = convex_combination_preimage(lf, normalize(i1), normalize(i2), lambda);
  return params.i_max * y;
}

}  // namespace invfeas
