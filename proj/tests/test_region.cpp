#include <cmath>
#include <random>

#include <doctest.h>

#include "invfeas/region.hpp"
#include "invfeas/verify.hpp"

using namespace invfeas;

namespace {

const QuantityPair kPq{OutputQuantity::ActivePower, OutputQuantity::ReactivePower};
const QuantityPair kPv2{OutputQuantity::ActivePower, OutputQuantity::SquaredVoltage};
const QuantityPair kQv2{OutputQuantity::ReactivePower, OutputQuantity::SquaredVoltage};

InverterParams table_params(double i_max = 6.667) {
  InverterParams p;
  p.i_max = i_max;
  return p;
}

InverterParams random_params(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> ur(0.01, 10.0);
  std::uniform_real_distribution<double> ul(0.1e-3, 50e-3);
  std::uniform_real_distribution<double> ue(50.0, 400.0);
  std::uniform_real_distribution<double> ui(1.0, 50.0);
  InverterParams p;
  p.r = ur(rng);
  p.l = ul(rng);
  p.e_mag = ue(rng);
  p.i_max = ui(rng);
  return p;
}

DqVector random_disk_current(std::mt19937_64& rng, double i_max) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const double rho = i_max * std::sqrt(u01(rng));
  const double phi = 2.0 * M_PI * u01(rng);
  return {rho * std::cos(phi), rho * std::sin(phi)};
}

}  // namespace

TEST_CASE("support closed form against the polar-grid oracle") {
  const InverterParams p = table_params();

  SUBCASE("frozen reference direction") {
    const SupportResult sr = support(p, kPq, {1.0, 0.0});
    // gamma = 1.2 i_max^2, |d| = 180 i_max; frozen from the grid oracle.
    CHECK(sr.value == doctest::Approx(1253.3987).epsilon(1e-6));
    CHECK(sr.maximizer_current.d == doctest::Approx(6.667));
    CHECK(sr.maximizer_current.q == doctest::Approx(0.0));
    const double grid = grid_support_oracle(p, kPq, 1.0, 0.0, 801, 1601);
    CHECK(sr.value == doctest::Approx(grid).epsilon(1e-5));
  }

  SUBCASE("random parameter sweep") {
    std::mt19937_64 rng(5);
    for (int set = 0; set < 4; ++set) {
      const InverterParams pr = random_params(rng);
      for (const QuantityPair pair : {kPq, kPv2, kQv2}) {
        double scale = 1.0;
        for (int i = 0; i < 24; ++i)
          scale = std::max(scale, std::abs(support(pr, pair,
                                                   Direction::from_angle(2 * M_PI * i / 24)).value));
        for (int i = 0; i < 24; ++i) {
          const double theta = 2.0 * M_PI * i / 24;
          const double closed = support(pr, pair, Direction::from_angle(theta)).value;
          const double grid = grid_support_oracle(pr, pair, std::cos(theta), std::sin(theta),
                                                   501, 1001);
          CHECK(std::abs(closed - grid) <= 1e-4 * scale);
          CHECK(grid <= closed + 1e-9 * scale);  // the grid never beats the sup
        }
      }
    }
  }

  SUBCASE("positive homogeneity") {
    const SupportResult base = support(p, kPv2, {0.3, -0.8});
    const SupportResult scaled = support(p, kPv2, {3.0 * 0.3, 3.0 * -0.8});
    CHECK(scaled.value == doctest::Approx(3.0 * base.value).epsilon(1e-12));
  }

  SUBCASE("zero current is always dominated") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> uphi(0.0, 2.0 * M_PI);
    const auto [z1, z2] = output_triple(p, {0, 0}).project(kQv2);
    for (int i = 0; i < 100; ++i) {
      const Direction dir = Direction::from_angle(uphi(rng));
      CHECK(support(p, kQv2, dir).value >= dir.x * z1 + dir.y * z2 - 1e-9);
    }
  }
}

TEST_CASE("boundary polyline") {
  const InverterParams p = table_params();

  SUBCASE("four samples give four feasible vertices") {
    const BoundaryPolyline poly = boundary(p, kPq, 4);
    CHECK(poly.vertices.size() == 4);
    for (const BoundaryVertex& v : poly.vertices)
      CHECK(v.preimage.norm() <= p.i_max * (1 + 1e-12));
  }

  SUBCASE("dense PV2 polyline is convex") {
    const BoundaryPolyline poly = boundary(p, kPv2, 3600);
    REQUIRE(poly.vertices.size() >= 3);
    double s_scale = 1.0;
    for (const BoundaryVertex& v : poly.vertices)
      s_scale = std::max({s_scale, std::abs(v.s1), std::abs(v.s2)});
    const std::size_t n = poly.vertices.size();
    for (std::size_t i = 0; i < n; ++i) {
      const BoundaryVertex& a = poly.vertices[i];
      const BoundaryVertex& b = poly.vertices[(i + 1) % n];
      const BoundaryVertex& c = poly.vertices[(i + 2) % n];
      const double cross =
          (b.s1 - a.s1) * (c.s2 - b.s2) - (b.s2 - a.s2) * (c.s1 - b.s1);
      CHECK(cross >= -1e-9 * s_scale * s_scale);
    }
  }

  SUBCASE("preimages sit on the current circle where gamma is non-negative") {
    const QuadraticOutputMap m1 = quadratic_map(p, OutputQuantity::ActivePower);
    const QuadraticOutputMap m2 = quadratic_map(p, OutputQuantity::ReactivePower);
    for (int i = 0; i < 128; ++i) {
      const double theta = 2.0 * M_PI * i / 128;
      const Direction dir = Direction::from_angle(theta);
      const double gamma = dir.x * m1.alpha + dir.y * m2.alpha;
      const DqVector d = dir.x * m1.a_vec + dir.y * m2.a_vec;
      const SupportResult sr = support(p, kPq, dir);
      if (gamma >= 0.0 && d.norm() > 0.0)
        CHECK(sr.maximizer_current.norm() == doctest::Approx(p.i_max).epsilon(1e-12));
    }
  }
}

TEST_CASE("contains") {
  const InverterParams p = table_params();

  SUBCASE("images of feasible currents are members") {
    std::mt19937_64 rng(13);
    for (int i = 0; i < 200; ++i) {
      const DqVector cur = random_disk_current(rng, p.i_max);
      for (const QuantityPair pair : {kPq, kPv2, kQv2}) {
        const auto pt = output_triple(p, cur).project(pair);
        CHECK(contains(p, pair, pt, 1e-6));
      }
    }
  }

  SUBCASE("reference points from the figures") {
    CHECK(contains(p, kPq, {1100.0, 0.0}, 1e-6));
    CHECK_FALSE(contains(p, kPv2, {850.0, 14400.0}, 1e-6));

    // Independent half-plane oracle on a raw output grid.
    double worst_pq = -1e300, worst_pv2 = -1e300;
    for (int i = 0; i < 360; ++i) {
      const double theta = 2.0 * M_PI * i / 360;
      const double dx = std::cos(theta), dy = std::sin(theta);
      const double gpq = grid_support_oracle(p, kPq, dx, dy, 301, 601);
      const double gpv = grid_support_oracle(p, kPv2, dx, dy, 301, 601);
      worst_pq = std::max(worst_pq, (dx * 1100.0 + dy * 0.0 - gpq) / std::max(1.0, std::abs(gpq)));
      worst_pv2 =
          std::max(worst_pv2, (dx * 850.0 + dy * 14400.0 - gpv) / std::max(1.0, std::abs(gpv)));
    }
    CHECK(worst_pq <= 1e-3);   // inside: no supporting half-plane cuts it off
    CHECK(worst_pv2 > 1e-3);   // outside: some half-plane separates it
  }

  SUBCASE("tolerance must be positive") {
    CHECK_THROWS_AS(contains(p, kPq, {0.0, 0.0}, 0.0), std::invalid_argument);
  }
}

TEST_CASE("convex combination preimage") {
  const InverterParams p = table_params();
  const LemmaForm lf = lemma_form(p, OutputQuantity::ActivePower, OutputQuantity::ReactivePower);

  SUBCASE("endpoint cases") {
    const DqVector x1{0.3, -0.4}, x2{-0.5, 0.1};
    const DqVector y1 = convex_combination_preimage(lf, x1, x2, 1.0);
    CHECK(y1.d == doctest::Approx(x1.d).epsilon(1e-12));
    CHECK(y1.q == doctest::Approx(x1.q).epsilon(1e-12));
  }

  SUBCASE("affine case c = 0 returns the plain blend") {
    LemmaForm affine = lf;
    affine.c_vec = {0.0, 0.0};
    const DqVector y = convex_combination_preimage(affine, {0.6, 0.0}, {0.0, 0.8}, 0.5);
    CHECK(y.d == doctest::Approx(0.3));
    CHECK(y.q == doctest::Approx(0.4));
  }

  SUBCASE("reference blend satisfies both postconditions") {
    const DqVector x1{1.0, 0.0}, x2{0.0, 1.0};
    const double lam = 0.5;
    const DqVector y = convex_combination_preimage(lf, x1, x2, lam);
    CHECK(y.norm() <= 1.0 + 1e-9);
    const DqVector z = lam * x1 + (1.0 - lam) * x2;
    const double zeta = lam * x1.norm2() + (1.0 - lam) * x2.norm2();
    const DqVector lhs = y.norm2() * lf.c_vec + y;
    const DqVector rhs = zeta * lf.c_vec + z;
    CHECK((lhs - rhs).norm() <= 1e-9);
  }

  SUBCASE("root bracketing: f2(mu+) never positive") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 2000; ++trial) {
      const InverterParams pr = random_params(rng);
      const LemmaForm lfr =
          lemma_form(pr, OutputQuantity::ActivePower, OutputQuantity::SquaredVoltage);
      const DqVector x1 = (1.0 / pr.i_max) * random_disk_current(rng, pr.i_max);
      const DqVector x2 = (1.0 / pr.i_max) * random_disk_current(rng, pr.i_max);
      const DqVector y = convex_combination_preimage(lfr, x1, x2, 0.37);
      CHECK(y.norm2() - 1.0 <= 1e-9);  // f2 evaluated at the chosen root
    }
  }

  SUBCASE("preconditions are enforced") {
    CHECK_THROWS_AS(convex_combination_preimage(lf, {2.0, 0.0}, {0.0, 0.0}, 0.5),
                    std::domain_error);
    CHECK_THROWS_AS(convex_combination_preimage(lf, {0.5, 0.0}, {0.0, 0.5}, 1.5),
                    std::domain_error);
  }
}

TEST_CASE("midpoint witness") {
  const InverterParams p = table_params();

  SUBCASE("identical endpoints are returned unchanged") {
    const DqVector i{2.0, -1.0};
    const DqVector y = midpoint_witness(p, kPq, i, i, 0.5);
    CHECK(y.d == doctest::Approx(i.d).epsilon(1e-9));
    CHECK(y.q == doctest::Approx(i.q).epsilon(1e-9));
  }

  SUBCASE("random draws across all pairs") {
    std::mt19937_64 rng(19);
    for (int trial = 0; trial < 1000; ++trial) {
      const InverterParams pr = trial % 4 ? random_params(rng) : p;
      for (const QuantityPair pair : {kPq, kPv2, kQv2}) {
        const DqVector i1 = random_disk_current(rng, pr.i_max);
        const DqVector i2 = random_disk_current(rng, pr.i_max);
        const double lam = 0.1 + 0.8 * (trial % 9) / 8.0;
        const DqVector y = midpoint_witness(pr, pair, i1, i2, lam);
        CHECK(y.norm() <= pr.i_max * (1 + 1e-9));
        const auto [a1, a2] = output_triple(pr, i1).project(pair);
        const auto [b1, b2] = output_triple(pr, i2).project(pair);
        const auto [g1, g2] = output_triple(pr, y).project(pair);
        const double w1 = lam * a1 + (1 - lam) * b1;
        const double w2 = lam * a2 + (1 - lam) * b2;
        const double scale = std::max({1.0, std::abs(w1), std::abs(w2)});
        CHECK(std::abs(g1 - w1) <= 1e-8 * scale);
        CHECK(std::abs(g2 - w2) <= 1e-8 * scale);
      }
    }
  }

  SUBCASE("boundary endpoints blend to feasible points") {
    const BoundaryPolyline poly = boundary(p, kPv2, 64);
    for (std::size_t i = 0; i + 1 < poly.vertices.size(); i += 2) {
      const DqVector y =
          midpoint_witness(p, kPv2, poly.vertices[i].preimage, poly.vertices[i + 1].preimage, 0.5);
      CHECK(y.norm() <= p.i_max * (1 + 1e-9));
    }
  }
}
