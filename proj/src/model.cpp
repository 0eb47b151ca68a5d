#include "invfeas/model.hpp"

#include <cmath>

namespace invfeas {

Mat2 system_matrix(const InverterParams& params) {
  params.validate();
  const double rl = params.r / params.l;
  return {-rl, params.omega, -params.omega, -rl};
}

DqVector steady_state_voltage(const InverterParams& params, DqVector i_bar) {
  const Mat2 a = system_matrix(params);
  const DqVector la_i = params.l * a.apply(i_bar);
  return params.grid_voltage() - la_i;
}

OutputTriple output_triple(const InverterParams& params, DqVector i_bar) {
  const DqVector v = steady_state_voltage(params, i_bar);
  OutputTriple out;
  out.p = 1.5 * dot(i_bar, v);
  out.q = 1.5 * dot(i_bar, kRotJ.apply(v));
  out.v_sq = v.norm2();
  return out;
}

QuadraticOutputMap quadratic_map(const InverterParams& params, OutputQuantity qty) {
  params.validate();
  const DqVector e = params.grid_voltage();
  QuadraticOutputMap map;
  switch (qty) {
    case OutputQuantity::ActivePower:
      // P = (3/2) I.(E - LAI); the symmetric part of -LA is R*Id.
      map.alpha = 1.5 * params.r;
      map.a_vec = 1.5 * e;
      map.offset = 0.0;
      break;
    case OutputQuantity::ReactivePower:
      // Q = (3/2) I.J(E - LAI); the symmetric part of -LJA is wL*Id.
      map.alpha = 1.5 * params.omega * params.l;
      map.a_vec = 1.5 * kRotJ.apply(e);
      map.offset = 0.0;
      break;
    case OutputQuantity::SquaredVoltage: {
      // |E - LAI|^2 = |E|^2 - 2L E.AI + L^2 I.A'AI, with A'A = (R^2/L^2 + w^2) Id.
      const Mat2 a = system_matrix(params);
      map.alpha = params.r * params.r + params.omega * params.omega * params.l * params.l;
      map.a_vec = -2.0 * params.l * a.transpose().apply(e);
      map.offset = e.norm2();
      break;
    }
  }
  return map;
}

LemmaForm lemma_form(const InverterParams& params, OutputQuantity q1, OutputQuantity q2) {
  QuantityPair{q1, q2}.validate();
  const QuadraticOutputMap m1 = quadratic_map(params, q1);
  const QuadraticOutputMap m2 = quadratic_map(params, q2);
  const double imax2 = params.i_max * params.i_max;

  LemmaForm lf;
  lf.alpha_n = m1.alpha * imax2;
  lf.beta_n = m2.alpha * imax2;
  lf.a_n = params.i_max * m1.a_vec;
  lf.b_n = params.i_max * m2.a_vec;
  lf.offset1 = m1.offset;
  lf.offset2 = m2.offset;

  const Mat2 rows{lf.a_n.d, lf.a_n.q, lf.b_n.d, lf.b_n.q};
  const double scale = lf.a_n.norm() * lf.b_n.norm();
  if (std::abs(rows.det()) < 1e-12 * scale || scale == 0.0)
    throw SingularPair("lemma_form: linear coefficients are numerically dependent");
  lf.c_vec = rows.solve({lf.alpha_n, lf.beta_n});
  return lf;
}

}  // namespace invfeas
