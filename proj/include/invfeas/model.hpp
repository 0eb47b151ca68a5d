#ifndef INVFEAS_MODEL_HPP
#define INVFEAS_MODEL_HPP

#include <stdexcept>

#include "invfeas/types.hpp"

namespace invfeas {

/// Steady-state P, Q, Vsq at a given equilibrium current.
struct OutputTriple {
  double p = 0.0;     // W
  double q = 0.0;     // VAr
  double v_sq = 0.0;  // V^2

  double get(OutputQuantity qty) const {
    switch (qty) {
      case OutputQuantity::ActivePower: return p;
      case OutputQuantity::ReactivePower: return q;
      case OutputQuantity::SquaredVoltage: return v_sq;
    }
    return 0.0;
  }

  std::pair<double, double> project(QuantityPair pair) const {
    return {get(pair.first), get(pair.second)};
  }
};

/// One output quantity written as alpha*|I|^2 + a_vec.I + offset.
struct QuadraticOutputMap {
  double alpha = 0.0;   // quantity / A^2
  DqVector a_vec;       // quantity / A
  double offset = 0.0;  // quantity units

  double eval(DqVector i_bar) const { return alpha * i_bar.norm2() + dot(a_vec, i_bar) + offset; }
};

/// A quantity pair normalized to the unit current disk x = I/i_max, together
/// with the vector c that turns the pair into the canonical form |x|^2 c + x.
struct LemmaForm {
  double alpha_n = 0.0;
  double beta_n = 0.0;
  DqVector a_n;
  DqVector b_n;
  DqVector c_vec;
  double offset1 = 0.0;
  double offset2 = 0.0;
};

class SingularPair : public std::runtime_error {
 public:
  explicit SingularPair(const std::string& what) : std::runtime_error(what) {}
};

/// A = [[-R/L, w], [-w, -R/L]]; skew part w, equal diagonal -R/L.
Mat2 system_matrix(const InverterParams& params);

/// Equilibrium voltage V = E - L*A*I for a commanded steady current.
DqVector steady_state_voltage(const InverterParams& params, DqVector i_bar);

/// P, Q and squared voltage magnitude at the equilibrium reached by i_bar.
OutputTriple output_triple(const InverterParams& params, DqVector i_bar);

/// Isotropic-quadratic form of one output quantity as a function of current.
QuadraticOutputMap quadratic_map(const InverterParams& params, OutputQuantity qty);

/// Unit-disk normalization of a quantity pair. Throws SingularPair when the
/// two linear coefficient vectors are (numerically) dependent.
LemmaForm lemma_form(const InverterParams& params, OutputQuantity q1, OutputQuantity q2);

}  // namespace invfeas

#endif
