#ifndef INVFEAS_OPTIMIZER_HPP
#define INVFEAS_OPTIMIZER_HPP

#include <cstdint>
#include <optional>

#include "invfeas/mat3.hpp"
#include "invfeas/model.hpp"
#include "invfeas/types.hpp"

namespace invfeas {

/// Lifted variable W of the semidefinite formulation: blocks [I I^T, I; I^T, 1].
struct GramMatrix {
  Mat3 w;

  static GramMatrix from_current(DqVector i_bar) {
    GramMatrix g;
    const std::array<double, 3> v{i_bar.d, i_bar.q, 1.0};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) g.w(i, j) = v[i] * v[j];
    return g;
  }

  DqVector linear_block() const { return {w(0, 2), w(1, 2)}; }
};

/// Symmetric matrix M with Tr(M W) equal to one output quantity at rank-1 W.
struct MomentMatrix {
  Mat3 m;
};

/// f(S1,S2) = 1/2 (S1-t1)^2 + gamma/2 (S2-t2)^2.
struct TrackingObjective {
  double target1 = 0.0;
  double target2 = 0.0;
  double gamma = 1.0;

  void validate() const {
    if (!(gamma >= 0.0)) throw std::invalid_argument("TrackingObjective: gamma must be >= 0");
  }

  double eval(double s1, double s2) const {
    const double e1 = s1 - target1, e2 = s2 - target2;
    return 0.5 * e1 * e1 + 0.5 * gamma * e2 * e2;
  }
};

enum class SolveMethod { Sdp, FrankWolfe, Grid };

struct SolveReport {
  double s1 = 0.0;
  double s2 = 0.0;
  DqVector i_star;
  double objective = 0.0;
  std::optional<GramMatrix> w_star;
  double rank1_residual = 0.0;
  std::int64_t iterations = 0;
  SolveMethod method = SolveMethod::Sdp;
  bool converged = true;       // false means iteration cap hit with residual KKT error
  bool regularized = false;    // nuclear-norm fallback re-solve was engaged
  bool rank1_fallback = false; // leading-eigenvector extraction was engaged
};

struct SdpOptions {
  std::int64_t max_iterations = 100000;
  double plateau_tol = 1e-10;   // objective decrease per 20 iterations, relative
  double kkt_tol = 1e-5;        // relative gradient-mapping norm for convergence
  double rank1_tol = 1e-6;
  bool regularize = false;      // add nuclear-norm weight up front (normally off)
};

struct ExtractResult {
  DqVector current;
  double residual = 0.0;   // |W_topleft - I I^T|_F / max(1, tr W)
  bool fallback = false;   // leading-eigenvector fit was used
};

MomentMatrix build_moment_matrix(const InverterParams& params, OutputQuantity qty);

/// Reads the current off the linear block of W; falls back to the scaled
/// leading eigenvector when the rank-1 residual exceeds tol.
ExtractResult extract_current(const GramMatrix& w, double tol);

/// Projected-gradient solve of the lifted tracking problem with alternating
/// projections onto the PSD cone and the trace-cap/normalization slice.
SolveReport solve_sdp(const InverterParams& params, QuantityPair pair,
                      const TrackingObjective& obj, const SdpOptions& opts = {});

/// Conditional-gradient solve in the output plane using the exact support
/// function as linear-minimization oracle.
SolveReport solve_frank_wolfe(const InverterParams& params, QuantityPair pair,
                              const TrackingObjective& obj);

/// Polar-grid search over the current disk with local refinement.
SolveReport brute_force(const InverterParams& params, QuantityPair pair,
                        const TrackingObjective& obj, int grid_n);

}  // namespace invfeas

#endif
