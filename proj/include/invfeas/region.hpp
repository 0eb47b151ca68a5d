#ifndef INVFEAS_REGION_HPP
#define INVFEAS_REGION_HPP

#include <vector>

#include "invfeas/model.hpp"
#include "invfeas/types.hpp"

namespace invfeas {

/// Unit direction in the output plane of a quantity pair.
struct Direction {
  double x = 1.0;
  double y = 0.0;

  static Direction from_angle(double theta) { return {std::cos(theta), std::sin(theta)}; }
};

struct SupportResult {
  double value = 0.0;          // sup of dir.s over the feasible region
  DqVector maximizer_current;  // a current attaining the sup
};

struct BoundaryVertex {
  double s1 = 0.0;
  double s2 = 0.0;
  DqVector preimage;
};

/// Counterclockwise polyline of feasible-region boundary points with their
/// current-space preimages. Consecutive duplicates are merged.
struct BoundaryPolyline {
  std::vector<BoundaryVertex> vertices;
};

/// Exact support function of the feasible output region: the directional
/// combination collapses to gamma*|I|^2 + d.I + k, maximized in closed form
/// over the current disk.
SupportResult support(const InverterParams& params, QuantityPair pair, Direction dir);

/// Samples the boundary at n_samples equally spaced support directions.
BoundaryPolyline boundary(const InverterParams& params, QuantityPair pair, int n_samples);

/// Half-plane membership test with local angular refinement around the most
/// violated direction. tol is relative to max(1, |support value|).
bool contains(const InverterParams& params, QuantityPair pair,
              std::pair<double, double> point, double tol);

/// Constructive convexity witness in unit-disk coordinates: returns y inside
/// the unit disk whose canonical image |y|^2 c + y equals the lambda-blend of
/// the images of x1 and x2.
DqVector convex_combination_preimage(const LemmaForm& lf, DqVector x1, DqVector x2, double lambda);

/// Full-scale wrapper: a current whose output pair equals the lambda-blend of
/// the output pairs of i1 and i2, with magnitude still within i_max.
DqVector midpoint_witness(const InverterParams& params, QuantityPair pair,
                          DqVector i1, DqVector i2, double lambda);

}  // namespace invfeas

#endif
