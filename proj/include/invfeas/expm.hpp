#ifndef INVFEAS_EXPM_HPP
#define INVFEAS_EXPM_HPP

#include <vector>

namespace invfeas {

/// Dense matrix exponential by scaling-and-squaring with a truncated Taylor
/// series. Row-major n x n input. Used as an integrator-independent reference
/// for linear closed loops.
std::vector<double> expm(const std::vector<double>& a, int n);

}  // namespace invfeas

#endif
