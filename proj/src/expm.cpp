#include "invfeas/expm.hpp"

#include <cmath>
#include <stdexcept>

namespace invfeas {

namespace {

std::vector<double> matmul(const std::vector<double>& a, const std::vector<double>& b, int n) {
  std::vector<double> c(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      const double aik = a[i * n + k];
      if (aik == 0.0) continue;
      for (int j = 0; j < n; ++j) c[i * n + j] += aik * b[k * n + j];
    }
  return c;
}

}  // namespace

std::vector<double> expm(const std::vector<double>& a, int n) {
  if (a.size() != static_cast<std::size_t>(n) * n) throw std::invalid_argument("expm: bad size");

  double norm = 0.0;  // infinity norm
  for (int i = 0; i < n; ++i) {
    double row = 0.0;
    for (int j = 0; j < n; ++j) row += std::abs(a[i * n + j]);
    norm = std::max(norm, row);
  }

  int squarings = 0;
  double scale = 1.0;
  while (norm * scale > 0.5) {
    scale *= 0.5;
    ++squarings;
  }

  std::vector<double> as(a);
  for (double& v : as) v *= scale;

  // exp(As) by Taylor; with |As| <= 1/2, 20 terms are far below double eps.
  std::vector<double> result(static_cast<std::size_t>(n) * n, 0.0);
  std::vector<double> term(result);
  for (int i = 0; i < n; ++i) result[i * n + i] = term[i * n + i] = 1.0;
  for (int k = 1; k <= 20; ++k) {
    term = matmul(term, as, n);
    const double inv = 1.0 / k;
    for (std::size_t idx = 0; idx < term.size(); ++idx) {
      term[idx] *= inv;
      result[idx] += term[idx];
    }
  }

  for (int s = 0; s < squarings; ++s) result = matmul(result, result, n);
  return result;
}

}  // namespace invfeas
