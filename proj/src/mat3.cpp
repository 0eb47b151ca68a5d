#include "invfeas/mat3.hpp"

#include <algorithm>
#include <utility>

namespace invfeas {

SymEigen3 eigen_sym3(const Mat3& m) {
  Mat3 a = m;
  a.symmetrize();
  Mat3 v = Mat3::identity();

  const double scale = std::max(a.frobenius(), 1e-300);
  constexpr int kMaxSweeps = 30;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    double off = std::sqrt(a(0, 1) * a(0, 1) + a(0, 2) * a(0, 2) + a(1, 2) * a(1, 2));
    if (off <= 1e-15 * scale) break;
    for (int p = 0; p < 2; ++p) {
      for (int q = p + 1; q < 3; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        // Smaller-angle rotation root, standard Jacobi choice.
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        for (int k = 0; k < 3; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < 3; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (int k = 0; k < 3; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  SymEigen3 out;
  std::array<int, 3> order{0, 1, 2};
  std::array<double, 3> diag{a(0, 0), a(1, 1), a(2, 2)};
  std::sort(order.begin(), order.end(), [&](int i, int j) { return diag[i] < diag[j]; });
  for (int k = 0; k < 3; ++k) {
    out.values[k] = diag[order[k]];
    for (int r = 0; r < 3; ++r) out.vectors(r, k) = v(r, order[k]);
  }
  return out;
}

Mat3 project_psd(const Mat3& m) {
  const SymEigen3 eig = eigen_sym3(m);
  Mat3 out;
  for (int k = 0; k < 3; ++k) {
    const double lam = std::max(eig.values[k], 0.0);
    if (lam == 0.0) continue;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) out(i, j) += lam * eig.vectors(i, k) * eig.vectors(j, k);
  }
  out.symmetrize();
  return out;
}

}  // namespace invfeas
