#ifndef INVFEAS_MAT3_HPP
#define INVFEAS_MAT3_HPP

#include <array>
#include <cmath>

namespace invfeas {

/// Dense row-major 3x3 matrix, used for the Gram lift and moment matrices.
struct Mat3 {
  std::array<double, 9> e{};

  double& operator()(int i, int j) { return e[3 * i + j]; }
  double operator()(int i, int j) const { return e[3 * i + j]; }

  static Mat3 identity() {
    Mat3 m;
    m(0, 0) = m(1, 1) = m(2, 2) = 1.0;
    return m;
  }

  Mat3& operator+=(const Mat3& o) {
    for (int i = 0; i < 9; ++i) e[i] += o.e[i];
    return *this;
  }
  Mat3& operator-=(const Mat3& o) {
    for (int i = 0; i < 9; ++i) e[i] -= o.e[i];
    return *this;
  }
  Mat3& operator*=(double k) {
    for (double& v : e) v *= k;
    return *this;
  }

  double trace() const { return e[0] + e[4] + e[8]; }

  double frobenius() const {
    double s = 0.0;
    for (double v : e) s += v * v;
    return std::sqrt(s);
  }

  void symmetrize() {
    for (int i = 0; i < 3; ++i)
      for (int j = i + 1; j < 3; ++j) {
        const double m = 0.5 * ((*this)(i, j) + (*this)(j, i));
        (*this)(i, j) = m;
        (*this)(j, i) = m;
      }
  }
};

inline Mat3 operator+(Mat3 a, const Mat3& b) { return a += b; }
inline Mat3 operator-(Mat3 a, const Mat3& b) { return a -= b; }
inline Mat3 operator*(double k, Mat3 a) { return a *= k; }

inline double trace_product(const Mat3& a, const Mat3& b) {
  double s = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) s += a(i, j) * b(j, i);
  return s;
}

/// Eigendecomposition of a symmetric 3x3 matrix by cyclic Jacobi rotations.
/// Eigenvalues ascending; eigenvectors are the columns of `vectors`.
struct SymEigen3 {
  std::array<double, 3> values{};
  Mat3 vectors;  // column k is the eigenvector of values[k]
};

SymEigen3 eigen_sym3(const Mat3& m);

/// Nearest PSD matrix in Frobenius norm: clamp negative eigenvalues to zero.
Mat3 project_psd(const Mat3& m);

}  // namespace invfeas

#endif
