#ifndef INVFEAS_TYPES_HPP
#define INVFEAS_TYPES_HPP

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace invfeas {

/// A 2-vector in the rotating dq frame (current in A or voltage in V).
struct DqVector {
  double d = 0.0;
  double q = 0.0;

  double norm2() const { return d * d + q * q; }
  double norm() const { return std::sqrt(norm2()); }

  DqVector rotated(double phi) const {
    const double c = std::cos(phi), s = std::sin(phi);
    return {c * d - s * q, s * d + c * q};
  }
};

inline DqVector operator+(DqVector a, DqVector b) { return {a.d + b.d, a.q + b.q}; }
inline DqVector operator-(DqVector a, DqVector b) { return {a.d - b.d, a.q - b.q}; }
inline DqVector operator*(double k, DqVector v) { return {k * v.d, k * v.q}; }
inline DqVector operator-(DqVector v) { return {-v.d, -v.q}; }
inline double dot(DqVector a, DqVector b) { return a.d * b.d + a.q * b.q; }

/// Row-major 2x2 matrix.
struct Mat2 {
  double a11 = 0, a12 = 0, a21 = 0, a22 = 0;

  DqVector apply(DqVector v) const {
    return {a11 * v.d + a12 * v.q, a21 * v.d + a22 * v.q};
  }
  Mat2 transpose() const { return {a11, a21, a12, a22}; }
  double det() const { return a11 * a22 - a12 * a21; }

  // Solves M x = rhs by Cramer's rule. Caller checks det() first.
  DqVector solve(DqVector rhs) const {
    const double dt = det();
    return {(rhs.d * a22 - a12 * rhs.q) / dt, (a11 * rhs.q - rhs.d * a21) / dt};
  }
};

inline Mat2 operator*(double k, const Mat2& m) {
  return {k * m.a11, k * m.a12, k * m.a21, k * m.a22};
}

/// The 90-degree rotation J = [[0,1],[-1,0]] appearing in the reactive-power product.
inline constexpr Mat2 kRotJ{0.0, 1.0, -1.0, 0.0};

/// Circuit constants of the RL-coupled inverter. The grid voltage vector is
/// (e_mag, 0) by convention; the phase is fixed to zero.
struct InverterParams {
  double r = 0.8;        // Ohm
  double l = 1.5e-3;     // H
  double omega = 2.0 * M_PI * 60.0;  // rad/s
  double e_mag = 120.0;  // V
  double i_max = 1200.0 / (1.5 * 120.0);  // A

  DqVector grid_voltage() const { return {e_mag, 0.0}; }

  void validate() const {
    if (!(r > 0.0) || !std::isfinite(r)) throw std::invalid_argument("InverterParams: r must be > 0");
    if (!(l > 0.0) || !std::isfinite(l)) throw std::invalid_argument("InverterParams: l must be > 0");
    if (!(omega > 0.0) || !std::isfinite(omega)) throw std::invalid_argument("InverterParams: omega must be > 0");
    if (!(e_mag > 0.0) || !std::isfinite(e_mag)) throw std::invalid_argument("InverterParams: e_mag must be > 0");
    if (!(i_max > 0.0) || !std::isfinite(i_max)) throw std::invalid_argument("InverterParams: i_max must be > 0");
  }
};

enum class OutputQuantity { ActivePower, ReactivePower, SquaredVoltage };

inline const char* to_string(OutputQuantity qty) {
  switch (qty) {
    case OutputQuantity::ActivePower: return "P";
    case OutputQuantity::ReactivePower: return "Q";
    case OutputQuantity::SquaredVoltage: return "Vsq";
  }
  return "?";
}

/// Two distinct output quantities, e.g. (P, Q) or (P, Vsq).
struct QuantityPair {
  OutputQuantity first = OutputQuantity::ActivePower;
  OutputQuantity second = OutputQuantity::ReactivePower;

  void validate() const {
    if (first == second)
      throw std::invalid_argument("QuantityPair: the two quantities must be distinct");
  }
};

}  // namespace invfeas

#endif
