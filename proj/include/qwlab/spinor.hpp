#pragma once

#include <array>
#include <cmath>
#include <complex>

namespace qwlab {

using cplx = std::complex<double>;
using Spinor = std::array<cplx, 2>;

inline constexpr double pi = 3.14159265358979323846;

inline double norm2(const Spinor& v) { return std::norm(v[0]) + std::norm(v[1]); }

inline cplx inner(const Spinor& a, const Spinor& b) {
  return std::conj(a[0]) * b[0] + std::conj(a[1]) * b[1];
}

/// 2x2 complex matrix, row-major: [[a, b], [c, d]].
struct Mat2 {
  cplx a{}, b{}, c{}, d{};

  static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
  static Mat2 diagonal(cplx p, cplx q) { return {p, 0.0, 0.0, q}; }

  Mat2 operator*(const Mat2& o) const {
    return {a * o.a + b * o.c, a * o.b + b * o.d,
            c * o.a + d * o.c, c * o.b + d * o.d};
  }
  Spinor operator*(const Spinor& v) const {
    return {a * v[0] + b * v[1], c * v[0] + d * v[1]};
  }
  Mat2 adjoint() const {
    return {std::conj(a), std::conj(c), std::conj(b), std::conj(d)};
  }
  cplx trace() const { return a + d; }
  cplx det() const { return a * d - b * c; }
};

/// Coin rotation R(theta) = [[cos(theta/2), -sin(theta/2)],
///                           [sin(theta/2),  cos(theta/2)]].
inline Mat2 spin_rotation(double theta) {
  const double c = std::cos(theta / 2), s = std::sin(theta / 2);
  return {c, -s, s, c};
}

/// Momentum-space symbol of the spin-dependent translation along one axis:
/// spin-up moves +1 (factor e^{+ik}), spin-down moves -1 (factor e^{-ik}).
inline Mat2 translation_phase(double k) {
  return Mat2::diagonal(std::polar(1.0, +k), std::polar(1.0, -k));
}

}  // namespace qwlab
