#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "qwlab/spinor.hpp"

namespace qwlab {

/// Momentum-space one-step operator of the homogeneous walk,
/// U(k) = T_x R(theta2) T_y R(theta1) T_x T_y R(theta1)
/// (T_x T_y is the diagonal translation's symbol). U is in SU(2); its
/// eigenvalues e^{-i eps} define quasienergies, and every matrix element is
/// pi-periodic in each momentum component, so the reduced Brillouin zone is
/// [-pi/2, pi/2)^2.
inline Mat2 bloch_operator(double theta1, double theta2, double kx, double ky) {
  const Mat2 r1 = spin_rotation(theta1), r2 = spin_rotation(theta2);
  const Mat2 tx = translation_phase(kx), ty = translation_phase(ky);
  return tx * r2 * ty * r1 * tx * ty * r1;
}

/// Lower-band quasienergy eps in (-pi, 0] and its eigenspinor.
struct BandPoint {
  double eps_lower = 0.0;
  Spinor u_lower{};
};

/// Closed-form eigensolve of the 2x2 unitary. The lower band is the
/// eigenvalue e^{-i eps_lower} in the closed upper half plane; the eigenvector
/// comes from whichever adjugate column is better conditioned, with a
/// deterministic basis fallback at exactly diagonal, near-degenerate points.
inline BandPoint band_at(double theta1, double theta2, double kx, double ky) {
  const Mat2 u = bloch_operator(theta1, theta2, kx, ky);
  const double ceps = std::clamp(std::real(u.trace()) / 2, -1.0, 1.0);
  const double eps_u = std::acos(ceps);  // in [0, pi]
  const cplx lam = std::polar(1.0, eps_u);  // e^{-i eps_lower}, eps_lower=-eps_u

  const Spinor v1{u.b, lam - u.a};
  const Spinor v2{lam - std::conj(u.a), -std::conj(u.b)};
  const double n1 = std::sqrt(norm2(v1)), n2 = std::sqrt(norm2(v2));
  Spinor v = n1 >= n2 ? v1 : v2;
  double n = std::max(n1, n2);
  if (n < 1e-9) {
    const bool up_is_lower = std::abs(std::polar(1.0, std::arg(u.a)) - lam) < 1e-6;
    v = up_is_lower ? Spinor{1.0, 0.0} : Spinor{0.0, 1.0};
    n = 1.0;
  }
  return {-eps_u, Spinor{v[0] / n, v[1] / n}};
}

/// Upper-band eigenspinor: the orthogonal complement of the lower one.
inline Spinor orthogonal_spinor(const Spinor& v) {
  return {-std::conj(v[1]), std::conj(v[0])};
}

/// Lower band sampled on an n x n grid over the reduced zone, k_i = -pi/2 +
/// pi*i/n, flattened as idx = i_kx * n + i_ky. The two Floquet gaps are
/// measured through eps = 0 and through eps = +-pi; `gap` is their minimum
/// (a closure of either kind invalidates single-band quantities), and
/// `gap_closed` flags gap < 1e-6.
struct BandSolution {
  double theta1 = 0.0, theta2 = 0.0;
  int n = 0;
  std::vector<double> eps_lower;
  std::vector<Spinor> u_lower;
  double gap_zero = 0.0;
  double gap_pi = 0.0;
  double gap = 0.0;
  bool gap_closed = false;

  double k_of(int i) const { return -pi / 2 + pi * i / n; }
  size_t idx(int i_kx, int i_ky) const {
    return static_cast<size_t>(i_kx) * n + i_ky;
  }
  double eps_upper_at(size_t i) const { return -eps_lower[i]; }
};

inline BandSolution band_solve(double theta1, double theta2, int n = 96) {
  if (n < 4) throw std::invalid_argument("band_solve: need a grid of at least 4");
  BandSolution s;
  s.theta1 = theta1;
  s.theta2 = theta2;
  s.n = n;
  s.eps_lower.resize(static_cast<size_t>(n) * n);
  s.u_lower.resize(static_cast<size_t>(n) * n);
  double amin = pi, amax = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const BandPoint bp = band_at(theta1, theta2, s.k_of(i), s.k_of(j));
      s.eps_lower[s.idx(i, j)] = bp.eps_lower;
      s.u_lower[s.idx(i, j)] = bp.u_lower;
      const double a = std::abs(bp.eps_lower);
      amin = std::min(amin, a);
      amax = std::max(amax, a);
    }
  }
  s.gap_zero = 2 * amin;
  s.gap_pi = 2 * (pi - amax);
  s.gap = std::min(s.gap_zero, s.gap_pi);
  s.gap_closed = s.gap < 1e-6;
  return s;
}

/// Berry curvature of the lower band from gauge-invariant plaquette link
/// products on the reduced-zone grid (counterclockwise in (kx, ky)). The
/// total is an exact Chern integer for any grid fine enough to resolve the
/// gap; omega[i,j] is the curvature of the plaquette with lower-left corner
/// (i, j), omega = -Arg(product)/area.
struct CurvatureMap {
  int n = 0;
  std::vector<double> omega;  // idx = i_kx * n + i_ky
  double chern = 0.0;

  size_t idx(int i, int j) const { return static_cast<size_t>(i) * n + j; }
};

inline CurvatureMap curvature_plaquette(const BandSolution& s) {
  if (s.gap_closed) {
    throw std::invalid_argument(
        "curvature_plaquette: gap closed; single-band curvature undefined");
  }
  const int n = s.n;
  CurvatureMap m;
  m.n = n;
  m.omega.resize(static_cast<size_t>(n) * n);
  const double area = (pi / n) * (pi / n);
  double tot = 0.0;
  for (int i = 0; i < n; ++i) {
    const int i2 = (i + 1) % n;
    for (int j = 0; j < n; ++j) {
      const int j2 = (j + 1) % n;
      const cplx p = inner(s.u_lower[s.idx(i, j)], s.u_lower[s.idx(i2, j)]) *
                     inner(s.u_lower[s.idx(i2, j)], s.u_lower[s.idx(i2, j2)]) *
                     inner(s.u_lower[s.idx(i2, j2)], s.u_lower[s.idx(i, j2)]) *
                     inner(s.u_lower[s.idx(i, j2)], s.u_lower[s.idx(i, j)]);
      const double arg = std::arg(p);
      m.omega[m.idx(i, j)] = -arg / area;
      tot += arg;
    }
  }
  m.chern = -tot / (2 * pi);
  return m;
}

/// Local Berry curvature from one small plaquette centered at (kx, ky).
inline double curvature_local(double theta1, double theta2, double kx, double ky,
                              double h = pi / 400) {
  const Spinor v00 = band_at(theta1, theta2, kx - h / 2, ky - h / 2).u_lower;
  const Spinor v10 = band_at(theta1, theta2, kx + h / 2, ky - h / 2).u_lower;
  const Spinor v11 = band_at(theta1, theta2, kx + h / 2, ky + h / 2).u_lower;
  const Spinor v01 = band_at(theta1, theta2, kx - h / 2, ky + h / 2).u_lower;
  const cplx p = inner(v00, v10) * inner(v10, v11) * inner(v11, v01) * inner(v01, v00);
  return -std::arg(p) / (h * h);
}

/// Path integral of the lower-band Berry curvature along k_y at fixed k_x:
/// integral_{ky_start}^{ky_start+span} Omega(kx, ky) d ky, by the trapezoid
/// rule on `samples` inclusive points. (Divide by `span` for the path mean.)
inline double curvature_path_average(double theta1, double theta2, double kx,
                                     double ky_start, double span,
                                     int samples = 241) {
  if (samples < 2) throw std::invalid_argument("curvature_path_average: samples >= 2");
  const double dk = span / (samples - 1);
  double tot = 0.0;
  double prev = curvature_local(theta1, theta2, kx, ky_start);
  for (int i = 1; i < samples; ++i) {
    const double cur = curvature_local(theta1, theta2, kx, ky_start + i * dk);
    tot += (prev + cur) / 2 * dk;
    prev = cur;
  }
  return tot;
}

/// Independent Chern oracle: winding of the hybrid Wannier centers. For each
/// k_y, the Wilson loop of the lower band over k_x gives a center in [0,1);
/// the net winding of the centers across one k_y period equals the Chern
/// number.
inline double chern_wannier(double theta1, double theta2, int nk = 48) {
  std::vector<double> centers(nk);
  for (int jy = 0; jy < nk; ++jy) {
    const double ky = -pi / 2 + pi * jy / nk;
    std::vector<Spinor> us(nk);
    for (int jx = 0; jx < nk; ++jx) {
      us[jx] = band_at(theta1, theta2, -pi / 2 + pi * jx / nk, ky).u_lower;
    }
    cplx w = 1.0;
    for (int jx = 0; jx < nk; ++jx) w *= inner(us[jx], us[(jx + 1) % nk]);
    centers[jy] = std::arg(w) / (2 * pi);
  }
  double winding = 0.0;
  for (int jy = 0; jy < nk; ++jy) {
    double d = centers[(jy + 1) % nk] - centers[jy];
    d = d - std::floor(d + 0.5);  // wrap to [-0.5, 0.5)
    winding += d;
  }
  return winding;
}

/// Chern number and gap over a grid of coin angles covering (-pi, pi]^2
/// (left-open grid: theta_i = -pi + 2 pi (i+1) / n). Cells with a closed gap
/// are flagged; their `chern` entry is 0 and must not be interpreted.
struct PhaseDiagram {
  int n1 = 0, n2 = 0;
  std::vector<double> theta1, theta2;
  std::vector<int> chern;         // idx = i1 * n2 + i2
  std::vector<double> gap;
  std::vector<std::uint8_t> gap_closed;

  size_t idx(int i1, int i2) const { return static_cast<size_t>(i1) * n2 + i2; }
};

inline PhaseDiagram phase_diagram(int n1, int n2, int band_grid = 24) {
  PhaseDiagram d;
  d.n1 = n1;
  d.n2 = n2;
  d.theta1.resize(n1);
  d.theta2.resize(n2);
  for (int i = 0; i < n1; ++i) d.theta1[i] = -pi + 2 * pi * (i + 1) / n1;
  for (int i = 0; i < n2; ++i) d.theta2[i] = -pi + 2 * pi * (i + 1) / n2;
  d.chern.assign(static_cast<size_t>(n1) * n2, 0);
  d.gap.assign(static_cast<size_t>(n1) * n2, 0.0);
  d.gap_closed.assign(static_cast<size_t>(n1) * n2, 0);
  for (int i1 = 0; i1 < n1; ++i1) {
    for (int i2 = 0; i2 < n2; ++i2) {
      const BandSolution s = band_solve(d.theta1[i1], d.theta2[i2], band_grid);
      d.gap[d.idx(i1, i2)] = s.gap;
      if (s.gap_closed) {
        d.gap_closed[d.idx(i1, i2)] = 1;
      } else {
        d.chern[d.idx(i1, i2)] =
            static_cast<int>(std::lround(curvature_plaquette(s).chern));
      }
    }
  }
  return d;
}

}  // namespace qwlab
