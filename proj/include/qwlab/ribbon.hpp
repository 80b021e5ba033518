#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "qwlab/bands.hpp"
#include "qwlab/pool.hpp"
#include "qwlab/spinor.hpp"

namespace qwlab {

/// Two-domain cylinder: `width` columns of theta2_left followed by `width`
/// columns of theta2_right, periodic along x, Fourier-transformed along y.
/// Interface B sits between columns width-1 and width (the domain wall that
/// maps to x = -0.5 of the dynamical lattice); interface A is the periodic
/// wrap between columns 2*width-1 and 0.
struct RibbonParams {
  double theta1 = 0.0;
  double theta2_left = 0.0;
  double theta2_right = 0.0;
  int width = 24;       // columns per domain
  int ky_samples = 64;  // midpoint grid over one pi period of k_y
};

/// Per-interface counting result in one Floquet gap: signed net number of
/// chiral gap crossings, the implied chirality (sign of the group velocity
/// v_y = -d eps/d k_y at the crossings), and the mean crossing velocity.
struct GapCrossings {
  int net = 0;
  int chirality = 0;  // 0 when no crossing
  double velocity = 0.0;
};

struct RibbonSpectrum {
  RibbonParams params;
  std::vector<double> ky;
  /// Per ky sample: quasienergies of the even-column block (dimension
  /// 2*width) and each state's probability weight within 8 raw columns of
  /// interface A / interface B.
  std::vector<std::vector<double>> eps;
  std::vector<std::vector<double>> loc_a, loc_b;
  GapCrossings zero_gap_a, zero_gap_b, pi_gap_a, pi_gap_b;
  double window_zero = 0.0, window_pi = 0.0;
  bool width_warning = false;  // width < 16: interfaces may hybridize
};

namespace detail {

/// Dense one-step operator of the two-domain chain at fixed k_y, restricted
/// to the even-column sublattice (x-parity is conserved: every step moves x
/// by two substeps of +-1). Basis within the block: (even column c, spin s)
/// at index 2*c + s, even columns in increasing order 0, 2, 4, ...
inline Eigen::MatrixXcd ribbon_even_block(const RibbonParams& p, double ky) {
  const int lx = 2 * p.width;
  const int n = 2 * lx;
  using M = Eigen::MatrixXcd;
  M r1 = M::Zero(n, n), r2 = M::Zero(n, n), ty = M::Zero(n, n),
    tx = M::Zero(n, n), txy = M::Zero(n, n);
  const cplx eup = std::polar(1.0, +ky), edn = std::polar(1.0, -ky);
  for (int x = 0; x < lx; ++x) {
    const double th2 = x < p.width ? p.theta2_left : p.theta2_right;
    const Mat2 m1 = spin_rotation(p.theta1), m2 = spin_rotation(th2);
    r1(2 * x, 2 * x) = m1.a;
    r1(2 * x, 2 * x + 1) = m1.b;
    r1(2 * x + 1, 2 * x) = m1.c;
    r1(2 * x + 1, 2 * x + 1) = m1.d;
    r2(2 * x, 2 * x) = m2.a;
    r2(2 * x, 2 * x + 1) = m2.b;
    r2(2 * x + 1, 2 * x) = m2.c;
    r2(2 * x + 1, 2 * x + 1) = m2.d;
    ty(2 * x, 2 * x) = eup;
    ty(2 * x + 1, 2 * x + 1) = edn;
    tx(2 * ((x + 1) % lx), 2 * x) = 1.0;
    tx(2 * ((x - 1 + lx) % lx) + 1, 2 * x + 1) = 1.0;
    txy(2 * ((x + 1) % lx), 2 * x) = eup;
    txy(2 * ((x - 1 + lx) % lx) + 1, 2 * x + 1) = edn;
  }
  const M u = tx * r2 * ty * r1 * txy * r1;
  M block(lx, lx);
  for (int ci = 0; ci < lx / 2; ++ci) {
    for (int cj = 0; cj < lx / 2; ++cj) {
      for (int si = 0; si < 2; ++si)
        for (int sj = 0; sj < 2; ++sj)
          block(2 * ci + si, 2 * cj + sj) = u(4 * ci + si, 4 * cj + sj);
    }
  }
  return block;
}

inline double torus_distance(double a, double b, double period) {
  const double d = std::fmod(std::abs(a - b), period);
  return std::min(d, period - d);
}

}  // namespace detail

/// Diagonalize the two-domain ribbon on a k_y midpoint grid and count chiral
/// gap-crossing interface modes per interface and per Floquet gap.
///
/// Counting: per sample, the tracked mode of (interface, gap) is the most
/// interface-localized state (weight >= 0.9 within 8 columns) inside the gap
/// window (95% of half the smaller bulk gap of the two domains); signed sign
/// changes of its gap coordinate between cyclically consecutive samples give
/// the net chiral count, and the crossing slope gives the mode velocity.
inline RibbonSpectrum ribbon_spectrum(const RibbonParams& p, int workers = 1) {
  if (p.width < 4) throw std::invalid_argument("ribbon_spectrum: width < 4");
  if (p.ky_samples < 8) throw std::invalid_argument("ribbon_spectrum: need >= 8 ky samples");
  RibbonSpectrum out;
  out.params = p;
  out.width_warning = p.width < 16;

  const BandSolution left = band_solve(p.theta1, p.theta2_left, 96);
  const BandSolution right = band_solve(p.theta1, p.theta2_right, 96);
  out.window_zero = 0.95 * std::min(left.gap_zero, right.gap_zero) / 2;
  out.window_pi = 0.95 * std::min(left.gap_pi, right.gap_pi) / 2;

  const int lx = 2 * p.width;
  const int nky = p.ky_samples;
  out.ky.resize(nky);
  out.eps.assign(nky, {});
  out.loc_a.assign(nky, {});
  out.loc_b.assign(nky, {});

  parallel_for_indexed(nky, workers, [&](int j) {
    const double ky = -pi / 2 + (j + 0.5) * pi / nky;
    out.ky[j] = ky;
    const Eigen::MatrixXcd block = detail::ribbon_even_block(p, ky);
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(block, true);
    const auto& lam = es.eigenvalues();
    const auto& vec = es.eigenvectors();
    const int dim = lx;  // 2 * (lx/2) states
    out.eps[j].resize(dim);
    out.loc_a[j].resize(dim);
    out.loc_b[j].resize(dim);
    for (int s = 0; s < dim; ++s) {
      out.eps[j][s] = -std::arg(lam[s]);
      double la = 0.0, lb = 0.0;
      for (int c = 0; c < lx / 2; ++c) {
        const double col = 2.0 * c;  // raw column index
        const double w =
            std::norm(vec(2 * c, s)) + std::norm(vec(2 * c + 1, s));
        if (detail::torus_distance(col, -0.5, lx) <= 8.0) la += w;
        if (detail::torus_distance(col, p.width - 0.5, lx) <= 8.0) lb += w;
      }
      out.loc_a[j][s] = la;
      out.loc_b[j][s] = lb;
    }
  });

  // Track and count per (interface, gap).
  auto count = [&](bool interface_b, bool pi_gap) {
    const double window = pi_gap ? out.window_pi : out.window_zero;
    std::vector<std::optional<double>> track(nky);
    if (window <= 0.0) return GapCrossings{};
    for (int j = 0; j < nky; ++j) {
      double best_loc = 0.0;
      for (size_t s = 0; s < out.eps[j].size(); ++s) {
        const double e = out.eps[j][s];
        const double coordv = pi_gap ? std::remainder(e - pi, 2 * pi) : e;
        const double loc = interface_b ? out.loc_b[j][s] : out.loc_a[j][s];
        if (std::abs(coordv) < window && loc >= 0.9 && loc > best_loc) {
          best_loc = loc;
          track[j] = coordv;
        }
      }
    }
    GapCrossings g;
    double vsum = 0.0;
    int vcount = 0;
    const double dky = pi / nky;
    for (int j = 0; j < nky; ++j) {
      const auto& a = track[j];
      const auto& b = track[(j + 1) % nky];
      if (a && b && (*a) * (*b) < 0 && std::abs(*b - *a) < window * 1.5) {
        g.net += (*b > *a) ? 1 : -1;
        vsum += -(*b - *a) / dky;  // v_y = -d eps / d k_y
        ++vcount;
      }
    }
    if (vcount > 0) g.velocity = vsum / vcount;
    g.chirality = g.net == 0 ? 0 : (g.net > 0 ? -1 : +1);
    return g;
  };
  out.zero_gap_a = count(false, false);
  out.zero_gap_b = count(true, false);
  out.pi_gap_a = count(false, true);
  out.pi_gap_b = count(true, true);
  return out;
}

}  // namespace qwlab
