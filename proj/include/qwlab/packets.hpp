#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "qwlab/bands.hpp"
#include "qwlab/lattice.hpp"

namespace qwlab {

/// Lower-band quasienergies and eigenspinors on the lattice momentum grid
/// (field layout, index m <-> momentum 2 pi m / L folded to (-pi, pi]).
///
/// Gauge ("comb"): parallel transport along k_y down the anchor column, then
/// along k_x per row, each outward from the anchor with the seam at the
/// antipodal index. Every phase is then fixed by smooth neighbor overlaps up
/// to one observable-irrelevant global factor (the raw eigensolver phase at
/// the anchor point), so prepared packets carry no branch-switch phase kinks
/// and are reproducible across implementations. Partial-span drifts and all
/// y-profile observables depend on this smoothness.
struct BandGrid {
  LatticeGeometry geometry;
  double theta1 = 0.0, theta2 = 0.0;
  int anchor_column = 0;
  int anchor_row = 0;
  std::vector<double> eps;  // lower band, idx = iy*size_x + ix
  std::vector<Spinor> u;    // lower band

  size_t idx(int ix, int iy) const {
    return static_cast<size_t>(iy) * geometry.size_x + ix;
  }

  static BandGrid make(const LatticeGeometry& g, double theta1, double theta2,
                       double anchor_kx = 0.0, double anchor_ky = 0.0) {
    g.validate();
    BandGrid b;
    b.geometry = g;
    b.theta1 = theta1;
    b.theta2 = theta2;
    const int sx = g.size_x, sy = g.size_y;
    b.eps.resize(static_cast<size_t>(g.num_sites()));
    b.u.resize(static_cast<size_t>(g.num_sites()));
    for (int iy = 0; iy < sy; ++iy) {
      const double ky = momentum_value(iy, sy);
      for (int ix = 0; ix < sx; ++ix) {
        const BandPoint bp = band_at(theta1, theta2, momentum_value(ix, sx), ky);
        b.eps[b.idx(ix, iy)] = bp.eps_lower;
        b.u[b.idx(ix, iy)] = bp.u_lower;
      }
    }
    // Anchor indices: grid point nearest the anchor on the momentum circle.
    auto nearest = [](double k, int size) {
      int best_m = 0;
      double best = 1e300;
      for (int m = 0; m < size; ++m) {
        const double d = std::abs(std::remainder(momentum_value(m, size) - k, 2 * pi));
        if (d < best) {
          best = d;
          best_m = m;
        }
      }
      return best_m;
    };
    const int ixc = nearest(anchor_kx, sx);
    const int iyc = nearest(anchor_ky, sy);
    b.anchor_column = ixc;
    b.anchor_row = iyc;
    auto transport = [&](int ix_from, int iy_from, int ix_to, int iy_to) {
      const cplx ov = inner(b.u[b.idx(ix_from, iy_from)], b.u[b.idx(ix_to, iy_to)]);
      const cplx ph = std::polar(1.0, -std::arg(ov));
      b.u[b.idx(ix_to, iy_to)][0] *= ph;
      b.u[b.idx(ix_to, iy_to)][1] *= ph;
    };
    // Parallel transport along k_y within the anchor column.
    for (int step = 1; step <= sy / 2; ++step) {
      for (int sgn : {+1, -1}) {
        if (sgn < 0 && step == sy / 2) continue;
        const int iy = ((iyc + sgn * step) % sy + sy) % sy;
        const int iyp = ((iyc + sgn * (step - 1)) % sy + sy) % sy;
        transport(ixc, iyp, ixc, iy);
      }
    }
    // Parallel transport along k_x per row, bidirectionally from the anchor.
    for (int step = 1; step <= sx / 2; ++step) {
      for (int sgn : {+1, -1}) {
        if (sgn < 0 && step == sx / 2) continue;
        const int ix = ((ixc + sgn * step) % sx + sx) % sx;
        const int ixp = ((ixc + sgn * (step - 1)) % sx + sx) % sx;
        for (int iy = 0; iy < sy; ++iy) transport(ixp, iy, ix, iy);
      }
    }
    return b;
  }
};

enum class BandSelect { lower, upper, fixed_spin };

/// Gaussian wave packet centered at (kx_c, ky_c) in momentum and at the
/// origin in position. `dk` is the standard deviation of the momentum-space
/// probability distribution; the amplitude envelope is
/// exp(-|k - k_c|^2 / (4 dk^2)) (amplitude sigma = dk * sqrt(2)).
struct WavePacketSpec {
  double kx_c = 0.0;
  double ky_c = 0.0;
  double dk = 0.095 * pi;
  BandSelect band = BandSelect::lower;
  Spinor spin{1.0, 0.0};  // used by fixed_spin

  void validate(const LatticeGeometry& g) const {
    g.validate();
    if (dk <= 0.0) throw std::invalid_argument("WavePacketSpec: dk must be positive");
    const double min_size = std::min(g.size_x, g.size_y);
    if (1.0 / dk > min_size / 6.0) {
      throw std::invalid_argument(
          "WavePacketSpec: packet too wide for the lattice (need 1/dk <= size/6)");
    }
  }
};

namespace detail {
inline Spinor packet_spinor(const WavePacketSpec& spec, const BandGrid& bands,
                            size_t i) {
  switch (spec.band) {
    case BandSelect::lower:
      return bands.u[i];
    case BandSelect::upper:
      return orthogonal_spinor(bands.u[i]);
    case BandSelect::fixed_spin:
      return spec.spin;
  }
  return {1.0, 0.0};
}
}  // namespace detail

/// Build the packet from a precomputed band grid (the grid's geometry and
/// angles define the band structure; its gauge defines the packet phases).
/// The position c.m. is recentered onto the origin with two passes of the
/// momentum-space phase e^{-i k.c}.
inline SpinorField prepare_wavepacket(const WavePacketSpec& spec,
                                      const BandGrid& bands) {
  const LatticeGeometry g = bands.geometry;
  spec.validate(g);
  const int sx = g.size_x, sy = g.size_y;
  SpinorField fk(g, Representation::momentum);
  for (int iy = 0; iy < sy; ++iy) {
    const double dy = std::remainder(momentum_value(iy, sy) - spec.ky_c, 2 * pi);
    for (int ix = 0; ix < sx; ++ix) {
      const double dx = std::remainder(momentum_value(ix, sx) - spec.kx_c, 2 * pi);
      const double env = std::exp(-(dx * dx + dy * dy) / (4 * spec.dk * spec.dk));
      const size_t i = fk.idx(ix, iy);
      const Spinor s = detail::packet_spinor(spec, bands, i);
      fk.up[i] = env * s[0];
      fk.dn[i] = env * s[1];
    }
  }
  SpinorField f = to_position(fk);
  normalize(f);
  for (int pass = 0; pass < 2; ++pass) {
    const CenterOfMass c = center_of_mass(f);
    SpinorField k2 = to_momentum(f);
    for (int iy = 0; iy < sy; ++iy) {
      const double ky = momentum_value(iy, sy);
      for (int ix = 0; ix < sx; ++ix) {
        const double kx = momentum_value(ix, sx);
        const cplx ph = std::polar(1.0, -(kx * c.x + ky * c.y));
        const size_t i = k2.idx(ix, iy);
        k2.up[i] *= ph;
        k2.dn[i] *= ph;
      }
    }
    f = to_position(k2);
  }
  return f;
}

/// Convenience overload building its own anchor-at-center band grid.
inline SpinorField prepare_wavepacket(const WavePacketSpec& spec,
                                      const LatticeGeometry& g, double theta1,
                                      double theta2) {
  return prepare_wavepacket(spec, BandGrid::make(g, theta1, theta2, spec.kx_c));
}

/// Total weight of the state in the selected band (gauge invariant).
inline double band_overlap(const SpinorField& f, const BandGrid& bands,
                           BandSelect band = BandSelect::lower) {
  const SpinorField* fk = &f;
  SpinorField tmp{f.geometry, Representation::momentum};
  if (f.rep == Representation::position) {
    tmp = to_momentum(f);
    fk = &tmp;
  }
  double tot = 0.0;
  for (size_t i = 0; i < fk->up.size(); ++i) {
    const Spinor u = band == BandSelect::upper ? orthogonal_spinor(bands.u[i]) : bands.u[i];
    tot += std::norm(std::conj(u[0]) * fk->up[i] + std::conj(u[1]) * fk->dn[i]);
  }
  return tot;
}

/// Project onto the selected band; the result keeps the input representation.
inline SpinorField project_band(const SpinorField& f, const BandGrid& bands,
                                BandSelect band = BandSelect::lower) {
  const bool was_position = f.rep == Representation::position;
  SpinorField fk = was_position ? to_momentum(f) : f;
  for (size_t i = 0; i < fk.up.size(); ++i) {
    const Spinor u = band == BandSelect::upper ? orthogonal_spinor(bands.u[i]) : bands.u[i];
    const cplx amp = std::conj(u[0]) * fk.up[i] + std::conj(u[1]) * fk.dn[i];
    fk.up[i] = amp * u[0];
    fk.dn[i] = amp * u[1];
  }
  return was_position ? to_position(fk) : fk;
}

/// Spin-summed momentum marginals (require momentum representation).
inline std::vector<double> momentum_marginal_x(const SpinorField& f) {
  if (f.rep != Representation::momentum) {
    throw std::invalid_argument("momentum_marginal_x: requires momentum representation");
  }
  std::vector<double> p(static_cast<size_t>(f.geometry.size_x), 0.0);
  for (int iy = 0; iy < f.geometry.size_y; ++iy)
    for (int ix = 0; ix < f.geometry.size_x; ++ix)
      p[ix] += std::norm(f.up[f.idx(ix, iy)]) + std::norm(f.dn[f.idx(ix, iy)]);
  return p;
}

inline std::vector<double> momentum_marginal_y(const SpinorField& f) {
  if (f.rep != Representation::momentum) {
    throw std::invalid_argument("momentum_marginal_y: requires momentum representation");
  }
  std::vector<double> p(static_cast<size_t>(f.geometry.size_y), 0.0);
  for (int iy = 0; iy < f.geometry.size_y; ++iy)
    for (int ix = 0; ix < f.geometry.size_x; ++ix)
      p[iy] += std::norm(f.up[f.idx(ix, iy)]) + std::norm(f.dn[f.idx(ix, iy)]);
  return p;
}

struct MomentumMoments {
  double mean = 0.0;
  double sigma = 0.0;
};

/// Mean and standard deviation of a momentum marginal, unwrapped around its
/// peak on the momentum circle (grid labels 2 pi m / L).
inline MomentumMoments momentum_moments(const std::vector<double>& p) {
  const int L = static_cast<int>(p.size());
  int ipk = 0;
  for (int i = 1; i < L; ++i)
    if (p[i] > p[ipk]) ipk = i;
  const double spacing = 2 * pi / L;
  const double kpk = momentum_value(ipk, L);
  double tot = 0.0, mean = 0.0;
  std::vector<double> kk(L);
  for (int i = 0; i < L; ++i) {
    const int d = ((i - ipk) % L + L + L / 2) % L - L / 2;
    kk[i] = kpk + d * spacing;
    tot += p[i];
    mean += p[i] * kk[i];
  }
  mean /= tot;
  double var = 0.0;
  for (int i = 0; i < L; ++i) var += p[i] * (kk[i] - mean) * (kk[i] - mean);
  return {mean, std::sqrt(var / tot)};
}

}  // namespace qwlab
