#pragma once

#include <fftw3.h>

#include <cmath>
#include <cstdint>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "qwlab/spinor.hpp"

namespace qwlab {

/// Rectangular periodic lattice. Sizes must be even (the walk translates by
/// one site per substep and the momentum grid needs the +-pi points paired)
/// and at least 4.
struct LatticeGeometry {
  int size_x = 64;
  int size_y = 64;

  void validate() const {
    if (size_x < 4 || size_y < 4 || size_x % 2 != 0 || size_y % 2 != 0) {
      throw std::invalid_argument(
          "LatticeGeometry: sizes must be even and at least 4 (got " +
          std::to_string(size_x) + "x" + std::to_string(size_y) + ")");
    }
  }
  std::int64_t num_sites() const {
    return static_cast<std::int64_t>(size_x) * size_y;
  }
  bool operator==(const LatticeGeometry&) const = default;
};

/// Position-space coordinate label of grid index i: x = i - L/2, so labels run
/// -L/2 .. L/2-1 and the origin sits at index L/2.
inline int coord(int index, int size) { return index - size / 2; }
inline int index_of_coord(int x, int size) { return x + size / 2; }

/// Momentum label of grid index m: k = 2*pi*m/L folded to (-pi, pi].
inline double momentum_value(int m, int size) {
  double k = 2.0 * pi * m / size;
  return k > pi ? k - 2.0 * pi : k;
}

enum class Representation { position, momentum };

/// Two-component spinor field on the lattice, row-major [y][x]:
/// element (ix, iy) lives at up[iy*size_x + ix]. A representation tag records
/// whether the data are position amplitudes psi(x) or momentum amplitudes
/// psi_hat(k); transform and measurement routines enforce it.
struct SpinorField {
  LatticeGeometry geometry;
  Representation rep = Representation::position;
  std::vector<cplx> up, dn;

  explicit SpinorField(LatticeGeometry g = {},
                       Representation r = Representation::position)
      : geometry(g), rep(r) {
    geometry.validate();
    up.assign(static_cast<size_t>(geometry.num_sites()), cplx{});
    dn.assign(static_cast<size_t>(geometry.num_sites()), cplx{});
  }

  size_t idx(int ix, int iy) const {
    return static_cast<size_t>(iy) * geometry.size_x + ix;
  }
};

inline double norm(const SpinorField& f) {
  double s = 0.0;
  for (size_t i = 0; i < f.up.size(); ++i) s += std::norm(f.up[i]) + std::norm(f.dn[i]);
  return std::sqrt(s);
}

inline void normalize(SpinorField& f) {
  const double n = norm(f);
  if (n == 0.0) throw std::invalid_argument("normalize: zero field");
  for (size_t i = 0; i < f.up.size(); ++i) { f.up[i] /= n; f.dn[i] /= n; }
}

/// Delta state at centered coordinates (x, y) with the given spinor.
inline SpinorField delta_state(const LatticeGeometry& g, int x, int y,
                               const Spinor& s = {1.0, 0.0}) {
  SpinorField f(g);
  const int ix = index_of_coord(x, g.size_x), iy = index_of_coord(y, g.size_y);
  if (ix < 0 || ix >= g.size_x || iy < 0 || iy >= g.size_y) {
    throw std::invalid_argument("delta_state: site outside lattice");
  }
  f.up[f.idx(ix, iy)] = s[0];
  f.dn[f.idx(ix, iy)] = s[1];
  return f;
}

/// Normalized plane wave labeled k: psi_k(x) = e^{-i k.x} / sqrt(N) times the
/// spinor. Under the forward transform psi_hat(k') = (1/sqrt N) sum_x
/// e^{+i k'.x} psi(x) this state maps to a delta at k' = k.
inline SpinorField plane_wave(const LatticeGeometry& g, double kx, double ky,
                              const Spinor& s = {1.0, 0.0}) {
  SpinorField f(g);
  const double a = 1.0 / std::sqrt(static_cast<double>(g.num_sites()));
  for (int iy = 0; iy < g.size_y; ++iy) {
    const double y = coord(iy, g.size_y);
    for (int ix = 0; ix < g.size_x; ++ix) {
      const double x = coord(ix, g.size_x);
      const cplx ph = std::polar(a, -(kx * x + ky * y));
      f.up[f.idx(ix, iy)] = s[0] * ph;
      f.dn[f.idx(ix, iy)] = s[1] * ph;
    }
  }
  return f;
}

namespace detail {

/// Process-wide FFTW plan cache. Plan creation is not thread safe; execution
/// via fftw_execute_dft on caller buffers is. Plans are created once per
/// (size_y, size_x, direction) with FFTW_ESTIMATE (deterministic algorithm
/// choice) and FFTW_UNALIGNED (caller buffers need no special alignment).
class FftPlans {
 public:
  static FftPlans& instance() {
    static FftPlans p;
    return p;
  }

  void execute(int sy, int sx, int sign, cplx* in, cplx* out) {
    fftw_plan plan;
    {
      std::lock_guard<std::mutex> lock(mu_);
      auto key = std::make_tuple(sy, sx, sign);
      auto it = cache_.find(key);
      if (it == cache_.end()) {
        std::vector<cplx> dummy(static_cast<size_t>(sy) * sx);
        plan = fftw_plan_dft_2d(sy, sx,
                                reinterpret_cast<fftw_complex*>(dummy.data()),
                                reinterpret_cast<fftw_complex*>(dummy.data()),
                                sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
        cache_.emplace(key, plan);
      } else {
        plan = it->second;
      }
    }
    fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(in),
                     reinterpret_cast<fftw_complex*>(out));
  }

 private:
  FftPlans() = default;
  std::mutex mu_;
  std::map<std::tuple<int, int, int>, fftw_plan> cache_;
};

}  // namespace detail

/// Forward transform psi_hat(k_m) = (1/sqrt N) sum_x e^{+i k_m.x} psi(x) with
/// centered x. In index space this is the unnormalized inverse DFT times the
/// per-index parity (-1)^{mx+my} (from the half-lattice coordinate offset),
/// divided by sqrt(N).
inline SpinorField to_momentum(const SpinorField& f) {
  if (f.rep == Representation::momentum) {
    throw std::invalid_argument("to_momentum: input is already in momentum representation");
  }
  const int sx = f.geometry.size_x, sy = f.geometry.size_y;
  SpinorField out(f.geometry, Representation::momentum);
  auto& plans = detail::FftPlans::instance();
  std::vector<cplx> buf(f.up);
  plans.execute(sy, sx, FFTW_BACKWARD, buf.data(), out.up.data());
  buf = f.dn;
  plans.execute(sy, sx, FFTW_BACKWARD, buf.data(), out.dn.data());
  const double a = 1.0 / std::sqrt(static_cast<double>(f.geometry.num_sites()));
  for (int iy = 0; iy < sy; ++iy) {
    for (int ix = 0; ix < sx; ++ix) {
      const double s = ((ix + iy) & 1) ? -a : a;
      out.up[out.idx(ix, iy)] *= s;
      out.dn[out.idx(ix, iy)] *= s;
    }
  }
  return out;
}

/// Inverse of to_momentum.
inline SpinorField to_position(const SpinorField& f) {
  if (f.rep == Representation::position) {
    throw std::invalid_argument("to_position: input is already in position representation");
  }
  const int sx = f.geometry.size_x, sy = f.geometry.size_y;
  SpinorField out(f.geometry, Representation::position);
  const double a = 1.0 / std::sqrt(static_cast<double>(f.geometry.num_sites()));
  std::vector<cplx> buf(f.up.size());
  auto& plans = detail::FftPlans::instance();
  for (int pass = 0; pass < 2; ++pass) {
    const std::vector<cplx>& src = pass == 0 ? f.up : f.dn;
    std::vector<cplx>& dst = pass == 0 ? out.up : out.dn;
    for (int iy = 0; iy < sy; ++iy) {
      for (int ix = 0; ix < sx; ++ix) {
        const size_t i = static_cast<size_t>(iy) * sx + ix;
        buf[i] = ((ix + iy) & 1) ? -src[i] : src[i];
      }
    }
    plans.execute(sy, sx, FFTW_FORWARD, buf.data(), dst.data());
    for (auto& v : dst) v *= a;
  }
  return out;
}

/// Site probabilities |up|^2 + |dn|^2 in field layout.
inline std::vector<double> probability_map(const SpinorField& f) {
  std::vector<double> p(f.up.size());
  for (size_t i = 0; i < p.size(); ++i) p[i] = std::norm(f.up[i]) + std::norm(f.dn[i]);
  return p;
}

inline std::vector<double> marginal_x(const SpinorField& f) {
  if (f.rep != Representation::position) {
    throw std::invalid_argument("marginal_x: requires position representation");
  }
  std::vector<double> p(static_cast<size_t>(f.geometry.size_x), 0.0);
  for (int iy = 0; iy < f.geometry.size_y; ++iy) {
    for (int ix = 0; ix < f.geometry.size_x; ++ix) {
      const size_t i = f.idx(ix, iy);
      p[ix] += std::norm(f.up[i]) + std::norm(f.dn[i]);
    }
  }
  return p;
}

inline std::vector<double> marginal_y(const SpinorField& f) {
  if (f.rep != Representation::position) {
    throw std::invalid_argument("marginal_y: requires position representation");
  }
  std::vector<double> p(static_cast<size_t>(f.geometry.size_y), 0.0);
  for (int iy = 0; iy < f.geometry.size_y; ++iy) {
    for (int ix = 0; ix < f.geometry.size_x; ++ix) {
      const size_t i = f.idx(ix, iy);
      p[iy] += std::norm(f.up[i]) + std::norm(f.dn[i]);
    }
  }
  return p;
}

/// Moment mean of a periodic 1D distribution, unwrapped around its peak:
/// coordinates are relabeled x_peak + d with d in [-L/2, L/2), so a packet
/// straddling the wrap seam is measured contiguously. Coordinates are the
/// centered labels of `coord`, scaled by `spacing` (1 for position axes).
inline double circular_mean(const std::vector<double>& p, int size,
                            double spacing = 1.0) {
  const int L = size;
  int ipk = 0;
  for (int i = 1; i < L; ++i) {
    if (p[i] > p[ipk]) ipk = i;
  }
  double num = 0.0, den = 0.0;
  const double xpk = coord(ipk, L) * spacing;
  for (int i = 0; i < L; ++i) {
    int d = ((i - ipk) % L + L + L / 2) % L - L / 2;
    num += p[i] * (xpk + d * spacing);
    den += p[i];
  }
  return num / den;
}

struct CenterOfMass {
  double x = 0.0;
  double y = 0.0;
  /// True when a non-negligible part of the distribution sits on both sides of
  /// the wrap seam of the corresponding axis (>1% within two sites of each
  /// seam edge); the unwrapped mean is then peak-anchored but ambiguous.
  bool seam_warning_x = false;
  bool seam_warning_y = false;
};

namespace detail {
inline bool straddles_seam(const std::vector<double>& p) {
  const int L = static_cast<int>(p.size());
  double total = 0.0;
  for (double v : p) total += v;
  if (total <= 0.0) return false;
  const double lo = (p[0] + p[1]) / total, hi = (p[L - 2] + p[L - 1]) / total;
  return lo > 0.01 && hi > 0.01;
}
}  // namespace detail

/// Center of mass of the site distribution, each axis unwrapped around its
/// marginal's peak.
inline CenterOfMass center_of_mass(const SpinorField& f) {
  const auto px = marginal_x(f), py = marginal_y(f);
  CenterOfMass c;
  c.x = circular_mean(px, f.geometry.size_x);
  c.y = circular_mean(py, f.geometry.size_y);
  c.seam_warning_x = detail::straddles_seam(px);
  c.seam_warning_y = detail::straddles_seam(py);
  return c;
}

}  // namespace qwlab
