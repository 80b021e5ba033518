#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "qwlab/lattice.hpp"
#include "qwlab/spinor.hpp"

namespace qwlab {

/// Parameters of the homogeneous driven walk. One step applies, in order,
/// R(theta1), T_xy, R(theta1), T_y, R(theta2), T_x, and then (while active)
/// the force phase e^{-i F y} on every site. `force_steps` counts the leading
/// steps on which the force acts; -1 means all steps.
struct WalkParams {
  double theta1 = 0.0;
  double theta2 = 0.0;
  double force = 0.0;
  int steps = 0;
  int force_steps = -1;

  int active_force_steps() const { return force_steps < 0 ? steps : force_steps; }
};

enum class Axis { x, y, xy };

namespace detail {
inline void require_position(const SpinorField& f, const char* op) {
  if (f.rep != Representation::position) {
    throw std::invalid_argument(std::string(op) + ": requires position representation");
  }
}
}  // namespace detail

/// In-place coin rotation by `theta` on every site.
inline void apply_spin_rotation(SpinorField& f, double theta) {
  detail::require_position(f, "spin_rotation");
  const double c = std::cos(theta / 2), s = std::sin(theta / 2);
  for (size_t i = 0; i < f.up.size(); ++i) {
    const cplx u = f.up[i], d = f.dn[i];
    f.up[i] = c * u - s * d;
    f.dn[i] = s * u + c * d;
  }
}

/// In-place coin rotation with a column-dependent angle (indexed by ix).
inline void apply_spin_rotation_columns(SpinorField& f,
                                        const std::vector<double>& theta_of_column) {
  detail::require_position(f, "spin_rotation");
  const int sx = f.geometry.size_x, sy = f.geometry.size_y;
  if (static_cast<int>(theta_of_column.size()) != sx) {
    throw std::invalid_argument("spin_rotation: angle array must have size_x entries");
  }
  std::vector<double> cv(sx), sv(sx);
  for (int ix = 0; ix < sx; ++ix) {
    cv[ix] = std::cos(theta_of_column[ix] / 2);
    sv[ix] = std::sin(theta_of_column[ix] / 2);
  }
  for (int iy = 0; iy < sy; ++iy) {
    const size_t row = static_cast<size_t>(iy) * sx;
    for (int ix = 0; ix < sx; ++ix) {
      const cplx u = f.up[row + ix], d = f.dn[row + ix];
      f.up[row + ix] = cv[ix] * u - sv[ix] * d;
      f.dn[row + ix] = sv[ix] * u + cv[ix] * d;
    }
  }
}

namespace detail {

/// Cyclic shift of each spin component: spin-up by +1, spin-down by -1 sites
/// along the axis.
inline void shift_x(std::vector<cplx>& a, int sx, int sy, int by) {
  std::vector<cplx> row(static_cast<size_t>(sx));
  for (int iy = 0; iy < sy; ++iy) {
    cplx* r = a.data() + static_cast<size_t>(iy) * sx;
    for (int ix = 0; ix < sx; ++ix) row[ix] = r[((ix - by) % sx + sx) % sx];
    for (int ix = 0; ix < sx; ++ix) r[ix] = row[ix];
  }
}

inline void shift_y(std::vector<cplx>& a, int sx, int sy, int by) {
  std::vector<cplx> tmp(a.size());
  for (int iy = 0; iy < sy; ++iy) {
    const int src = ((iy - by) % sy + sy) % sy;
    for (int ix = 0; ix < sx; ++ix)
      tmp[static_cast<size_t>(iy) * sx + ix] = a[static_cast<size_t>(src) * sx + ix];
  }
  a.swap(tmp);
}

}  // namespace detail

/// In-place spin-dependent translation: spin-up moves +1 and spin-down -1
/// along the axis; Axis::xy is exactly the composition of the x and the y
/// translation (one diagonal move).
inline void apply_translation(SpinorField& f, Axis axis) {
  detail::require_position(f, "translate");
  const int sx = f.geometry.size_x, sy = f.geometry.size_y;
  if (axis == Axis::x || axis == Axis::xy) {
    detail::shift_x(f.up, sx, sy, +1);
    detail::shift_x(f.dn, sx, sy, -1);
  }
  if (axis == Axis::y || axis == Axis::xy) {
    detail::shift_y(f.up, sx, sy, +1);
    detail::shift_y(f.dn, sx, sy, -1);
  }
}

/// Pure translation op.
inline SpinorField translate(const SpinorField& f, Axis axis) {
  SpinorField out = f;
  apply_translation(out, axis);
  return out;
}

/// In-place force phase e^{-i F y}: under the forward transform
/// psi_hat(k) = (1/sqrt N) sum e^{+ik.x} psi(x), positive F raises the k_y
/// label of every plane-wave component by F.
inline void apply_force_phase(SpinorField& f, double force) {
  detail::require_position(f, "force_phase");
  const int sx = f.geometry.size_x, sy = f.geometry.size_y;
  for (int iy = 0; iy < sy; ++iy) {
    const cplx ph = std::polar(1.0, -force * coord(iy, sy));
    const size_t row = static_cast<size_t>(iy) * sx;
    for (int ix = 0; ix < sx; ++ix) {
      f.up[row + ix] *= ph;
      f.dn[row + ix] *= ph;
    }
  }
}

/// One walk step at step index `t` (0-based; `t` decides force activity).
inline SpinorField walk_step(const SpinorField& state, const WalkParams& p, int t) {
  SpinorField f = state;
  apply_spin_rotation(f, p.theta1);
  apply_translation(f, Axis::xy);
  apply_spin_rotation(f, p.theta1);
  apply_translation(f, Axis::y);
  apply_spin_rotation(f, p.theta2);
  apply_translation(f, Axis::x);
  const int nf = p.force_steps < 0 ? (p.steps > 0 ? p.steps : t + 1) : p.force_steps;
  if (p.force != 0.0 && t < nf) apply_force_phase(f, p.force);
  return f;
}

/// Evolve `p.steps` walk steps.
inline SpinorField evolve(const SpinorField& state, const WalkParams& p) {
  SpinorField f = state;
  for (int t = 0; t < p.steps; ++t) f = walk_step(f, p, t);
  return f;
}

/// Column-dependent second coin angle (indexed by ix); theta1 is shared.
struct AngleField {
  double theta1 = 0.0;
  std::vector<double> theta2_of_column;
};

/// Evolve with a column-dependent theta2 and no force. With a uniform angle
/// array this reproduces evolve() with force=0 bit for bit.
inline SpinorField evolve_inhomogeneous(const SpinorField& state,
                                        const AngleField& angles, int steps) {
  SpinorField f = state;
  for (int t = 0; t < steps; ++t) {
    apply_spin_rotation(f, angles.theta1);
    apply_translation(f, Axis::xy);
    apply_spin_rotation(f, angles.theta1);
    apply_translation(f, Axis::y);
    apply_spin_rotation_columns(f, angles.theta2_of_column);
    apply_translation(f, Axis::x);
  }
  return f;
}

}  // namespace qwlab
