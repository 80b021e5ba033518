#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "qwlab/bands.hpp"
#include "qwlab/gaussian_fit.hpp"
#include "qwlab/lattice.hpp"
#include "qwlab/packets.hpp"
#include "qwlab/pool.hpp"
#include "qwlab/walk.hpp"

namespace qwlab {

/// Parameters shared by the wave-packet transport protocols.
struct DriftParams {
  double theta1 = 0.0;
  double theta2 = 0.0;
  double force = 0.1 * pi;
  int steps = 10;
  int force_steps = -1;  // -1: force active on every step
  double dk = 0.095 * pi;
  Readout readout = Readout::gaussian_fit;
  LatticeGeometry geometry{64, 64};

  int active_force_steps() const { return force_steps < 0 ? steps : force_steps; }
  /// Total quasimomentum span swept by the drive, F * (active force steps).
  double span() const { return force * active_force_steps(); }
};

struct DriftRecord {
  double kx_c = 0.0, ky_c = 0.0;
  double x_plus = 0.0;   // drift of the +F run
  double x_minus = 0.0;  // drift of the -F run
  double lambda = 0.0;   // antisymmetrized Hall drift (x_plus - x_minus)/2
  double band_overlap = 1.0;  // min final lower-band weight over the two runs
  bool leakage_warning = false;  // band_overlap < 0.9
};

namespace detail {
inline double band_weight(const SpinorField& f) {
  const double n = norm(f);
  return n * n;
}
}  // namespace detail

/// Differential Hall drift of a lower-band packet at (kx_c, ky_c).
///
/// Runs the drive with +F and with -F; the -F run starts at
/// ky_c + F * force_steps so both runs sweep the same quasimomentum path in
/// opposite directions, cancelling the symmetric group-velocity displacement.
/// Readout is the x center of the lower-band-projected state, measured before
/// and after each run with the same band grid (and the same gauge).
inline DriftRecord hall_drift(const DriftParams& p, double kx_c, double ky_c,
                              const BandGrid& bands) {
  if (p.steps <= 0) throw std::invalid_argument("hall_drift: steps must be positive");
  if (p.force_steps > p.steps) {
    throw std::invalid_argument("hall_drift: force_steps exceeds steps");
  }
  const int nf = p.active_force_steps();
  DriftRecord r;
  r.kx_c = kx_c;
  r.ky_c = ky_c;
  double drift[2] = {0.0, 0.0}, weight[2] = {0.0, 0.0};
  int slot = 0;
  for (int sgn : {+1, -1}) {
    WavePacketSpec spec;
    spec.kx_c = kx_c;
    spec.ky_c = sgn > 0 ? ky_c : ky_c + p.force * nf;
    spec.dk = p.dk;
    SpinorField f = prepare_wavepacket(spec, bands);
    const double x0 = read_center(marginal_x(project_band(f, bands)), p.readout);
    WalkParams wp{p.theta1, p.theta2, sgn * p.force, p.steps, p.force_steps};
    f = evolve(f, wp);
    const SpinorField fp = project_band(f, bands);
    weight[slot] = detail::band_weight(fp);
    drift[slot] = read_center(marginal_x(fp), p.readout) - x0;
    ++slot;
  }
  r.x_plus = drift[0];
  r.x_minus = drift[1];
  r.lambda = (drift[0] - drift[1]) / 2;
  r.band_overlap = std::min(weight[0], weight[1]);
  r.leakage_warning = r.band_overlap < 0.9;
  return r;
}

inline DriftRecord hall_drift(const DriftParams& p, double kx_c, double ky_c) {
  return hall_drift(p, kx_c, ky_c,
                    BandGrid::make(p.geometry, p.theta1, p.theta2, kx_c));
}

/// Midpoint scan grid over one reduced-zone period [-pi/2, pi/2).
inline double scan_midpoint(int j, int n) { return -pi / 2 + (j + 0.5) * pi / n; }

struct BlochChernResult {
  double chern = 0.0;                 // sum(lambda) * (pi/n) / (2 pi)
  std::vector<DriftRecord> columns;   // one full-period drive per kx column
  std::vector<double> lambda_oracle;  // Berry-curvature path integrals
  double min_overlap = 1.0;
};

/// Chern number from Bloch-oscillation Hall drifts: each kx column is driven
/// through one full quasimomentum period and the drifts are summed as a
/// Riemann sum over kx. Columns use band grids anchored at their own kx.
inline BlochChernResult chern_bloch_oscillation(const DriftParams& p,
                                                int n_columns = 11,
                                                int workers = 1) {
  if (n_columns < 1) throw std::invalid_argument("chern_bloch_oscillation: n_columns");
  BlochChernResult out;
  out.columns.resize(static_cast<size_t>(n_columns));
  out.lambda_oracle.resize(static_cast<size_t>(n_columns));
  parallel_for_indexed(static_cast<size_t>(n_columns), workers, [&](size_t j) {
    const double kx = scan_midpoint(static_cast<int>(j), n_columns);
    const BandGrid bands = BandGrid::make(p.geometry, p.theta1, p.theta2, kx);
    out.columns[j] = hall_drift(p, kx, 0.0, bands);
    out.lambda_oracle[j] =
        curvature_path_average(p.theta1, p.theta2, kx, 0.0, p.span());
  });
  for (const DriftRecord& r : out.columns) {
    out.chern += r.lambda;
    out.min_overlap = std::min(out.min_overlap, r.band_overlap);
  }
  out.chern *= (pi / n_columns) / (2 * pi);
  return out;
}

struct CurvatureScanPoint {
  double kx_c = 0.0, ky_c = 0.0;
  double lambda = 0.0;
  double omega_measured = 0.0;  // lambda / span
  double omega_oracle = 0.0;    // path integral / span
  double band_overlap = 1.0;
  bool leakage_warning = false;
};

struct CurvatureScan {
  int n = 0;
  double span = 0.0;
  std::vector<CurvatureScanPoint> points;  // index j*n + i: kx column j, ky row i
  double chern_transport = 0.0;            // sum(omega) * (pi/n)^2 / (2 pi)
  double mean_abs_dev = 0.0;               // vs the path-integral oracle
  double max_abs_dev = 0.0;
};

/// Berry-curvature map from partial-span Hall drifts on an n x n midpoint
/// grid of the reduced zone. Each measured value is the curvature averaged
/// over the swept path; the oracle is the same average computed from band
/// theory, so deviations isolate measurement bias.
inline CurvatureScan reconstruct_curvature(const DriftParams& p, int n = 11,
                                           int workers = 1) {
  if (n < 1) throw std::invalid_argument("reconstruct_curvature: n");
  CurvatureScan out;
  out.n = n;
  out.span = p.span();
  if (out.span <= 0) {
    throw std::invalid_argument("reconstruct_curvature: needs a nonzero force span");
  }
  out.points.resize(static_cast<size_t>(n) * n);
  parallel_for_indexed(static_cast<size_t>(n), workers, [&](size_t j) {
    const double kx = scan_midpoint(static_cast<int>(j), n);
    const BandGrid bands = BandGrid::make(p.geometry, p.theta1, p.theta2, kx);
    for (int i = 0; i < n; ++i) {
      const double ky = scan_midpoint(i, n);
      const DriftRecord r = hall_drift(p, kx, ky, bands);
      CurvatureScanPoint& pt = out.points[j * n + i];
      pt.kx_c = kx;
      pt.ky_c = ky;
      pt.lambda = r.lambda;
      pt.omega_measured = r.lambda / out.span;
      pt.omega_oracle =
          curvature_path_average(p.theta1, p.theta2, kx, ky, out.span) / out.span;
      pt.band_overlap = r.band_overlap;
      pt.leakage_warning = r.leakage_warning;
    }
  });
  double dev_sum = 0.0;
  for (const CurvatureScanPoint& pt : out.points) {
    out.chern_transport += pt.omega_measured;
    const double d = std::abs(pt.omega_measured - pt.omega_oracle);
    dev_sum += d;
    out.max_abs_dev = std::max(out.max_abs_dev, d);
  }
  out.chern_transport *= (pi / n) * (pi / n) / (2 * pi);
  out.mean_abs_dev = dev_sum / static_cast<double>(out.points.size());
  return out;
}

/// Per-step y center of mass (full state, moment readout) of a driven packet;
/// element t is after t steps, element 0 the prepared packet. Under a full-
/// period drive the trajectory is a closed Bloch oscillation.
inline std::vector<double> bloch_recurrence(const DriftParams& p, double kx_c,
                                            double ky_c) {
  WavePacketSpec spec;
  spec.kx_c = kx_c;
  spec.ky_c = ky_c;
  spec.dk = p.dk;
  SpinorField f = prepare_wavepacket(spec, p.geometry, p.theta1, p.theta2);
  WalkParams wp{p.theta1, p.theta2, p.force, p.steps, p.force_steps};
  std::vector<double> y;
  y.reserve(static_cast<size_t>(p.steps) + 1);
  y.push_back(circular_mean(marginal_y(f), f.geometry.size_y));
  for (int t = 0; t < p.steps; ++t) {
    f = walk_step(f, wp, t);
    y.push_back(circular_mean(marginal_y(f), f.geometry.size_y));
  }
  return y;
}

}  // namespace qwlab
