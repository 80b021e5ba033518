#pragma once

#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <vector>

#include "qwlab/bands.hpp"
#include "qwlab/lattice.hpp"
#include "qwlab/ribbon.hpp"
#include "qwlab/walk.hpp"

namespace qwlab {

/// Two-domain interface experiment: theta2 jumps from theta2_left (x < 0) to
/// theta2_right (x >= 0) and a localized walker is released at the wall.
struct EdgeConfig {
  double theta1 = 0.0;
  double theta2_left = 0.0;
  double theta2_right = 0.0;
  int steps = 12;
  int start_x = 0;
  int start_y = 0;
  Spinor spin{1.0, 0.0};
  int edge_width = 4;  // columns counted as the interface band
  LatticeGeometry geometry{64, 64};

  void validate() const {
    geometry.validate();
    if (steps < 0) throw std::invalid_argument("EdgeConfig: steps must be >= 0");
    if (edge_width < 1 || edge_width > geometry.size_x / 2) {
      throw std::invalid_argument("EdgeConfig: edge_width out of range");
    }
    // Keep ballistic bulk components away from the wrap-around interface at
    // x = +-size_x/2 (max bulk speed is 2 columns per step).
    if (geometry.size_x < 4 * steps) {
      throw std::invalid_argument(
          "EdgeConfig: size_x must be at least 4*steps to isolate the interface");
    }
  }
};

struct EdgeStepMetrics {
  int step = 0;
  double p_edge = 0.0;        // probability within the interface band
  double y_drift_edge = 0.0;  // y c.m. conditioned on the interface band
};

struct EdgeMetrics {
  std::vector<EdgeStepMetrics> series;  // entries for steps 0..steps
  double p_edge = 0.0;                  // final-step values
  double y_drift_edge = 0.0;
  bool chirality_defined = false;  // |y_drift_edge| > 0.5 sites
  int chirality = 0;               // sign(y_drift_edge) when defined
  SpinorField state;               // final state (for maps/figures)

  EdgeMetrics() : state(LatticeGeometry{4, 4}, Representation::position) {}
};

namespace detail {

/// Interface-band metrics: probability mass and conditional y center of mass
/// over the edge_width columns centered on the x = -0.5 wall, restricted to
/// the half-lattice window x in [-L/4, L/4) (masking the wrap interface).
inline EdgeStepMetrics edge_metrics(const SpinorField& f, int edge_width, int step) {
  const int sx = f.geometry.size_x, sy = f.geometry.size_y;
  const int lo = -(edge_width / 2);
  const int hi = edge_width - edge_width / 2;
  EdgeStepMetrics m;
  m.step = step;
  double py_sum = 0.0;
  for (int iy = 0; iy < sy; ++iy) {
    const double y = coord(iy, sy);
    for (int ix = 0; ix < sx; ++ix) {
      const int x = coord(ix, sx);
      if (x < -sx / 4 || x >= sx / 4) continue;  // half-lattice mask
      if (x < lo || x >= hi) continue;           // interface band
      const double pr = std::norm(f.up[f.idx(ix, iy)]) + std::norm(f.dn[f.idx(ix, iy)]);
      m.p_edge += pr;
      py_sum += pr * y;
    }
  }
  m.y_drift_edge = m.p_edge > 0.0 ? py_sum / m.p_edge : 0.0;
  return m;
}

}  // namespace detail

/// Release the walker at the interface and track interface-band metrics per
/// step. Chirality is the drift direction along the wall, defined only when
/// the conditional drift exceeds half a site.
inline EdgeMetrics run_edge(const EdgeConfig& cfg) {
  cfg.validate();
  const int sx = cfg.geometry.size_x;
  SpinorField f = delta_state(cfg.geometry, cfg.start_x, cfg.start_y, cfg.spin);
  AngleField angles;
  angles.theta1 = cfg.theta1;
  angles.theta2_of_column.resize(static_cast<size_t>(sx));
  for (int ix = 0; ix < sx; ++ix) {
    angles.theta2_of_column[ix] =
        coord(ix, sx) < 0 ? cfg.theta2_left : cfg.theta2_right;
  }
  EdgeMetrics out;
  out.series.reserve(static_cast<size_t>(cfg.steps) + 1);
  out.series.push_back(detail::edge_metrics(f, cfg.edge_width, 0));
  for (int t = 1; t <= cfg.steps; ++t) {
    f = evolve_inhomogeneous(f, angles, 1);
    out.series.push_back(detail::edge_metrics(f, cfg.edge_width, t));
  }
  const EdgeStepMetrics& last = out.series.back();
  out.p_edge = last.p_edge;
  out.y_drift_edge = last.y_drift_edge;
  out.chirality_defined = std::abs(out.y_drift_edge) > 0.5;
  out.chirality = out.chirality_defined ? (out.y_drift_edge > 0 ? +1 : -1) : 0;
  out.state = f;
  return out;
}

/// Convention-reversal check: negating theta1 and swapping the domain angles
/// must reverse the interface chirality. Inconclusive if either run's
/// chirality is undefined.
struct SwapTest {
  EdgeMetrics base;
  EdgeMetrics swapped;
  bool conclusive = false;
  bool reversed = false;
};

inline SwapTest chirality_swap_test(const EdgeConfig& cfg) {
  SwapTest t;
  t.base = run_edge(cfg);
  EdgeConfig sw = cfg;
  sw.theta1 = -cfg.theta1;
  sw.theta2_left = cfg.theta2_right;
  sw.theta2_right = cfg.theta2_left;
  t.swapped = run_edge(sw);
  t.conclusive = t.base.chirality_defined && t.swapped.chirality_defined;
  t.reversed = t.conclusive && t.base.chirality == -t.swapped.chirality;
  return t;
}

/// Bulk-boundary correspondence: compare the Chern-number mismatch of the two
/// domains against the net chiral modes of the static ribbon spectrum and the
/// dynamical interface chirality. Ribbon interface B is the wall between the
/// left and right domains (the dynamical x = -0.5 wall).
struct BulkBoundaryReport {
  int chern_left = 0;
  int chern_right = 0;
  int delta_chern = 0;  // |C_left - C_right|
  RibbonSpectrum ribbon;
  EdgeMetrics edge;
  bool counts_match = false;     // each interface hosts |delta C| net modes
  bool chirality_match = false;  // ribbon interface-B chirality == dynamical
  bool consistent = false;
};

inline BulkBoundaryReport bulk_boundary_check(const EdgeConfig& cfg,
                                              int ribbon_width = 24,
                                              int ky_samples = 64,
                                              int band_grid = 24,
                                              int workers = 1) {
  cfg.validate();
  BulkBoundaryReport r;
  const BandSolution left = band_solve(cfg.theta1, cfg.theta2_left, band_grid);
  const BandSolution right = band_solve(cfg.theta1, cfg.theta2_right, band_grid);
  r.chern_left = static_cast<int>(std::lround(curvature_plaquette(left).chern));
  r.chern_right = static_cast<int>(std::lround(curvature_plaquette(right).chern));
  r.delta_chern = std::abs(r.chern_left - r.chern_right);
  RibbonParams rp;
  rp.theta1 = cfg.theta1;
  rp.theta2_left = cfg.theta2_left;
  rp.theta2_right = cfg.theta2_right;
  rp.width = ribbon_width;
  rp.ky_samples = ky_samples;
  r.ribbon = ribbon_spectrum(rp, workers);
  r.edge = run_edge(cfg);
  const int modes_a =
      std::abs(r.ribbon.zero_gap_a.net) + std::abs(r.ribbon.pi_gap_a.net);
  const int modes_b =
      std::abs(r.ribbon.zero_gap_b.net) + std::abs(r.ribbon.pi_gap_b.net);
  r.counts_match = modes_a == r.delta_chern && modes_b == r.delta_chern;
  const GapCrossings& wall = r.ribbon.zero_gap_b.net != 0 ? r.ribbon.zero_gap_b
                                                          : r.ribbon.pi_gap_b;
  r.chirality_match = r.edge.chirality_defined && wall.chirality == r.edge.chirality;
  r.consistent = r.counts_match && r.chirality_match;
  return r;
}

}  // namespace qwlab
