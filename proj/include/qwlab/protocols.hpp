#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "qwlab/bands.hpp"
#include "qwlab/config.hpp"
#include "qwlab/edge.hpp"
#include "qwlab/output.hpp"
#include "qwlab/packets.hpp"
#include "qwlab/ribbon.hpp"
#include "qwlab/transport.hpp"
#include "qwlab/version.hpp"
#include "qwlab/walk.hpp"

namespace qwlab {

/// Everything a protocol run produces, before any file I/O: the resolved
/// config, one CSV data table, a JSON summary of scalar results, and an
/// optional SVG figure. Identical configs produce byte-identical tables.
struct ResultBundle {
  ExperimentConfig config;
  CsvTable data;
  nlohmann::ordered_json summary;
  std::string figure_svg;  // empty when the protocol has no figure
};

namespace detail {

inline int spectral_chern(double theta1_rad, double theta2_rad, int bz_grid,
                          const char* protocol) {
  const BandSolution s = band_solve(theta1_rad, theta2_rad, bz_grid);
  if (s.gap_closed) {
    throw physics_error(std::string(protocol) +
                        ": Floquet gap closed at the requested angles; "
                        "band quantities are undefined");
  }
  return static_cast<int>(std::lround(curvature_plaquette(s).chern));
}

inline DriftParams drift_params(const ExperimentConfig& c) {
  DriftParams p;
  p.theta1 = c.theta1_rad();
  p.theta2 = c.theta2_rad();
  p.force = c.force_rad();
  p.steps = c.steps;
  p.force_steps = c.force_steps;
  p.dk = c.dk_rad();
  p.readout = c.readout;
  p.geometry = c.geometry();
  return p;
}

inline EdgeConfig edge_config(const ExperimentConfig& c) {
  EdgeConfig e;
  e.theta1 = c.theta1_rad();
  e.theta2_left = c.theta2_left_rad();
  e.theta2_right = c.theta2_right_rad();
  e.steps = c.steps;
  e.start_x = c.start_x;
  e.start_y = c.start_y;
  e.spin = Spinor{cplx(c.spin_up, 0.0), cplx(c.spin_down, 0.0)};
  e.edge_width = c.edge_width;
  e.geometry = c.geometry();
  return e;
}

inline void enforce_strict_leakage(const ExperimentConfig& c, int warnings,
                                   const char* protocol) {
  if (c.strict && warnings > 0) {
    throw physics_error(std::string(protocol) + ": " + std::to_string(warnings) +
                        " drift runs fell below 90% band overlap (strict mode)");
  }
}

inline nlohmann::ordered_json common_summary(const ExperimentConfig& c) {
  nlohmann::ordered_json j;
  j["protocol"] = protocol_name(c.protocol);
  return j;
}

/// Probability heatmap of a position-space state over the whole lattice,
/// axes labeled in site coordinates.
inline HeatmapPanel probability_panel(const SpinorField& f, const std::string& title) {
  const int sx = f.geometry.size_x, sy = f.geometry.size_y;
  HeatmapPanel p;
  p.title = title;
  p.x_label = "x (sites)";
  p.y_label = "y (sites)";
  p.nx = sx;
  p.ny = sy;
  p.x_min = coord(0, sx);
  p.x_max = coord(sx - 1, sx);
  p.y_min = coord(0, sy);
  p.y_max = coord(sy - 1, sy);
  p.values = probability_map(f);  // idx = iy*sx + ix, matching the panel layout
  return p;
}

// ---------------------------------------------------------------------------
// Protocol implementations.
// ---------------------------------------------------------------------------

inline ResultBundle run_bands(const ExperimentConfig& c) {
  const BandSolution s = band_solve(c.theta1_rad(), c.theta2_rad(), c.bz_grid);
  if (s.gap_closed) {
    throw physics_error("bands: Floquet gap closed at the requested angles");
  }
  const CurvatureMap cm = curvature_plaquette(s);
  const int n = s.n;

  ResultBundle b;
  b.config = c;
  b.data.header = {"kx_over_pi", "ky_over_pi", "eps_lower", "eps_upper",
                   "omega_lower"};
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const size_t idx = s.idx(i, j);
      b.data.add_row({CsvTable::cell(s.k_of(i) / pi), CsvTable::cell(s.k_of(j) / pi),
                      CsvTable::cell(s.eps_lower[idx]),
                      CsvTable::cell(s.eps_upper_at(idx)),
                      CsvTable::cell(cm.omega[cm.idx(i, j)])});
    }
  }

  b.summary = common_summary(c);
  b.summary["theta1"] = c.theta1;
  b.summary["theta2"] = c.theta2;
  b.summary["bz_grid"] = c.bz_grid;
  b.summary["gap_zero"] = s.gap_zero;
  b.summary["gap_pi"] = s.gap_pi;
  b.summary["gap"] = s.gap;
  b.summary["chern_lower"] = static_cast<int>(std::lround(cm.chern));
  b.summary["chern_upper"] = -static_cast<int>(std::lround(cm.chern));

  HeatmapPanel panel;
  panel.title = "Berry curvature, lower band";
  panel.x_label = "k_x/pi";
  panel.y_label = "k_y/pi";
  panel.nx = n;
  panel.ny = n;
  panel.x_min = -0.5;
  panel.x_max = 0.5;
  panel.y_min = -0.5;
  panel.y_max = 0.5;
  panel.values.resize(static_cast<size_t>(n) * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      panel.values[static_cast<size_t>(j) * n + i] = cm.omega[cm.idx(i, j)];
    }
  }
  b.figure_svg = svg_heatmap({panel});
  return b;
}

inline ResultBundle run_phase_diagram(const ExperimentConfig& c) {
  const PhaseDiagram d = phase_diagram(c.grid, c.grid, c.bz_grid);

  ResultBundle b;
  b.config = c;
  b.data.header = {"theta1_over_pi", "theta2_over_pi", "chern", "gap", "gap_closed"};
  for (int i1 = 0; i1 < d.n1; ++i1) {
    for (int i2 = 0; i2 < d.n2; ++i2) {
      const size_t idx = d.idx(i1, i2);
      b.data.add_row({CsvTable::cell(d.theta1[i1] / pi),
                      CsvTable::cell(d.theta2[i2] / pi), CsvTable::cell(d.chern[idx]),
                      CsvTable::cell(d.gap[idx]),
                      CsvTable::cell(static_cast<int>(d.gap_closed[idx]))});
    }
  }

  int closed = 0;
  nlohmann::ordered_json phases = nlohmann::ordered_json::object();
  for (int i1 = 0; i1 < d.n1; ++i1) {
    for (int i2 = 0; i2 < d.n2; ++i2) {
      const size_t idx = d.idx(i1, i2);
      if (d.gap_closed[idx]) {
        ++closed;
        continue;
      }
      const std::string key = std::to_string(d.chern[idx]);
      phases[key] = (phases.contains(key) ? phases[key].get<int>() : 0) + 1;
    }
  }
  b.summary = common_summary(c);
  b.summary["grid"] = c.grid;
  b.summary["bz_grid"] = c.bz_grid;
  b.summary["phase_cells"] = phases;
  b.summary["gap_closed_cells"] = closed;

  HeatmapPanel panel;
  panel.title = "Chern number, lower band";
  panel.x_label = "theta1/pi";
  panel.y_label = "theta2/pi";
  panel.nx = d.n1;
  panel.ny = d.n2;
  panel.x_min = d.theta1.front() / pi;
  panel.x_max = d.theta1.back() / pi;
  panel.y_min = d.theta2.front() / pi;
  panel.y_max = d.theta2.back() / pi;
  panel.values.resize(static_cast<size_t>(d.n1) * d.n2);
  for (int i1 = 0; i1 < d.n1; ++i1) {
    for (int i2 = 0; i2 < d.n2; ++i2) {
      panel.values[static_cast<size_t>(i2) * d.n1 + i1] =
          d.gap_closed[d.idx(i1, i2)] ? 0.0 : d.chern[d.idx(i1, i2)];
    }
  }
  b.figure_svg = svg_heatmap({panel});
  return b;
}

inline ResultBundle run_chern_bloch(const ExperimentConfig& c) {
  const DriftParams p = drift_params(c);
  const BlochChernResult r = chern_bloch_oscillation(p, c.grid, c.workers);
  const int chern_spectral =
      spectral_chern(c.theta1_rad(), c.theta2_rad(), c.bz_grid, "chern-bloch");

  ResultBundle b;
  b.config = c;
  b.data.header = {"kx_c_over_pi", "lambda", "lambda_oracle", "band_overlap_final",
                   "leakage_warning"};
  int warnings = 0;
  for (size_t j = 0; j < r.columns.size(); ++j) {
    const DriftRecord& col = r.columns[j];
    warnings += col.leakage_warning ? 1 : 0;
    b.data.add_row({CsvTable::cell(col.kx_c / pi), CsvTable::cell(col.lambda),
                    CsvTable::cell(r.lambda_oracle[j]),
                    CsvTable::cell(col.band_overlap),
                    CsvTable::cell(col.leakage_warning ? 1 : 0)});
  }
  enforce_strict_leakage(c, warnings, "chern-bloch");

  b.summary = common_summary(c);
  b.summary["theta1"] = c.theta1;
  b.summary["theta2"] = c.theta2;
  b.summary["size"] = {c.size_x, c.size_y};
  b.summary["force_over_pi"] = c.force;
  b.summary["steps"] = c.steps;
  b.summary["force_steps"] = c.active_force_steps();
  b.summary["dk_over_pi"] = c.dk;
  b.summary["columns"] = c.grid;
  b.summary["span_over_pi"] = p.span() / pi;
  b.summary["chern_transport"] = r.chern;
  b.summary["chern_spectral"] = chern_spectral;
  b.summary["min_overlap"] = r.min_overlap;
  b.summary["leakage_warnings"] = warnings;
  return b;
}

inline ResultBundle run_curvature_map(const ExperimentConfig& c) {
  const DriftParams p = drift_params(c);
  const CurvatureScan scan = reconstruct_curvature(p, c.grid, c.workers);
  const int chern_spectral =
      spectral_chern(c.theta1_rad(), c.theta2_rad(), c.bz_grid, "curvature-map");

  ResultBundle b;
  b.config = c;
  b.data.header = {"k_xc_over_pi", "k_yc_over_pi",  "lambda",
                   "omega_measured", "omega_oracle", "band_overlap_final"};
  int warnings = 0;
  double min_overlap = 1.0;
  for (const CurvatureScanPoint& pt : scan.points) {
    warnings += pt.leakage_warning ? 1 : 0;
    min_overlap = std::min(min_overlap, pt.band_overlap);
    b.data.add_row({CsvTable::cell(pt.kx_c / pi), CsvTable::cell(pt.ky_c / pi),
                    CsvTable::cell(pt.lambda), CsvTable::cell(pt.omega_measured),
                    CsvTable::cell(pt.omega_oracle),
                    CsvTable::cell(pt.band_overlap)});
  }
  enforce_strict_leakage(c, warnings, "curvature-map");

  b.summary = common_summary(c);
  b.summary["theta1"] = c.theta1;
  b.summary["theta2"] = c.theta2;
  b.summary["size"] = {c.size_x, c.size_y};
  b.summary["force_over_pi"] = c.force;
  b.summary["steps"] = c.steps;
  b.summary["force_steps"] = c.active_force_steps();
  b.summary["dk_over_pi"] = c.dk;
  b.summary["grid"] = c.grid;
  b.summary["span_over_pi"] = scan.span / pi;
  b.summary["chern_transport"] = scan.chern_transport;
  b.summary["chern_spectral"] = chern_spectral;
  b.summary["mean_abs_dev"] = scan.mean_abs_dev;
  b.summary["max_abs_dev"] = scan.max_abs_dev;
  b.summary["min_overlap"] = min_overlap;
  b.summary["leakage_warnings"] = warnings;

  auto panel = [&](const std::string& title, bool measured) {
    HeatmapPanel pn;
    pn.title = title;
    pn.x_label = "k_x/pi";
    pn.y_label = "k_y/pi";
    pn.nx = scan.n;
    pn.ny = scan.n;
    pn.x_min = -0.5;
    pn.x_max = 0.5;
    pn.y_min = -0.5;
    pn.y_max = 0.5;
    pn.values.resize(static_cast<size_t>(scan.n) * scan.n);
    for (int j = 0; j < scan.n; ++j) {
      for (int i = 0; i < scan.n; ++i) {
        const CurvatureScanPoint& pt = scan.points[static_cast<size_t>(j) * scan.n + i];
        pn.values[static_cast<size_t>(i) * scan.n + j] =
            measured ? pt.omega_measured : pt.omega_oracle;
      }
    }
    return pn;
  };
  b.figure_svg = svg_heatmap(
      {panel("Berry curvature (transport)", true), panel("Berry curvature (band theory)", false)});
  return b;
}

inline ResultBundle run_recurrence(const ExperimentConfig& c) {
  const DriftParams p = drift_params(c);
  const std::vector<double> y = bloch_recurrence(p, c.kx_c_rad(), c.ky_c_rad());

  ResultBundle b;
  b.config = c;
  b.data.header = {"step", "y_mean"};
  for (size_t t = 0; t < y.size(); ++t) {
    b.data.add_row({CsvTable::cell(static_cast<int>(t)), CsvTable::cell(y[t])});
  }

  const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
  b.summary = common_summary(c);
  b.summary["theta1"] = c.theta1;
  b.summary["theta2"] = c.theta2;
  b.summary["size"] = {c.size_x, c.size_y};
  b.summary["force_over_pi"] = c.force;
  b.summary["steps"] = c.steps;
  b.summary["force_steps"] = c.active_force_steps();
  b.summary["dk_over_pi"] = c.dk;
  b.summary["kx_c_over_pi"] = c.kx_c;
  b.summary["ky_c_over_pi"] = c.ky_c;
  b.summary["y_return_abs"] = std::abs(y.back() - y.front());
  b.summary["y_max"] = *hi;
  b.summary["y_min"] = *lo;

  // Figure: final-state probability map of the same driven packet.
  WavePacketSpec spec;
  spec.kx_c = c.kx_c_rad();
  spec.ky_c = c.ky_c_rad();
  spec.dk = c.dk_rad();
  SpinorField f = prepare_wavepacket(spec, p.geometry, p.theta1, p.theta2);
  const WalkParams wp{p.theta1, p.theta2, p.force, p.steps, p.force_steps};
  for (int t = 0; t < p.steps; ++t) f = walk_step(f, wp, t);
  b.figure_svg = svg_heatmap({probability_panel(
      f, "P(x,y) after " + std::to_string(c.steps) + " driven steps")});
  return b;
}

inline ResultBundle run_edge_protocol(const ExperimentConfig& c) {
  const EdgeConfig ec = edge_config(c);
  const SwapTest swap = chirality_swap_test(ec);
  const EdgeMetrics& split = swap.base;

  EdgeConfig control_cfg = ec;
  control_cfg.theta2_left = ec.theta2_right;  // homogeneous bulk, no interface
  const EdgeMetrics control = run_edge(control_cfg);

  ResultBundle b;
  b.config = c;
  b.data.header = {"step", "p_edge", "y_drift_edge", "p_edge_control",
                   "y_drift_control", "confinement_ratio"};
  for (size_t t = 0; t < split.series.size(); ++t) {
    const EdgeStepMetrics& s = split.series[t];
    const EdgeStepMetrics& ctl = control.series[t];
    const double ratio = ctl.p_edge > 0.0 ? s.p_edge / ctl.p_edge : 0.0;
    b.data.add_row({CsvTable::cell(s.step), CsvTable::cell(s.p_edge),
                    CsvTable::cell(s.y_drift_edge), CsvTable::cell(ctl.p_edge),
                    CsvTable::cell(ctl.y_drift_edge), CsvTable::cell(ratio)});
  }

  const double ratio_final =
      control.p_edge > 0.0 ? split.p_edge / control.p_edge : 0.0;
  b.summary = common_summary(c);
  b.summary["theta1"] = c.theta1;
  b.summary["theta2_left"] = c.theta2_left;
  b.summary["theta2_right"] = c.theta2_right;
  b.summary["steps"] = c.steps;
  b.summary["edge_width"] = c.edge_width;
  b.summary["size"] = {c.size_x, c.size_y};
  b.summary["start"] = {c.start_x, c.start_y};
  b.summary["p_edge"] = split.p_edge;
  b.summary["y_drift_edge"] = split.y_drift_edge;
  b.summary["chirality_defined"] = split.chirality_defined;
  b.summary["chirality"] = split.chirality;
  b.summary["control_p_edge"] = control.p_edge;
  b.summary["control_y_drift_edge"] = control.y_drift_edge;
  b.summary["confinement_ratio"] = ratio_final;
  b.summary["swapped_chirality_defined"] = swap.swapped.chirality_defined;
  b.summary["swapped_chirality"] = swap.swapped.chirality;
  b.summary["chirality_reversed"] = swap.reversed;

  b.figure_svg = svg_heatmap({probability_panel(
      split.state, "P(x,y), two-domain interface, step " + std::to_string(c.steps))});
  return b;
}

inline ResultBundle run_ribbon(const ExperimentConfig& c) {
  RibbonParams rp;
  rp.theta1 = c.theta1_rad();
  rp.theta2_left = c.theta2_left_rad();
  rp.theta2_right = c.theta2_right_rad();
  rp.width = c.ribbon_width;
  rp.ky_samples = c.ky_samples;
  const RibbonSpectrum rs = ribbon_spectrum(rp, c.workers);

  ResultBundle b;
  b.config = c;
  b.data.header = {"ky_over_pi", "eps", "loc_a", "loc_b"};
  ScatterSpec sc;
  sc.title = "Two-domain ribbon quasienergies";
  sc.x_label = "k_y/pi";
  sc.y_label = "eps";
  sc.c_label = "wall weight";
  sc.x_min = -0.5;
  sc.x_max = 0.5;
  sc.y_min = -pi;
  sc.y_max = pi;
  for (size_t j = 0; j < rs.ky.size(); ++j) {
    for (size_t s = 0; s < rs.eps[j].size(); ++s) {
      b.data.add_row({CsvTable::cell(rs.ky[j] / pi), CsvTable::cell(rs.eps[j][s]),
                      CsvTable::cell(rs.loc_a[j][s]), CsvTable::cell(rs.loc_b[j][s])});
      sc.x.push_back(rs.ky[j] / pi);
      sc.y.push_back(rs.eps[j][s]);
      sc.c.push_back(rs.loc_b[j][s]);
    }
  }

  auto gap_json = [](const GapCrossings& g) {
    nlohmann::ordered_json j;
    j["net"] = g.net;
    j["chirality"] = g.chirality;
    j["velocity"] = g.velocity;
    return j;
  };
  b.summary = common_summary(c);
  b.summary["theta1"] = c.theta1;
  b.summary["theta2_left"] = c.theta2_left;
  b.summary["theta2_right"] = c.theta2_right;
  b.summary["ribbon_width"] = c.ribbon_width;
  b.summary["ky_samples"] = c.ky_samples;
  b.summary["window_zero"] = rs.window_zero;
  b.summary["window_pi"] = rs.window_pi;
  b.summary["width_warning"] = rs.width_warning;
  b.summary["interface_a"] = {{"zero_gap", gap_json(rs.zero_gap_a)},
                              {"pi_gap", gap_json(rs.pi_gap_a)}};
  b.summary["interface_b"] = {{"zero_gap", gap_json(rs.zero_gap_b)},
                              {"pi_gap", gap_json(rs.pi_gap_b)}};
  b.figure_svg = svg_scatter(sc);
  return b;
}

inline ResultBundle run_bulk_boundary(const ExperimentConfig& c) {
  const EdgeConfig ec = edge_config(c);
  const BulkBoundaryReport r =
      bulk_boundary_check(ec, c.ribbon_width, c.ky_samples, c.bz_grid, c.workers);

  ResultBundle b;
  b.config = c;
  b.data.header = {"interface", "gap", "net_modes", "chirality", "velocity"};
  auto add = [&](const char* iface, const char* gap, const GapCrossings& g) {
    b.data.add_row({CsvTable::cell(iface), CsvTable::cell(gap), CsvTable::cell(g.net),
                    CsvTable::cell(g.chirality), CsvTable::cell(g.velocity)});
  };
  add("A", "zero", r.ribbon.zero_gap_a);
  add("A", "pi", r.ribbon.pi_gap_a);
  add("B", "zero", r.ribbon.zero_gap_b);
  add("B", "pi", r.ribbon.pi_gap_b);

  b.summary = common_summary(c);
  b.summary["theta1"] = c.theta1;
  b.summary["theta2_left"] = c.theta2_left;
  b.summary["theta2_right"] = c.theta2_right;
  b.summary["chern_left"] = r.chern_left;
  b.summary["chern_right"] = r.chern_right;
  b.summary["delta_chern"] = r.delta_chern;
  b.summary["modes_interface_a"] =
      std::abs(r.ribbon.zero_gap_a.net) + std::abs(r.ribbon.pi_gap_a.net);
  b.summary["modes_interface_b"] =
      std::abs(r.ribbon.zero_gap_b.net) + std::abs(r.ribbon.pi_gap_b.net);
  b.summary["counts_match"] = r.counts_match;
  b.summary["edge_chirality_defined"] = r.edge.chirality_defined;
  b.summary["edge_chirality"] = r.edge.chirality;
  b.summary["chirality_match"] = r.chirality_match;
  b.summary["consistent"] = r.consistent;
  return b;
}

}  // namespace detail

/// Execute the named protocol of a validated config. Pure computation: no
/// files are touched. Throws physics_error for gap closures and (in strict
/// mode) leakage; module preconditions surface as std::invalid_argument.
inline ResultBundle run_protocol(const ExperimentConfig& c) {
  switch (c.protocol) {
    case Protocol::bands: return detail::run_bands(c);
    case Protocol::phase_diagram: return detail::run_phase_diagram(c);
    case Protocol::chern_bloch: return detail::run_chern_bloch(c);
    case Protocol::curvature_map: return detail::run_curvature_map(c);
    case Protocol::recurrence: return detail::run_recurrence(c);
    case Protocol::edge: return detail::run_edge_protocol(c);
    case Protocol::ribbon: return detail::run_ribbon(c);
    case Protocol::bulk_boundary: return detail::run_bulk_boundary(c);
  }
  throw config_error("run_protocol: unhandled protocol");
}

/// Write the bundle into its output directory. Emits data.csv / summary.json /
/// figure.svg according to the config's formats, plus manifest.json always.
/// Returns the paths written. Only the manifest carries timing metadata; the
/// data files are byte-reproducible.
inline std::vector<std::string> write_bundle(const ResultBundle& b,
                                             double wall_time_ms) {
  namespace fs = std::filesystem;
  const fs::path dir(b.config.output);
  fs::create_directories(dir);

  std::vector<std::string> written;
  auto want = [&](const char* f) {
    return std::find(b.config.formats.begin(), b.config.formats.end(), f) !=
           b.config.formats.end();
  };
  if (want("csv")) {
    const fs::path p = dir / "data.csv";
    write_text_file(p.string(), b.data.to_string());
    written.push_back(p.string());
  }
  if (want("json")) {
    const fs::path p = dir / "summary.json";
    write_text_file(p.string(), b.summary.dump(2) + "\n");
    written.push_back(p.string());
  }
  if (want("svg-heatmap") && !b.figure_svg.empty()) {
    const fs::path p = dir / "figure.svg";
    write_text_file(p.string(), b.figure_svg);
    written.push_back(p.string());
  }

  nlohmann::ordered_json manifest;
  manifest["protocol"] = protocol_name(b.config.protocol);
  manifest["version"] = version;
  manifest["parameters"] = resolved_json(b.config);
  manifest["outputs"] = nlohmann::ordered_json::array();
  for (const std::string& w : written) {
    manifest["outputs"].push_back(fs::path(w).filename().string());
  }
  manifest["wall_time_ms"] = wall_time_ms;
  const fs::path mp = dir / "manifest.json";
  write_text_file(mp.string(), manifest.dump(2) + "\n");
  written.push_back(mp.string());
  return written;
}

/// Reload a previously written bundle (manifest + summary + data table) for
/// offline comparison. The figure is not reloaded.
inline ResultBundle load_bundle(const std::string& dir) {
  namespace fs = std::filesystem;
  const fs::path d(dir);
  for (const char* name : {"manifest.json", "summary.json", "data.csv"}) {
    if (!fs::exists(d / name)) {
      throw config_error("load_bundle: missing " + (d / name).string());
    }
  }
  ResultBundle b;
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(read_text_file((d / "manifest.json").string()));
  } catch (const nlohmann::json::parse_error& e) {
    throw config_error(std::string("load_bundle: malformed manifest.json: ") + e.what());
  }
  if (!manifest.contains("parameters")) {
    throw config_error("load_bundle: manifest.json has no \"parameters\"");
  }
  b.config = parse_config_json(manifest.at("parameters"));
  try {
    b.summary = nlohmann::ordered_json::parse(
        read_text_file((d / "summary.json").string()));
  } catch (const nlohmann::json::parse_error& e) {
    throw config_error(std::string("load_bundle: malformed summary.json: ") + e.what());
  }
  b.data = parse_csv(read_text_file((d / "data.csv").string()));
  return b;
}

/// Deviation report: measured transport values against their band-theory
/// oracles, with pass/fail against the pinned acceptance tolerances.
struct DeviationReport {
  bool applicable = false;
  bool pass = false;
  std::vector<std::string> lines;  // human-readable, one per point + aggregates
};

/// Tolerances used by the deviation report (shared with the acceptance
/// checks): Chern-number agreement 0.15, pointwise curvature MAD 0.1,
/// trivial-phase mean |omega| 0.05.
inline constexpr double compare_chern_tolerance = 0.15;
inline constexpr double compare_mad_tolerance = 0.1;
inline constexpr double compare_trivial_mean_tolerance = 0.05;

inline DeviationReport compare_to_oracle(const ResultBundle& b) {
  DeviationReport rep;
  const Protocol p = b.config.protocol;
  if (p != Protocol::chern_bloch && p != Protocol::curvature_map) {
    return rep;  // no spectral counterpart
  }
  rep.applicable = true;

  const double chern_transport = b.summary.at("chern_transport").get<double>();
  const double chern_spectral = b.summary.at("chern_spectral").get<double>();
  const double chern_dev = std::abs(chern_transport - chern_spectral);

  bool pass = chern_dev <= compare_chern_tolerance;
  rep.lines.push_back("chern_transport = " + format_double(chern_transport) +
                      "  chern_spectral = " + format_double(chern_spectral) +
                      "  |dev| = " + format_double(chern_dev) + "  (tol " +
                      format_double(compare_chern_tolerance) + ")");

  if (p == Protocol::chern_bloch) {
    const std::vector<double> kx = b.data.column("kx_c_over_pi");
    const std::vector<double> lambda = b.data.column("lambda");
    const std::vector<double> oracle = b.data.column("lambda_oracle");
    const double span = b.summary.at("span_over_pi").get<double>() * pi;
    double mean_abs_omega = 0.0;
    for (size_t i = 0; i < lambda.size(); ++i) {
      rep.lines.push_back("kx_c/pi = " + format_double(kx[i]) +
                          "  lambda = " + format_double(lambda[i]) +
                          "  oracle = " + format_double(oracle[i]) +
                          "  dev = " + format_double(lambda[i] - oracle[i]));
      mean_abs_omega += std::abs(lambda[i]) / span;
    }
    if (!lambda.empty()) mean_abs_omega /= static_cast<double>(lambda.size());
    if (chern_spectral == 0.0) {
      rep.lines.push_back("trivial phase: mean |omega| = " +
                          format_double(mean_abs_omega) + "  (tol " +
                          format_double(compare_trivial_mean_tolerance) + ")");
      pass = pass && mean_abs_omega < compare_trivial_mean_tolerance;
    }
  } else {
    const std::vector<double> kx = b.data.column("k_xc_over_pi");
    const std::vector<double> ky = b.data.column("k_yc_over_pi");
    const std::vector<double> measured = b.data.column("omega_measured");
    const std::vector<double> oracle = b.data.column("omega_oracle");
    double mad = 0.0, max_dev = 0.0;
    for (size_t i = 0; i < measured.size(); ++i) {
      const double d = std::abs(measured[i] - oracle[i]);
      mad += d;
      max_dev = std::max(max_dev, d);
      rep.lines.push_back("k_c/pi = (" + format_double(kx[i]) + ", " +
                          format_double(ky[i]) + ")  omega = " +
                          format_double(measured[i]) + "  oracle = " +
                          format_double(oracle[i]) + "  dev = " +
                          format_double(measured[i] - oracle[i]));
    }
    if (!measured.empty()) mad /= static_cast<double>(measured.size());
    rep.lines.push_back("pointwise MAD = " + format_double(mad) + "  max = " +
                        format_double(max_dev) + "  (tol MAD < " +
                        format_double(compare_mad_tolerance) + ")");
    pass = pass && mad < compare_mad_tolerance;
  }
  rep.lines.push_back(pass ? "PASS" : "FAIL");
  rep.pass = pass;
  return rep;
}

}  // namespace qwlab
