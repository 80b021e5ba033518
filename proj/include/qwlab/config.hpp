#pragma once

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "qwlab/gaussian_fit.hpp"
#include "qwlab/lattice.hpp"

namespace qwlab {

/// Invalid or malformed configuration (CLI exit code 1).
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Physics-level failure while running a valid config — closed gap, leakage
/// beyond threshold in strict mode (CLI exit code 2).
struct physics_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Protocol {
  bands,
  phase_diagram,
  chern_bloch,
  curvature_map,
  recurrence,
  edge,
  ribbon,
  bulk_boundary,
};

inline const char* protocol_name(Protocol p) {
  switch (p) {
    case Protocol::bands: return "bands";
    case Protocol::phase_diagram: return "phase-diagram";
    case Protocol::chern_bloch: return "chern-bloch";
    case Protocol::curvature_map: return "curvature-map";
    case Protocol::recurrence: return "recurrence";
    case Protocol::edge: return "edge";
    case Protocol::ribbon: return "ribbon";
    case Protocol::bulk_boundary: return "bulk-boundary";
  }
  return "?";
}

inline std::optional<Protocol> protocol_from_name(const std::string& s) {
  for (Protocol p : {Protocol::bands, Protocol::phase_diagram, Protocol::chern_bloch,
                     Protocol::curvature_map, Protocol::recurrence, Protocol::edge,
                     Protocol::ribbon, Protocol::bulk_boundary}) {
    if (s == protocol_name(p)) return p;
  }
  return std::nullopt;
}

/// Fully resolved experiment configuration. All angles and momenta are stored
/// in units of pi exactly as configured; *_rad() accessors convert. Fields not
/// used by the chosen protocol keep their defaults and are not serialized.
struct ExperimentConfig {
  Protocol protocol = Protocol::bands;

  // Common run controls.
  std::string output = "results";
  std::vector<std::string> formats = {"csv", "json", "svg-heatmap"};
  int workers = 1;
  std::uint64_t seed = 0;  // consumed only by randomized test utilities
  bool strict = false;     // leakage warnings become errors

  // Coin angles (units of pi).
  double theta1 = -0.5;
  double theta2 = 0.5;
  double theta2_left = 1.0;   // two-domain protocols
  double theta2_right = 0.2;

  // Lattice and drive.
  int size_x = 64, size_y = 64;
  double force = 0.1;  // units of pi
  int steps = 10;
  int force_steps = -1;  // -1: active on every step
  double dk = 0.095;     // units of pi

  // Scan grids.
  int grid = 11;     // k_c columns / curvature grid / phase-diagram theta grid
  int bz_grid = 64;  // spectral Brillouin-zone grid

  // Packet center (units of pi) for the recurrence protocol.
  double kx_c = 0.0, ky_c = 0.0;

  Readout readout = Readout::moment;

  // Interface protocols.
  int edge_width = 4;
  int start_x = 0, start_y = 0;
  double spin_up = 1.0, spin_down = 0.0;
  int ribbon_width = 24;
  int ky_samples = 64;

  double theta1_rad() const { return theta1 * pi; }
  double theta2_rad() const { return theta2 * pi; }
  double theta2_left_rad() const { return theta2_left * pi; }
  double theta2_right_rad() const { return theta2_right * pi; }
  double force_rad() const { return force * pi; }
  double dk_rad() const { return dk * pi; }
  double kx_c_rad() const { return kx_c * pi; }
  double ky_c_rad() const { return ky_c * pi; }
  int active_force_steps() const { return force_steps < 0 ? steps : force_steps; }
  LatticeGeometry geometry() const { return LatticeGeometry{size_x, size_y}; }
};

namespace detail {

inline bool protocol_uses(Protocol p, const std::string& key) {
  using P = Protocol;
  static const std::set<std::string> common = {"protocol", "output",  "formats",
                                               "workers",  "seed",    "strict"};
  if (common.count(key)) return true;
  auto any = [&](std::initializer_list<const char*> keys) {
    for (const char* k : keys)
      if (key == k) return true;
    return false;
  };
  switch (p) {
    case P::bands:
      return any({"theta1", "theta2", "bz_grid"});
    case P::phase_diagram:
      return any({"grid", "bz_grid"});
    case P::chern_bloch:
    case P::curvature_map:
      return any({"theta1", "theta2", "size", "force", "steps", "force_steps",
                  "dk", "grid", "readout", "bz_grid"});
    case P::recurrence:
      return any({"theta1", "theta2", "size", "force", "steps", "force_steps",
                  "dk", "kx_c", "ky_c"});
    case P::edge:
      return any({"theta1", "theta2_left", "theta2_right", "steps", "edge_width",
                  "size", "start_x", "start_y", "spin"});
    case P::ribbon:
      return any({"theta1", "theta2_left", "theta2_right", "ribbon_width",
                  "ky_samples"});
    case P::bulk_boundary:
      return any({"theta1", "theta2_left", "theta2_right", "steps", "edge_width",
                  "size", "start_x", "start_y", "spin", "ribbon_width",
                  "ky_samples", "bz_grid"});
  }
  return false;
}

/// Typed, path-reporting reader over the flat config object.
class ConfigReader {
 public:
  explicit ConfigReader(const nlohmann::json& j) : j_(j) {}

  bool has(const std::string& key) const { return j_.contains(key); }

  double number(const std::string& key, double fallback) {
    if (!consume(key)) return fallback;
    const auto& v = j_.at(key);
    if (!v.is_number()) throw config_error("config: key \"" + key + "\" must be a number");
    return v.get<double>();
  }

  int integer(const std::string& key, int fallback) {
    if (!consume(key)) return fallback;
    const auto& v = j_.at(key);
    if (!v.is_number_integer()) {
      throw config_error("config: key \"" + key + "\" must be an integer");
    }
    return v.get<int>();
  }

  std::uint64_t unsigned_integer(const std::string& key, std::uint64_t fallback) {
    if (!consume(key)) return fallback;
    const auto& v = j_.at(key);
    if (!v.is_number_integer() || (v.is_number_integer() && v.get<std::int64_t>() < 0)) {
      throw config_error("config: key \"" + key + "\" must be a non-negative integer");
    }
    return v.get<std::uint64_t>();
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!consume(key)) return fallback;
    const auto& v = j_.at(key);
    if (!v.is_boolean()) throw config_error("config: key \"" + key + "\" must be a boolean");
    return v.get<bool>();
  }

  std::string text(const std::string& key, const std::string& fallback) {
    if (!consume(key)) return fallback;
    const auto& v = j_.at(key);
    if (!v.is_string()) throw config_error("config: key \"" + key + "\" must be a string");
    return v.get<std::string>();
  }

  const nlohmann::json* array(const std::string& key) {
    if (!consume(key)) return nullptr;
    const auto& v = j_.at(key);
    if (!v.is_array()) throw config_error("config: key \"" + key + "\" must be an array");
    return &v;
  }

  /// `size` accepts either one even integer (square lattice) or [sx, sy].
  void read_size(int& sx, int& sy) {
    if (!has("size")) return;
    const auto& v = j_.at("size");
    consume("size");
    if (v.is_number_integer()) {
      sx = sy = v.get<int>();
    } else if (v.is_array() && v.size() == 2 && v[0].is_number_integer() &&
               v[1].is_number_integer()) {
      sx = v[0].get<int>();
      sy = v[1].get<int>();
    } else {
      throw config_error(
          "config: key \"size\" must be an integer or a [size_x, size_y] pair");
    }
  }

  void reject_unknown(Protocol p) const {
    for (const auto& item : j_.items()) {
      if (!consumed_.count(item.key())) {
        throw config_error("config: unknown key \"" + item.key() +
                           "\" for protocol \"" + std::string(protocol_name(p)) +
                           "\"");
      }
    }
  }

 private:
  bool consume(const std::string& key) {
    if (!j_.contains(key)) return false;
    consumed_.insert(key);
    return true;
  }

  const nlohmann::json& j_;
  std::set<std::string> consumed_;
};

inline void apply_protocol_defaults(ExperimentConfig& c) {
  switch (c.protocol) {
    case Protocol::bands:
      break;  // struct defaults
    case Protocol::phase_diagram:
      c.grid = 24;
      c.bz_grid = 24;
      break;
    case Protocol::chern_bloch:
      break;
    case Protocol::curvature_map:
      c.size_x = c.size_y = 128;
      c.force = 1.0 / 45.0;
      c.force_steps = 9;
      c.dk = 0.035;
      break;
    case Protocol::recurrence:
      break;
    case Protocol::edge:
      c.theta1 = -0.25;
      c.steps = 12;
      break;
    case Protocol::ribbon:
      c.theta1 = -0.25;
      break;
    case Protocol::bulk_boundary:
      c.theta1 = -0.25;
      c.steps = 12;
      c.bz_grid = 24;
      break;
  }
}

inline void validate_config(const ExperimentConfig& c) {
  auto fail = [](const std::string& key, const std::string& why) {
    throw config_error("config: key \"" + key + "\": " + why);
  };
  if (c.output.empty()) fail("output", "must be a non-empty path");
  if (c.formats.empty()) fail("formats", "must list at least one format");
  if (c.workers < 1 || c.workers > 256) fail("workers", "must be in [1, 256]");

  const bool lattice_protocol =
      c.protocol == Protocol::chern_bloch || c.protocol == Protocol::curvature_map ||
      c.protocol == Protocol::recurrence || c.protocol == Protocol::edge ||
      c.protocol == Protocol::bulk_boundary;
  if (lattice_protocol) {
    if (c.size_x < 4 || c.size_y < 4 || c.size_x % 2 || c.size_y % 2) {
      fail("size", "lattice sizes must be even and at least 4");
    }
  }

  const bool packet_protocol = c.protocol == Protocol::chern_bloch ||
                               c.protocol == Protocol::curvature_map ||
                               c.protocol == Protocol::recurrence;
  if (packet_protocol) {
    if (c.steps < 1) fail("steps", "must be at least 1");
    if (c.force_steps > c.steps) fail("force_steps", "cannot exceed steps");
    if (c.force_steps < -1) fail("force_steps", "must be >= 0 (or -1 for all steps)");
    if (c.dk <= 0) fail("dk", "must be positive");
    if (1.0 / c.dk_rad() > std::min(c.size_x, c.size_y) / 6.0) {
      fail("dk", "packet too wide for the lattice (need 1/dk <= size/6)");
    }
    if (c.force < 0) fail("force", "must be non-negative");
    const double span = c.force * c.active_force_steps();
    if (span > 1.0 + 1e-12) {
      fail("force", "force * force_steps = " + std::to_string(span) +
                        " pi exceeds one Brillouin period (pi)");
    }
  }
  if (c.protocol == Protocol::chern_bloch || c.protocol == Protocol::curvature_map ||
      c.protocol == Protocol::phase_diagram) {
    if (c.grid < 1) fail("grid", "must be at least 1");
  }
  if (c.protocol == Protocol::bands || c.protocol == Protocol::phase_diagram ||
      c.protocol == Protocol::chern_bloch || c.protocol == Protocol::curvature_map ||
      c.protocol == Protocol::bulk_boundary) {
    if (c.bz_grid < 4) fail("bz_grid", "must be at least 4");
  }
  if (c.protocol == Protocol::edge || c.protocol == Protocol::bulk_boundary) {
    if (c.steps < 0) fail("steps", "must be >= 0");
    if (c.edge_width < 1 || c.edge_width > c.size_x / 2) {
      fail("edge_width", "must be in [1, size_x/2]");
    }
    if (c.size_x < 4 * c.steps) {
      fail("size", "size_x must be at least 4*steps to isolate the interface");
    }
    if (c.spin_up == 0.0 && c.spin_down == 0.0) {
      fail("spin", "must not be the zero spinor");
    }
  }
  if (c.protocol == Protocol::ribbon || c.protocol == Protocol::bulk_boundary) {
    if (c.ribbon_width < 4) fail("ribbon_width", "must be at least 4");
    if (c.ky_samples < 8) fail("ky_samples", "must be at least 8");
  }
}

}  // namespace detail

/// Parse and validate an already-decoded config object. Defaults are global
/// (64x64 lattice, F = 0.1 pi, 10 steps, dk = 0.095 pi, grid 11) with
/// per-protocol overrides; unknown keys are rejected, never ignored.
inline ExperimentConfig parse_config_json(const nlohmann::json& j) {
  if (!j.is_object()) throw config_error("config: document must be a JSON object");
  if (!j.contains("protocol")) throw config_error("config: key \"protocol\" is required");
  if (!j.at("protocol").is_string()) {
    throw config_error("config: key \"protocol\" must be a string");
  }
  const std::string pname = j.at("protocol").get<std::string>();
  const std::optional<Protocol> proto = protocol_from_name(pname);
  if (!proto) {
    throw config_error(
        "config: key \"protocol\": unknown protocol \"" + pname +
        "\" (expected one of bands, phase-diagram, chern-bloch, curvature-map, "
        "recurrence, edge, ribbon, bulk-boundary)");
  }

  ExperimentConfig c;
  c.protocol = *proto;
  detail::apply_protocol_defaults(c);

  detail::ConfigReader r(j);
  r.text("protocol", pname);  // consume
  c.output = r.text("output", c.output);
  if (const nlohmann::json* fm = r.array("formats")) {
    c.formats.clear();
    for (const auto& f : *fm) {
      if (!f.is_string()) throw config_error("config: key \"formats\" must list strings");
      const std::string s = f.get<std::string>();
      if (s == "csv" || s == "json") {
        c.formats.push_back(s);
      } else if (s == "svg" || s == "svg-heatmap") {
        c.formats.push_back("svg-heatmap");
      } else {
        throw config_error("config: key \"formats\": unknown format \"" + s +
                           "\" (expected csv, json, svg-heatmap)");
      }
    }
  }
  c.workers = r.integer("workers", c.workers);
  c.seed = r.unsigned_integer("seed", c.seed);
  c.strict = r.boolean("strict", c.strict);

  auto uses = [&](const char* k) { return detail::protocol_uses(c.protocol, k); };
  if (uses("theta1")) c.theta1 = r.number("theta1", c.theta1);
  if (uses("theta2")) c.theta2 = r.number("theta2", c.theta2);
  if (uses("theta2_left")) c.theta2_left = r.number("theta2_left", c.theta2_left);
  if (uses("theta2_right")) c.theta2_right = r.number("theta2_right", c.theta2_right);
  if (uses("size")) r.read_size(c.size_x, c.size_y);
  if (uses("force")) c.force = r.number("force", c.force);
  if (uses("steps")) c.steps = r.integer("steps", c.steps);
  if (uses("force_steps")) c.force_steps = r.integer("force_steps", c.force_steps);
  if (uses("dk")) c.dk = r.number("dk", c.dk);
  if (uses("grid")) c.grid = r.integer("grid", c.grid);
  if (uses("bz_grid")) c.bz_grid = r.integer("bz_grid", c.bz_grid);
  if (uses("kx_c")) c.kx_c = r.number("kx_c", c.kx_c);
  if (uses("ky_c")) c.ky_c = r.number("ky_c", c.ky_c);
  if (uses("readout")) {
    const std::string readout = r.text("readout", "moment");
    if (readout == "moment") {
      c.readout = Readout::moment;
    } else if (readout == "fit" || readout == "gaussian-fit") {
      c.readout = Readout::gaussian_fit;
    } else {
      throw config_error("config: key \"readout\": expected \"moment\" or \"fit\", got \"" +
                         readout + "\"");
    }
  }
  if (uses("edge_width")) c.edge_width = r.integer("edge_width", c.edge_width);
  if (uses("start_x")) c.start_x = r.integer("start_x", c.start_x);
  if (uses("start_y")) c.start_y = r.integer("start_y", c.start_y);
  if (uses("spin")) {
    if (const nlohmann::json* sp = r.array("spin")) {
      if (sp->size() != 2 || !(*sp)[0].is_number() || !(*sp)[1].is_number()) {
        throw config_error("config: key \"spin\" must be a [up, down] pair of numbers");
      }
      c.spin_up = (*sp)[0].get<double>();
      c.spin_down = (*sp)[1].get<double>();
    }
  }
  if (uses("ribbon_width")) c.ribbon_width = r.integer("ribbon_width", c.ribbon_width);
  if (uses("ky_samples")) c.ky_samples = r.integer("ky_samples", c.ky_samples);

  r.reject_unknown(c.protocol);
  detail::validate_config(c);
  return c;
}

/// Parse a JSON config document (text form).
inline ExperimentConfig parse_config(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw config_error(std::string("config: malformed JSON: ") + e.what());
  }
  return parse_config_json(j);
}

/// Canonical serialized form: every key meaningful to the protocol, fully
/// resolved. Reparsing the result reproduces the same configuration.
inline nlohmann::ordered_json resolved_json(const ExperimentConfig& c) {
  nlohmann::ordered_json j;
  j["protocol"] = protocol_name(c.protocol);
  j["output"] = c.output;
  j["formats"] = c.formats;
  j["workers"] = c.workers;
  j["seed"] = c.seed;
  j["strict"] = c.strict;
  auto uses = [&](const char* k) { return detail::protocol_uses(c.protocol, k); };
  if (uses("theta1")) j["theta1"] = c.theta1;
  if (uses("theta2")) j["theta2"] = c.theta2;
  if (uses("theta2_left")) j["theta2_left"] = c.theta2_left;
  if (uses("theta2_right")) j["theta2_right"] = c.theta2_right;
  if (uses("size")) j["size"] = {c.size_x, c.size_y};
  if (uses("force")) j["force"] = c.force;
  if (uses("steps")) j["steps"] = c.steps;
  if (uses("force_steps")) j["force_steps"] = c.force_steps;
  if (uses("dk")) j["dk"] = c.dk;
  if (uses("grid")) j["grid"] = c.grid;
  if (uses("bz_grid")) j["bz_grid"] = c.bz_grid;
  if (uses("kx_c")) j["kx_c"] = c.kx_c;
  if (uses("ky_c")) j["ky_c"] = c.ky_c;
  if (uses("readout")) {
    j["readout"] = c.readout == Readout::moment ? "moment" : "fit";
  }
  if (uses("edge_width")) j["edge_width"] = c.edge_width;
  if (uses("start_x")) j["start_x"] = c.start_x;
  if (uses("start_y")) j["start_y"] = c.start_y;
  if (uses("spin")) j["spin"] = {c.spin_up, c.spin_down};
  if (uses("ribbon_width")) j["ribbon_width"] = c.ribbon_width;
  if (uses("ky_samples")) j["ky_samples"] = c.ky_samples;
  return j;
}

inline bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
  return resolved_json(a) == resolved_json(b);
}

}  // namespace qwlab
