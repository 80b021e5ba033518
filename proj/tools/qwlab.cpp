// qwlab: experiment driver for the two-loop discrete-time quantum walk lab.
//
// One subcommand per protocol (flags override protocol defaults), plus
//   run <config.json>   execute a JSON config file
//   compare <dir>       deviation report of a written result directory
//
// Exit codes: 0 success, 1 configuration error, 2 runtime/physics error.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "qwlab/config.hpp"
#include "qwlab/protocols.hpp"
#include "qwlab/version.hpp"

namespace {

using nlohmann::json;

/// Collects flag values for one subcommand and copies only the flags the
/// user actually passed into a config-override JSON object.
struct ProtoCli {
  CLI::App* sub = nullptr;
  json overrides = json::object();
  std::vector<std::function<void()>> finishers;

  void collect() {
    for (auto& f : finishers) f();
  }

  void add_number(const char* flag, const char* key, const char* desc) {
    auto val = std::make_shared<double>();
    CLI::Option* o = sub->add_option(flag, *val, desc);
    finishers.push_back([this, o, val, key] {
      if (o->count()) overrides[key] = *val;
    });
  }

  void add_int(const char* flag, const char* key, const char* desc) {
    auto val = std::make_shared<int>();
    CLI::Option* o = sub->add_option(flag, *val, desc);
    finishers.push_back([this, o, val, key] {
      if (o->count()) overrides[key] = *val;
    });
  }

  void add_text(const char* flag, const char* key, const char* desc) {
    auto val = std::make_shared<std::string>();
    CLI::Option* o = sub->add_option(flag, *val, desc);
    finishers.push_back([this, o, val, key] {
      if (o->count()) overrides[key] = *val;
    });
  }

  void add_size() {
    auto val = std::make_shared<std::vector<int>>();
    CLI::Option* o = sub->add_option("--size", *val,
                                     "lattice size: one even integer or SX SY")
                         ->expected(1, 2);
    finishers.push_back([this, o, val] {
      if (!o->count()) return;
      if (val->size() == 1) {
        overrides["size"] = (*val)[0];
      } else {
        overrides["size"] = *val;
      }
    });
  }

  void add_spin() {
    auto val = std::make_shared<std::vector<double>>();
    CLI::Option* o =
        sub->add_option("--spin", *val, "initial spinor amplitudes: UP DOWN")
            ->expected(2);
    finishers.push_back([this, o, val] {
      if (o->count()) overrides["spin"] = *val;
    });
  }

  void add_common() {
    add_text("--out", "output", "output directory");
    auto fmt = std::make_shared<std::string>();
    CLI::Option* fo = sub->add_option(
        "--format", *fmt, "comma-separated subset of csv,json,svg (default all)");
    finishers.push_back([this, fo, fmt] {
      if (!fo->count()) return;
      json arr = json::array();
      size_t pos = 0;
      while (pos <= fmt->size()) {
        size_t comma = fmt->find(',', pos);
        if (comma == std::string::npos) comma = fmt->size();
        if (comma > pos) arr.push_back(fmt->substr(pos, comma - pos));
        pos = comma + 1;
      }
      overrides["formats"] = arr;
    });
    add_int("--workers", "workers", "worker threads (never changes output bytes)");
    auto seed = std::make_shared<std::uint64_t>();
    CLI::Option* so = sub->add_option(
        "--seed", *seed, "seed for randomized test utilities (protocols ignore it)");
    finishers.push_back([this, so, seed] {
      if (so->count()) overrides["seed"] = *seed;
    });
    auto strict = std::make_shared<bool>(false);
    CLI::Option* sto = sub->add_flag(
        "--strict", *strict, "treat band-leakage warnings as errors (exit 2)");
    finishers.push_back([this, sto, strict] {
      if (sto->count()) overrides["strict"] = *strict;
    });
  }
};

int execute_config(const json& doc) {
  const qwlab::ExperimentConfig cfg = qwlab::parse_config_json(doc);
  const auto t0 = std::chrono::steady_clock::now();
  const qwlab::ResultBundle bundle = qwlab::run_protocol(cfg);
  const double ms = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
  const std::vector<std::string> written = qwlab::write_bundle(bundle, ms);
  std::printf("%s\n", bundle.summary.dump(2).c_str());
  for (const std::string& path : written) std::printf("wrote %s\n", path.c_str());
  std::printf("done in %.0f ms\n", ms);
  return 0;
}

int execute_compare(const std::string& dir) {
  const qwlab::ResultBundle bundle = qwlab::load_bundle(dir);
  const qwlab::DeviationReport rep = qwlab::compare_to_oracle(bundle);
  if (!rep.applicable) {
    std::fprintf(stderr,
                 "error: protocol \"%s\" has no band-theory counterpart to "
                 "compare against (use chern-bloch or curvature-map)\n",
                 qwlab::protocol_name(bundle.config.protocol));
    return 1;
  }
  for (const std::string& line : rep.lines) std::printf("%s\n", line.c_str());
  return rep.pass ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "qwlab: two-loop discrete-time quantum walk laboratory — band theory, "
      "wave-packet Hall transport, and chiral interface dynamics"};
  app.set_version_flag("--version", qwlab::version);
  app.require_subcommand(1);

  std::vector<std::unique_ptr<ProtoCli>> protos;
  auto add_proto = [&](const char* name, const char* desc) -> ProtoCli& {
    protos.push_back(std::make_unique<ProtoCli>());
    ProtoCli& p = *protos.back();
    p.sub = app.add_subcommand(name, desc);
    p.overrides["protocol"] = name;
    return p;
  };

  {
    ProtoCli& p = add_proto("bands", "quasienergy bands, gaps and Chern number");
    p.add_number("--theta1", "theta1", "first coin angle / pi");
    p.add_number("--theta2", "theta2", "second coin angle / pi");
    p.add_int("--bz-grid", "bz_grid", "Brillouin-zone grid per axis");
    p.add_common();
  }
  {
    ProtoCli& p = add_proto("phase-diagram", "Chern number over the coin-angle plane");
    p.add_int("--grid", "grid", "angle grid per axis");
    p.add_int("--bz-grid", "bz_grid", "Brillouin-zone grid per cell");
    p.add_common();
  }
  {
    ProtoCli& p = add_proto("chern-bloch",
                            "transport Chern number from full-period Bloch "
                            "oscillations");
    p.add_number("--theta1", "theta1", "first coin angle / pi");
    p.add_number("--theta2", "theta2", "second coin angle / pi");
    p.add_size();
    p.add_number("--force", "force", "force per step / pi");
    p.add_int("--steps", "steps", "walk steps");
    p.add_int("--force-steps", "force_steps", "steps with the force active");
    p.add_number("--dk", "dk", "packet momentum width / pi");
    p.add_int("--grid", "grid", "number of k_x columns");
    p.add_int("--bz-grid", "bz_grid", "grid for the spectral Chern reference");
    p.add_text("--readout", "readout", "x-readout: moment or fit");
    p.add_common();
  }
  {
    ProtoCli& p = add_proto("curvature-map",
                            "Berry-curvature map from partial-span Hall drifts");
    p.add_number("--theta1", "theta1", "first coin angle / pi");
    p.add_number("--theta2", "theta2", "second coin angle / pi");
    p.add_size();
    p.add_number("--force", "force", "force per step / pi");
    p.add_int("--steps", "steps", "walk steps");
    p.add_int("--force-steps", "force_steps", "steps with the force active");
    p.add_number("--dk", "dk", "packet momentum width / pi");
    p.add_int("--grid", "grid", "k_c grid per axis");
    p.add_int("--bz-grid", "bz_grid", "grid for the spectral Chern reference");
    p.add_text("--readout", "readout", "x-readout: moment or fit");
    p.add_common();
  }
  {
    ProtoCli& p = add_proto("recurrence",
                            "y-trajectory of one driven packet (Bloch oscillation)");
    p.add_number("--theta1", "theta1", "first coin angle / pi");
    p.add_number("--theta2", "theta2", "second coin angle / pi");
    p.add_size();
    p.add_number("--force", "force", "force per step / pi");
    p.add_int("--steps", "steps", "walk steps");
    p.add_int("--force-steps", "force_steps", "steps with the force active");
    p.add_number("--dk", "dk", "packet momentum width / pi");
    p.add_number("--kx", "kx_c", "packet center k_x / pi");
    p.add_number("--ky", "ky_c", "packet center k_y / pi");
    p.add_common();
  }
  {
    ProtoCli& p = add_proto("edge",
                            "two-domain interface dynamics from a localized start");
    p.add_number("--theta1", "theta1", "first coin angle / pi");
    p.add_number("--theta2-left", "theta2_left", "left-domain theta2 / pi");
    p.add_number("--theta2-right", "theta2_right", "right-domain theta2 / pi");
    p.add_int("--steps", "steps", "walk steps");
    p.add_int("--edge-width", "edge_width", "interface band width in columns");
    p.add_size();
    p.add_int("--start-x", "start_x", "walker start column");
    p.add_int("--start-y", "start_y", "walker start row");
    p.add_spin();
    p.add_common();
  }
  {
    ProtoCli& p = add_proto("ribbon",
                            "two-domain ribbon spectrum and chiral mode count");
    p.add_number("--theta1", "theta1", "first coin angle / pi");
    p.add_number("--theta2-left", "theta2_left", "left-domain theta2 / pi");
    p.add_number("--theta2-right", "theta2_right", "right-domain theta2 / pi");
    p.add_int("--ribbon-width", "ribbon_width", "columns per domain");
    p.add_int("--ky-samples", "ky_samples", "k_y samples over one period");
    p.add_common();
  }
  {
    ProtoCli& p = add_proto("bulk-boundary",
                            "bulk Chern numbers vs ribbon modes vs edge dynamics");
    p.add_number("--theta1", "theta1", "first coin angle / pi");
    p.add_number("--theta2-left", "theta2_left", "left-domain theta2 / pi");
    p.add_number("--theta2-right", "theta2_right", "right-domain theta2 / pi");
    p.add_int("--steps", "steps", "walk steps");
    p.add_int("--edge-width", "edge_width", "interface band width in columns");
    p.add_size();
    p.add_int("--start-x", "start_x", "walker start column");
    p.add_int("--start-y", "start_y", "walker start row");
    p.add_spin();
    p.add_int("--ribbon-width", "ribbon_width", "columns per domain");
    p.add_int("--ky-samples", "ky_samples", "k_y samples over one period");
    p.add_int("--bz-grid", "bz_grid", "grid for the bulk Chern numbers");
    p.add_common();
  }

  // run <config-file>: execute a config document, with common overrides.
  std::string config_path;
  ProtoCli run_cli;
  run_cli.sub = app.add_subcommand("run", "execute a JSON config file");
  run_cli.sub->add_option("config", config_path, "path to the config document")
      ->required();
  run_cli.add_common();

  // compare <dir>: deviation report for a written result directory.
  std::string compare_dir;
  CLI::App* compare_sub = app.add_subcommand(
      "compare", "compare a result directory against its band-theory oracle");
  compare_sub->add_option("dir", compare_dir, "result directory (with manifest.json)")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    for (auto& p : protos) {
      if (p->sub->parsed()) {
        p->collect();
        return execute_config(p->overrides);
      }
    }
    if (run_cli.sub->parsed()) {
      json doc;
      try {
        doc = json::parse(qwlab::read_text_file(config_path));
      } catch (const json::parse_error& e) {
        throw qwlab::config_error(std::string("config: malformed JSON: ") + e.what());
      }
      if (!doc.is_object()) {
        throw qwlab::config_error("config: document must be a JSON object");
      }
      run_cli.collect();
      for (const auto& item : run_cli.overrides.items()) {
        doc[item.key()] = item.value();
      }
      return execute_config(doc);
    }
    if (compare_sub->parsed()) return execute_compare(compare_dir);
  } catch (const qwlab::config_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const qwlab::physics_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
