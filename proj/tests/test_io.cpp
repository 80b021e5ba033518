#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <string>
#include <vector>

#include <qwlab/config.hpp>
#include <qwlab/output.hpp>
#include <qwlab/protocols.hpp>

using namespace qwlab;
using Catch::Matchers::ContainsSubstring;

namespace {

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag)
      : path(std::filesystem::temp_directory_path() / tag) {
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

}  // namespace

TEST_CASE("a minimal config picks up the documented defaults", "[io]") {
  const auto c = parse_config(R"({"protocol": "chern-bloch"})");
  REQUIRE(c.protocol == Protocol::chern_bloch);
  REQUIRE(c.theta1 == -0.5);
  REQUIRE(c.theta2 == 0.5);
  REQUIRE(c.size_x == 64);
  REQUIRE(c.size_y == 64);
  REQUIRE(c.force == 0.1);
  REQUIRE(c.steps == 10);
  REQUIRE(c.force_steps == -1);
  REQUIRE(c.dk == 0.095);
  REQUIRE(c.grid == 11);
  REQUIRE(c.readout == Readout::moment);
  REQUIRE(c.output == "results");
  REQUIRE(c.workers == 1);
  REQUIRE_FALSE(c.strict);
  REQUIRE(c.formats ==
          std::vector<std::string>{"csv", "json", "svg-heatmap"});
}

TEST_CASE("protocol-specific defaults override the global ones", "[io]") {
  const auto cm = parse_config(R"({"protocol": "curvature-map"})");
  REQUIRE(cm.size_x == 128);
  REQUIRE(cm.force == Catch::Approx(1.0 / 45));
  REQUIRE(cm.force_steps == 9);
  REQUIRE(cm.dk == 0.035);

  const auto e = parse_config(R"({"protocol": "edge"})");
  REQUIRE(e.theta1 == -0.25);
  REQUIRE(e.theta2_left == 1.0);
  REQUIRE(e.theta2_right == 0.2);
  REQUIRE(e.steps == 12);

  const auto pd = parse_config(R"({"protocol": "phase-diagram"})");
  REQUIRE(pd.grid == 24);
  REQUIRE(pd.bz_grid == 24);
}

TEST_CASE("config errors name the offending key", "[io]") {
  REQUIRE_THROWS_MATCHES(
      parse_config(R"({"protocol": "chern-bloch", "theta2": "abc"})"),
      config_error, Catch::Matchers::MessageMatches(ContainsSubstring(
                        "key \"theta2\" must be a number")));
  REQUIRE_THROWS_MATCHES(
      parse_config(R"({"protocol": "bands", "force": 0.1})"), config_error,
      Catch::Matchers::MessageMatches(
          ContainsSubstring("unknown key \"force\"") &&
          ContainsSubstring("bands")));
  REQUIRE_THROWS_MATCHES(
      parse_config(R"({"theta1": 0.5})"), config_error,
      Catch::Matchers::MessageMatches(ContainsSubstring("protocol")));
  REQUIRE_THROWS_AS(parse_config("not json at all"), config_error);
}

TEST_CASE("physics preconditions are checked at parse time", "[io]") {
  // One Brillouin period is the hard ceiling for the forced span.
  REQUIRE_THROWS_MATCHES(
      parse_config(R"({"protocol": "chern-bloch", "force": 0.4})"),
      config_error,
      Catch::Matchers::MessageMatches(
          ContainsSubstring("exceeds one Brillouin period")));
  // The packet must fit on the lattice.
  REQUIRE_THROWS_MATCHES(
      parse_config(R"({"protocol": "chern-bloch", "dk": 0.02})"), config_error,
      Catch::Matchers::MessageMatches(ContainsSubstring("packet too wide")));
  REQUIRE_NOTHROW(parse_config(
      R"({"protocol": "curvature-map", "dk": 0.02, "size": 128})"));
  REQUIRE_THROWS_MATCHES(
      parse_config(
          R"({"protocol": "chern-bloch", "force_steps": 11, "steps": 10})"),
      config_error,
      Catch::Matchers::MessageMatches(ContainsSubstring("cannot exceed")));
}

TEST_CASE("size accepts a single even integer or an even pair", "[io]") {
  const auto square = parse_config(R"({"protocol": "edge", "size": 48})");
  REQUIRE(square.size_x == 48);
  REQUIRE(square.size_y == 48);
  const auto rect = parse_config(R"({"protocol": "edge", "size": [64, 32]})");
  REQUIRE(rect.size_x == 64);
  REQUIRE(rect.size_y == 32);
  REQUIRE_THROWS_AS(parse_config(R"({"protocol": "edge", "size": 63})"),
                    config_error);
  REQUIRE_THROWS_AS(parse_config(R"({"protocol": "edge", "size": [64]})"),
                    config_error);
}

TEST_CASE("output format names are validated and aliased", "[io]") {
  const auto c =
      parse_config(R"({"protocol": "bands", "formats": ["svg", "csv"]})");
  REQUIRE(c.formats == std::vector<std::string>{"svg-heatmap", "csv"});
  REQUIRE_THROWS_MATCHES(
      parse_config(R"({"protocol": "bands", "formats": ["png"]})"),
      config_error,
      Catch::Matchers::MessageMatches(ContainsSubstring("png")));
}

TEST_CASE("readout accepts the moment and fit spellings", "[io]") {
  REQUIRE(parse_config(R"({"protocol": "chern-bloch", "readout": "fit"})")
              .readout == Readout::gaussian_fit);
  REQUIRE(parse_config(
              R"({"protocol": "chern-bloch", "readout": "gaussian-fit"})")
              .readout == Readout::gaussian_fit);
  REQUIRE(parse_config(R"({"protocol": "chern-bloch", "readout": "moment"})")
              .readout == Readout::moment);
  REQUIRE_THROWS_AS(
      parse_config(R"({"protocol": "chern-bloch", "readout": "centroid"})"),
      config_error);
}

TEST_CASE("resolved configs round trip through their own JSON", "[io]") {
  for (const char* name :
       {"bands", "phase-diagram", "chern-bloch", "curvature-map", "recurrence",
        "edge", "ribbon", "bulk-boundary"}) {
    const auto c =
        parse_config(std::string(R"({"protocol": ")") + name + R"("})");
    const auto again = parse_config(resolved_json(c).dump());
    REQUIRE(c == again);
    REQUIRE(protocol_name(c.protocol) == name);
    REQUIRE(protocol_from_name(name) == c.protocol);
  }
}

TEST_CASE("numeric formatting is stable and lossless enough", "[io]") {
  REQUIRE(format_double(0.1) == "0.1");
  REQUIRE(format_double(-1.0) == "-1");
  REQUIRE(format_double(0.0) == "0");
  REQUIRE(format_double(1.0456392097167233) == "1.04563920972");
  REQUIRE(format_short(0.0510287717) == "0.05103");
}

TEST_CASE("tables serialize to golden CSV bytes and parse back", "[io]") {
  CsvTable t;
  t.header = {"a", "b", "label"};
  t.add_row({CsvTable::cell(0.5), CsvTable::cell(-3), CsvTable::cell("x")});
  t.add_row({CsvTable::cell(1.25), CsvTable::cell(7), CsvTable::cell("y")});
  REQUIRE(t.to_string() == "a,b,label\n0.5,-3,x\n1.25,7,y\n");

  const auto parsed = parse_csv(t.to_string());
  REQUIRE(parsed.header == t.header);
  REQUIRE(parsed.rows == t.rows);
  REQUIRE(parsed.column("a") == std::vector<double>{0.5, 1.25});

  REQUIRE_THROWS_AS(t.add_row({CsvTable::cell(1)}), std::logic_error);
}

TEST_CASE("protocol output is byte-identical across runs and worker counts",
          "[io]") {
  auto c = parse_config(
      R"({"protocol": "curvature-map", "size": 64, "grid": 3, "workers": 1})");
  const auto one = run_protocol(c);
  c.workers = 4;
  const auto four = run_protocol(c);
  REQUIRE(one.data.to_string() == four.data.to_string());

  c.workers = 1;
  const auto again = run_protocol(c);
  REQUIRE(one.data.to_string() == again.data.to_string());
  REQUIRE(one.summary.dump() == again.summary.dump());
  REQUIRE(one.figure_svg == again.figure_svg);
}

TEST_CASE("bundles round trip through the output directory", "[io]") {
  TempDir tmp("qwlab-io-roundtrip");
  auto c = parse_config(R"({"protocol": "bands", "bz_grid": 16})");
  c.output = (tmp.path / "run").string();
  auto b = run_protocol(c);
  b.config = c;
  const auto written = write_bundle(b, 12.5);

  REQUIRE(std::filesystem::exists(tmp.path / "run" / "data.csv"));
  REQUIRE(std::filesystem::exists(tmp.path / "run" / "summary.json"));
  REQUIRE(std::filesystem::exists(tmp.path / "run" / "figure.svg"));
  REQUIRE(std::filesystem::exists(tmp.path / "run" / "manifest.json"));
  REQUIRE(written.size() == 4);

  const auto loaded = load_bundle((tmp.path / "run").string());
  REQUIRE(loaded.config == c);
  REQUIRE(loaded.data.to_string() == b.data.to_string());
  REQUIRE(loaded.summary == b.summary);

  const auto manifest = nlohmann::ordered_json::parse(
      read_text_file((tmp.path / "run" / "manifest.json").string()));
  REQUIRE(manifest["version"] == version);
  REQUIRE(manifest["protocol"] == "bands");
  REQUIRE(manifest["wall_time_ms"] == 12.5);
}

TEST_CASE("the manifest is written even for a csv-only run", "[io]") {
  TempDir tmp("qwlab-io-csvonly");
  auto c = parse_config(R"({"protocol": "bands", "bz_grid": 16,
                            "formats": ["csv"]})");
  c.output = (tmp.path / "run").string();
  auto b = run_protocol(c);
  b.config = c;
  write_bundle(b, 1.0);
  REQUIRE(std::filesystem::exists(tmp.path / "run" / "data.csv"));
  REQUIRE(std::filesystem::exists(tmp.path / "run" / "manifest.json"));
  REQUIRE_FALSE(std::filesystem::exists(tmp.path / "run" / "summary.json"));
  REQUIRE_FALSE(std::filesystem::exists(tmp.path / "run" / "figure.svg"));
}

TEST_CASE("loading a bundle from an empty directory is a usage error",
          "[io]") {
  TempDir tmp("qwlab-io-missing");
  REQUIRE_THROWS_AS(load_bundle((tmp.path / "nothing").string()),
                    config_error);
}

TEST_CASE("figures are standalone SVG documents", "[io]") {
  const auto c = parse_config(R"({"protocol": "bands", "bz_grid": 16})");
  const auto b = run_protocol(c);
  REQUIRE(b.figure_svg.rfind("<svg", 0) == 0);
  REQUIRE(b.figure_svg.find("</svg>") != std::string::npos);
  // Self-contained: no scripts, embedded resources, or links beyond the
  // SVG namespace declaration.
  REQUIRE(b.figure_svg.find("<script") == std::string::npos);
  REQUIRE(b.figure_svg.find("href") == std::string::npos);
  REQUIRE(b.figure_svg.find("<image") == std::string::npos);
}

TEST_CASE("the oracle comparison passes genuine transport runs", "[io]") {
  const auto c = parse_config(R"({"protocol": "chern-bloch"})");
  auto b = run_protocol(c);
  b.config = c;
  const auto report = compare_to_oracle(b);
  REQUIRE(report.applicable);
  REQUIRE(report.pass);
  REQUIRE_FALSE(report.lines.empty());
  REQUIRE(report.lines.back() == "PASS");
}

TEST_CASE("the oracle comparison accepts a flat-phase control run", "[io]") {
  const auto c = parse_config(
      R"({"protocol": "chern-bloch", "theta1": 0.0, "theta2": 0.8333333333333333})");
  auto b = run_protocol(c);
  b.config = c;
  const auto report = compare_to_oracle(b);
  REQUIRE(report.applicable);
  REQUIRE(report.pass);
}

TEST_CASE("the oracle comparison rejects tampered results", "[io]") {
  const auto c = parse_config(R"({"protocol": "chern-bloch"})");
  auto b = run_protocol(c);
  b.config = c;
  b.summary["chern_transport"] = -2.0;
  const auto report = compare_to_oracle(b);
  REQUIRE(report.applicable);
  REQUIRE_FALSE(report.pass);
  REQUIRE(report.lines.back() == "FAIL");
}

TEST_CASE("the oracle comparison declines protocols without an oracle",
          "[io]") {
  const auto c = parse_config(R"({"protocol": "bands", "bz_grid": 16})");
  auto b = run_protocol(c);
  b.config = c;
  REQUIRE_FALSE(compare_to_oracle(b).applicable);
}
