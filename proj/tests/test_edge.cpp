#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <stdexcept>

#include <qwlab/edge.hpp>

using namespace qwlab;

namespace {

EdgeConfig two_domain_defaults() {
  EdgeConfig cfg;
  cfg.theta1 = -pi / 4;
  cfg.theta2_left = pi;
  cfg.theta2_right = 0.2 * pi;
  return cfg;
}

}  // namespace

TEST_CASE("a packet launched at the interface stays confined and drifts",
          "[edge]") {
  const auto m = run_edge(two_domain_defaults());
  REQUIRE(m.series.size() == 13);
  REQUIRE(m.series[0].p_edge == Catch::Approx(1.0).margin(1e-12));
  REQUIRE(m.series[0].y_drift_edge == Catch::Approx(0.0).margin(1e-12));
  REQUIRE(m.p_edge == Catch::Approx(0.09456108).margin(1e-5));
  REQUIRE(m.y_drift_edge == Catch::Approx(-12.371985).margin(1e-3));
  REQUIRE(m.chirality_defined);
  REQUIRE(m.chirality == -1);
}

TEST_CASE("interface confinement beats the homogeneous control every step",
          "[edge]") {
  const auto cfg = two_domain_defaults();
  const auto m = run_edge(cfg);
  auto hom = cfg;
  hom.theta2_left = cfg.theta2_right;
  const auto mc = run_edge(hom);
  REQUIRE(mc.p_edge == Catch::Approx(0.03164776).margin(1e-5));
  REQUIRE(m.p_edge / mc.p_edge == Catch::Approx(2.987923).margin(1e-3));
  for (size_t t = 4; t < m.series.size(); ++t) {
    REQUIRE(m.series[t].p_edge > mc.series[t].p_edge);
  }
}

TEST_CASE("negating the first coin and swapping domains reverses the drift",
          "[edge]") {
  const auto sw = chirality_swap_test(two_domain_defaults());
  REQUIRE(sw.conclusive);
  REQUIRE(sw.reversed);
  REQUIRE(sw.base.chirality == -1);
  REQUIRE(sw.swapped.chirality == +1);
  REQUIRE(sw.swapped.p_edge == Catch::Approx(0.076885).margin(1e-5));
  REQUIRE(sw.swapped.y_drift_edge == Catch::Approx(11.569691).margin(1e-3));
}

TEST_CASE("the confinement readout responds smoothly to the window width",
          "[edge]") {
  auto cfg = two_domain_defaults();
  cfg.edge_width = 3;
  const auto m3 = run_edge(cfg);
  REQUIRE(m3.p_edge == Catch::Approx(0.087277).margin(1e-5));
  REQUIRE(m3.y_drift_edge == Catch::Approx(-12.390967).margin(1e-3));

  cfg.edge_width = 6;
  const auto m6 = run_edge(cfg);
  REQUIRE(m6.p_edge == Catch::Approx(0.140938).margin(1e-5));
  REQUIRE(m6.y_drift_edge == Catch::Approx(-11.424383).margin(1e-3));
}

TEST_CASE("the final state keeps the even-column structure of the walk",
          "[edge]") {
  const auto m = run_edge(two_domain_defaults());
  const auto px = marginal_x(m.state);
  const int sx = m.state.geometry.size_x;
  REQUIRE(px[index_of_coord(-2, sx)] == Catch::Approx(0.007284).margin(1e-5));
  REQUIRE(px[index_of_coord(0, sx)] == Catch::Approx(0.087277).margin(1e-5));
  REQUIRE(px[index_of_coord(2, sx)] == Catch::Approx(0.046376).margin(1e-5));
  for (int ix = 0; ix < sx; ++ix) {
    if (coord(ix, sx) % 2 != 0) REQUIRE(px[ix] == 0.0);
  }
}

TEST_CASE("interface experiment validation", "[edge]") {
  auto cfg = two_domain_defaults();
  cfg.steps = -1;
  REQUIRE_THROWS_AS(cfg.validate(), std::invalid_argument);

  cfg = two_domain_defaults();
  cfg.edge_width = 0;
  REQUIRE_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.edge_width = 33;  // more than half the 64-wide lattice
  REQUIRE_THROWS_AS(cfg.validate(), std::invalid_argument);

  cfg = two_domain_defaults();
  cfg.steps = 17;  // needs size_x >= 68
  REQUIRE_THROWS_AS(cfg.validate(), std::invalid_argument);

  REQUIRE_NOTHROW(two_domain_defaults().validate());
}

TEST_CASE("bulk invariants, strip modes, and wave-packet drift agree",
          "[edge]") {
  const auto bb = bulk_boundary_check(two_domain_defaults());
  REQUIRE(bb.chern_left == 0);
  REQUIRE(bb.chern_right == -1);
  REQUIRE(bb.delta_chern == 1);
  REQUIRE(bb.ribbon.zero_gap_b.net == +1);
  REQUIRE(bb.ribbon.zero_gap_b.chirality == -1);
  REQUIRE(bb.ribbon.zero_gap_b.velocity == Catch::Approx(-1.1603).margin(5e-3));
  REQUIRE(bb.ribbon.pi_gap_b.net == 0);
  REQUIRE(bb.edge.chirality == -1);
  REQUIRE(bb.counts_match);
  REQUIRE(bb.chirality_match);
  REQUIRE(bb.consistent);
}
