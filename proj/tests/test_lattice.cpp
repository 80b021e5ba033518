#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include <qwlab/lattice.hpp>

using namespace qwlab;

namespace {

SpinorField random_state(const LatticeGeometry& g, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  SpinorField f(g);
  for (size_t i = 0; i < f.up.size(); ++i) {
    f.up[i] = cplx(dist(rng), dist(rng));
    f.dn[i] = cplx(dist(rng), dist(rng));
  }
  normalize(f);
  return f;
}

}  // namespace

TEST_CASE("coordinate labels are centered and invertible", "[lattice]") {
  REQUIRE(coord(32, 64) == 0);
  REQUIRE(coord(0, 64) == -32);
  REQUIRE(coord(63, 64) == 31);
  REQUIRE(index_of_coord(0, 64) == 32);
  for (int i = 0; i < 64; ++i) {
    REQUIRE(index_of_coord(coord(i, 64), 64) == i);
  }
  for (int x = -3; x < 3; ++x) {
    REQUIRE(coord(index_of_coord(x, 6), 6) == x);
  }
}

TEST_CASE("geometry validation rejects odd or tiny lattices", "[lattice]") {
  REQUIRE_THROWS_AS(SpinorField(LatticeGeometry{63, 64}),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(SpinorField(LatticeGeometry{64, 2}),
                    std::invalid_argument);
  REQUIRE_NOTHROW(SpinorField(LatticeGeometry{4, 4}));
}

TEST_CASE("momentum grid values fold into (-pi, pi]", "[lattice]") {
  REQUIRE(momentum_value(0, 64) == 0.0);
  REQUIRE(momentum_value(1, 64) == Catch::Approx(2.0 * pi / 64).epsilon(1e-15));
  // The half-grid index lands exactly on +pi, not -pi.
  REQUIRE(momentum_value(32, 64) == Catch::Approx(pi).margin(1e-15));
  REQUIRE(momentum_value(32, 64) > 0.0);
  REQUIRE(momentum_value(33, 64) ==
          Catch::Approx(-pi + 2.0 * pi / 64).margin(1e-12));
  REQUIRE(momentum_value(63, 64) ==
          Catch::Approx(-2.0 * pi / 64).margin(1e-12));
}

TEST_CASE("delta and plane-wave states are normalized", "[lattice]") {
  LatticeGeometry g{16, 12};
  auto d = delta_state(g, 3, -2, {0.6, 0.8});
  REQUIRE(norm(d) == Catch::Approx(1.0).epsilon(1e-12));
  REQUIRE(std::abs(d.up[d.idx(index_of_coord(3, 16), index_of_coord(-2, 12))] -
                   cplx(0.6, 0.0)) < 1e-15);

  auto w = plane_wave(g, 0.3, -0.7);
  REQUIRE(norm(w) == Catch::Approx(1.0).epsilon(1e-12));

  REQUIRE_THROWS_AS(delta_state(g, 8, 0), std::invalid_argument);
  REQUIRE_THROWS_AS(delta_state(g, 0, -7), std::invalid_argument);
}

TEST_CASE("forward transform maps a labeled plane wave to a momentum delta",
          "[lattice]") {
  LatticeGeometry g{32, 16};
  const int mx = 5, my = 11;
  const double kx = momentum_value(mx, g.size_x);
  const double ky = momentum_value(my, g.size_y);
  auto f = to_momentum(plane_wave(g, kx, ky, {0.0, 1.0}));
  REQUIRE(f.rep == Representation::momentum);
  const size_t hit = f.idx(mx, my);
  REQUIRE(std::abs(f.dn[hit]) == Catch::Approx(1.0).epsilon(1e-12));
  double off = 0.0;
  for (size_t i = 0; i < f.dn.size(); ++i) {
    off += (i == hit) ? 0.0 : std::norm(f.dn[i]);
    off += std::norm(f.up[i]);
  }
  REQUIRE(off < 1e-20);
}

TEST_CASE("transform round trip preserves the state and the norm",
          "[lattice]") {
  LatticeGeometry g{24, 20};
  auto f = random_state(g, 17u);
  auto fk = to_momentum(f);
  REQUIRE(norm(fk) == Catch::Approx(1.0).epsilon(1e-12));  // Parseval
  auto back = to_position(fk);
  REQUIRE(back.rep == Representation::position);
  double max_diff = 0.0;
  for (size_t i = 0; i < f.up.size(); ++i) {
    max_diff = std::max(max_diff, std::abs(back.up[i] - f.up[i]));
    max_diff = std::max(max_diff, std::abs(back.dn[i] - f.dn[i]));
  }
  REQUIRE(max_diff < 1e-12);
}

TEST_CASE("probability map and marginals are consistent", "[lattice]") {
  LatticeGeometry g{12, 8};
  auto f = random_state(g, 3u);
  auto p = probability_map(f);
  auto px = marginal_x(f);
  auto py = marginal_y(f);
  REQUIRE(static_cast<int>(p.size()) == g.size_x * g.size_y);

  double total = 0.0;
  for (double v : p) total += v;
  REQUIRE(total == Catch::Approx(1.0).epsilon(1e-12));

  for (int ix = 0; ix < g.size_x; ++ix) {
    double col = 0.0;
    for (int iy = 0; iy < g.size_y; ++iy) col += p[f.idx(ix, iy)];
    REQUIRE(px[ix] == Catch::Approx(col).margin(1e-14));
  }
  for (int iy = 0; iy < g.size_y; ++iy) {
    double row = 0.0;
    for (int ix = 0; ix < g.size_x; ++ix) row += p[f.idx(ix, iy)];
    REQUIRE(py[iy] == Catch::Approx(row).margin(1e-14));
  }
}

TEST_CASE("circular mean is exact for a delta and unwraps around the peak",
          "[lattice]") {
  const int L = 64;
  std::vector<double> p(L, 0.0);
  p[index_of_coord(5, L)] = 1.0;
  REQUIRE(circular_mean(p, L) == Catch::Approx(5.0).margin(1e-14));

  // Two-point mass straddling the wrap seam: peak at coordinate 31, the
  // neighbor across the seam (-32) is read as 32, so the mean stays local.
  std::vector<double> q(L, 0.0);
  q[L - 1] = 0.6;  // coordinate +31 (the peak)
  q[0] = 0.4;      // coordinate -32, one site past the seam
  REQUIRE(circular_mean(q, L) == Catch::Approx(31.4).margin(1e-12));

  // Momentum-axis spacing: same distribution scaled by 2*pi/L.
  const double spacing = 2.0 * pi / L;
  REQUIRE(circular_mean(q, L, spacing) ==
          Catch::Approx(31.4 * spacing).margin(1e-12));
}

TEST_CASE("center of mass flags distributions split across the seam",
          "[lattice]") {
  LatticeGeometry g{64, 64};
  auto centered = delta_state(g, 1, -2);
  auto c0 = center_of_mass(centered);
  REQUIRE(c0.x == Catch::Approx(1.0).margin(1e-14));
  REQUIRE(c0.y == Catch::Approx(-2.0).margin(1e-14));
  REQUIRE_FALSE(c0.seam_warning_x);
  REQUIRE_FALSE(c0.seam_warning_y);

  SpinorField split(g);
  split.up[split.idx(g.size_x - 1, index_of_coord(0, g.size_y))] =
      std::sqrt(0.6);
  split.up[split.idx(0, index_of_coord(0, g.size_y))] = std::sqrt(0.4);
  auto c1 = center_of_mass(split);
  REQUIRE(c1.seam_warning_x);
  REQUIRE_FALSE(c1.seam_warning_y);
  REQUIRE(c1.x == Catch::Approx(31.4).margin(1e-12));
}
