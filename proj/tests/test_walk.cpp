#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include <qwlab/bands.hpp>
#include <qwlab/lattice.hpp>
#include <qwlab/walk.hpp>

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

double max_amp_diff(const SpinorField& a, const SpinorField& b) {
  double m = 0.0;
  for (size_t i = 0; i < a.up.size(); ++i) {
    m = std::max(m, std::abs(a.up[i] - b.up[i]));
    m = std::max(m, std::abs(a.dn[i] - b.dn[i]));
  }
  return m;
}

}  // namespace

TEST_CASE("one step with quarter-turn coins spreads into eight amplitudes",
          "[walk]") {
  // Independent hand computation for theta1 = theta2 = pi/2 from a spin-up
  // delta at the origin: eight amplitudes of magnitude 2^{-3/2}, all real.
  LatticeGeometry g{16, 16};
  WalkParams p{pi / 2, pi / 2, 0.0, 1};
  auto f = walk_step(delta_state(g, 0, 0), p, 0);

  const double a = 1.0 / (2.0 * std::sqrt(2.0));
  struct Entry {
    int x, y;
    bool up;
    double value;
  };
  const Entry expected[] = {
      {+2, +2, true, +a}, {0, +2, false, +a},  {+2, 0, true, -a},
      {0, 0, true, -a},   {0, 0, false, +a},   {-2, 0, false, -a},
      {0, -2, true, -a},  {-2, -2, false, +a},
  };
  double accounted = 0.0;
  for (const auto& e : expected) {
    const size_t i =
        f.idx(index_of_coord(e.x, g.size_x), index_of_coord(e.y, g.size_y));
    const cplx amp = e.up ? f.up[i] : f.dn[i];
    REQUIRE(std::abs(amp - cplx(e.value, 0.0)) < 1e-14);
    accounted += std::norm(amp);
  }
  REQUIRE(accounted == Catch::Approx(1.0).epsilon(1e-12));
  REQUIRE(norm(f) == Catch::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("a single-site start never populates odd columns", "[walk]") {
  LatticeGeometry g{32, 32};
  WalkParams p{-pi / 2, pi / 2, 0.1 * pi, 7};
  auto f = evolve(delta_state(g, 0, 0, {0.6, 0.8}), p);
  for (int ix = 0; ix < g.size_x; ++ix) {
    if (coord(ix, g.size_x) % 2 == 0) continue;
    for (int iy = 0; iy < g.size_y; ++iy) {
      REQUIRE(f.up[f.idx(ix, iy)] == cplx{});
      REQUIRE(f.dn[f.idx(ix, iy)] == cplx{});
    }
  }
}

TEST_CASE("evolution is unitary on random states", "[walk]") {
  LatticeGeometry g{24, 24};
  WalkParams p{0.37, -1.21, 0.05 * pi, 10};
  for (unsigned seed : {1u, 2u, 3u}) {
    auto f = evolve(random_state(g, seed), p);
    REQUIRE(std::abs(norm(f) - 1.0) < 1e-12);
  }
}

TEST_CASE("the diagonal translation is the composition of the axis moves",
          "[walk]") {
  LatticeGeometry g{12, 10};
  auto f = random_state(g, 11u);
  auto via_xy = translate(f, Axis::xy);
  auto via_steps = translate(translate(f, Axis::x), Axis::y);
  REQUIRE(max_amp_diff(via_xy, via_steps) == 0.0);

  // Spin-up moves +1, spin-down -1 along the axis.
  auto d = translate(delta_state(g, 1, -1, {0.6, 0.8}), Axis::x);
  REQUIRE(std::abs(d.up[d.idx(index_of_coord(2, 12), index_of_coord(-1, 10))] -
                   cplx(0.6, 0.0)) < 1e-15);
  REQUIRE(std::abs(d.dn[d.idx(index_of_coord(0, 12), index_of_coord(-1, 10))] -
                   cplx(0.8, 0.0)) < 1e-15);
}

TEST_CASE("the force acts only on the leading force_steps steps", "[walk]") {
  LatticeGeometry g{16, 16};
  auto f = random_state(g, 5u);
  WalkParams forced{0.4, 0.9, 0.2 * pi, 6, 3};
  WalkParams free{0.4, 0.9, 0.0, 6, -1};
  // At t >= force_steps the step must be bitwise identical to the force-free
  // step; at t < force_steps it must differ.
  auto with_force = walk_step(f, forced, 3);
  auto without = walk_step(f, free, 3);
  REQUIRE(max_amp_diff(with_force, without) == 0.0);
  REQUIRE(max_amp_diff(walk_step(f, forced, 0), without) > 1e-3);
  REQUIRE(forced.active_force_steps() == 3);
  REQUIRE(free.active_force_steps() == 6);
}

TEST_CASE("the force phase raises every momentum label by F", "[walk]") {
  LatticeGeometry g{16, 16};
  auto f = random_state(g, 9u);
  const double F = momentum_value(1, g.size_y);  // one grid unit in k_y
  auto shifted = f;
  apply_force_phase(shifted, F);
  auto fk = to_momentum(f);
  auto sk = to_momentum(shifted);
  double max_diff = 0.0;
  for (int my = 0; my < g.size_y; ++my) {
    const int my_up = (my + 1) % g.size_y;
    for (int mx = 0; mx < g.size_x; ++mx) {
      max_diff = std::max(
          max_diff, std::abs(sk.up[sk.idx(mx, my_up)] - fk.up[fk.idx(mx, my)]));
      max_diff = std::max(
          max_diff, std::abs(sk.dn[sk.idx(mx, my_up)] - fk.dn[fk.idx(mx, my)]));
    }
  }
  REQUIRE(max_diff < 1e-12);
}

TEST_CASE("uniform column angles reproduce the homogeneous walk bit for bit",
          "[walk]") {
  LatticeGeometry g{20, 20};
  auto f = random_state(g, 21u);
  WalkParams p{-0.62, 1.13, 0.0, 5};
  AngleField angles{p.theta1, std::vector<double>(g.size_x, p.theta2)};
  auto homogeneous = evolve(f, p);
  auto inhomogeneous = evolve_inhomogeneous(f, angles, p.steps);
  REQUIRE(max_amp_diff(homogeneous, inhomogeneous) == 0.0);
}

TEST_CASE("plane waves dressed with the band spinor are walk eigenstates",
          "[walk]") {
  LatticeGeometry g{32, 32};
  const double th1 = -pi / 2, th2 = pi / 2;
  for (auto [mx, my] : {std::pair{3, 7}, std::pair{10, 29}, std::pair{0, 5}}) {
    const double kx = momentum_value(mx, g.size_x);
    const double ky = momentum_value(my, g.size_y);
    auto bp = band_at(th1, th2, kx, ky);
    auto f = plane_wave(g, kx, ky, bp.u_lower);
    WalkParams p{th1, th2, 0.0, 1};
    auto stepped = walk_step(f, p, 0);
    const cplx phase = std::polar(1.0, -bp.eps_lower);
    double max_diff = 0.0;
    for (size_t i = 0; i < f.up.size(); ++i) {
      max_diff = std::max(max_diff, std::abs(stepped.up[i] - phase * f.up[i]));
      max_diff = std::max(max_diff, std::abs(stepped.dn[i] - phase * f.dn[i]));
    }
    REQUIRE(max_diff < 1e-12);
  }
}
