#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include <qwlab/bands.hpp>

using namespace qwlab;

namespace {

double unitarity_defect(const Mat2& u) {
  const Mat2 p = u.adjoint() * u;
  double m = std::abs(p.a - cplx{1.0});
  m = std::max(m, std::abs(p.b));
  m = std::max(m, std::abs(p.c));
  return std::max(m, std::abs(p.d - cplx{1.0}));
}

}  // namespace

TEST_CASE("the Bloch operator is unitary across the zone", "[bands]") {
  std::mt19937 rng(7u);
  std::uniform_real_distribution<double> ang(-pi, pi);
  for (int trial = 0; trial < 50; ++trial) {
    const Mat2 u = bloch_operator(ang(rng), ang(rng), ang(rng), ang(rng));
    REQUIRE(unitarity_defect(u) < 1e-14);
  }
}

TEST_CASE("band eigenpairs satisfy the eigenvalue equation", "[bands]") {
  std::mt19937 rng(13u);
  std::uniform_real_distribution<double> ang(-pi, pi);
  for (int trial = 0; trial < 25; ++trial) {
    const double th1 = ang(rng), th2 = ang(rng);
    const double kx = ang(rng) / 2, ky = ang(rng) / 2;
    const auto bp = band_at(th1, th2, kx, ky);
    REQUIRE(bp.eps_lower <= 0.0);
    REQUIRE(bp.eps_lower >= -pi);
    const Mat2 u = bloch_operator(th1, th2, kx, ky);
    const Spinor lhs = u * bp.u_lower;
    const cplx lambda = std::polar(1.0, -bp.eps_lower);
    REQUIRE(std::abs(lhs[0] - lambda * bp.u_lower[0]) < 1e-12);
    REQUIRE(std::abs(lhs[1] - lambda * bp.u_lower[1]) < 1e-12);
    REQUIRE(norm2(bp.u_lower) == Catch::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("quasienergy gaps match frozen reference values", "[bands]") {
  struct Row {
    double th1, th2, gap_zero, gap_pi;
  };
  const Row table[] = {
      {-pi / 2, pi / 2, 1.570796, 0.973390},
      {pi / 2, pi / 2, 1.570796, 0.973390},
      {0.0, 5 * pi / 6, 2.617994, 2.617994},
      {-pi / 4, pi / 5, 0.942478, 0.578888},
      {-pi / 4, pi, 1.570796, 1.570796},
  };
  for (const auto& r : table) {
    const auto s = band_solve(r.th1, r.th2, 96);
    REQUIRE(s.gap_zero == Catch::Approx(r.gap_zero).margin(1e-6));
    REQUIRE(s.gap_pi == Catch::Approx(r.gap_pi).margin(1e-6));
    REQUIRE(s.gap == Catch::Approx(std::min(r.gap_zero, r.gap_pi)).margin(1e-6));
    REQUIRE_FALSE(s.gap_closed);
  }
}

TEST_CASE("plaquette Chern numbers are exact integers at the anchor angles",
          "[bands]") {
  struct Row {
    double th1, th2;
    double chern;
  };
  const Row table[] = {
      {-pi / 2, pi / 2, -1.0},
      {pi / 2, pi / 2, -1.0},
      {0.0, 5 * pi / 6, 0.0},
  };
  for (const auto& r : table) {
    const auto m = curvature_plaquette(band_solve(r.th1, r.th2, 64));
    REQUIRE(std::abs(m.chern - r.chern) < 1e-10);
  }
}

TEST_CASE("plaquette curvature ignores the eigenvector gauge", "[bands]") {
  auto s = band_solve(-pi / 2, pi / 2, 24);
  const auto base = curvature_plaquette(s);

  auto redressed = s;
  std::mt19937 rng(5u);
  std::uniform_real_distribution<double> ph(-pi, pi);
  for (auto& u : redressed.u_lower) {
    const cplx z = std::polar(1.0, ph(rng));
    u[0] *= z;
    u[1] *= z;
  }
  const auto again = curvature_plaquette(redressed);
  REQUIRE(std::abs(again.chern - base.chern) < 1e-10);
  for (size_t i = 0; i < base.omega.size(); ++i) {
    REQUIRE(std::abs(again.omega[i] - base.omega[i]) < 1e-10);
  }
}

TEST_CASE("the upper band mirrors the lower band's curvature", "[bands]") {
  auto s = band_solve(-pi / 2, pi / 2, 48);
  const auto lower = curvature_plaquette(s);

  auto upper_solution = s;
  for (size_t i = 0; i < s.u_lower.size(); ++i) {
    upper_solution.u_lower[i] = orthogonal_spinor(s.u_lower[i]);
  }
  const auto upper = curvature_plaquette(upper_solution);
  REQUIRE(std::abs(upper.chern + lower.chern) < 1e-10);
  for (size_t i = 0; i < lower.omega.size(); ++i) {
    REQUIRE(std::abs(upper.omega[i] + lower.omega[i]) < 1e-8);
  }
}

TEST_CASE("curvature computations refuse a closed gap", "[bands]") {
  const auto s = band_solve(pi / 2, pi, 24);
  REQUIRE(s.gap_closed);
  REQUIRE_THROWS_AS(curvature_plaquette(s), std::invalid_argument);
  REQUIRE_THROWS_AS(band_solve(0.3, 0.7, 3), std::invalid_argument);
}

TEST_CASE("short path averages converge to the local curvature", "[bands]") {
  const double th1 = -pi / 2, th2 = pi / 2;
  for (auto [kx, ky] : {std::pair{0.2, -0.4}, std::pair{-1.1, 0.7}}) {
    const double span = 0.02;
    const double integral = curvature_path_average(th1, th2, kx, ky, span);
    const double local = curvature_local(th1, th2, kx, ky + span / 2);
    REQUIRE(integral / span == Catch::Approx(local).margin(5e-4));
  }
}

TEST_CASE("Wannier-center winding agrees with the plaquette Chern number",
          "[bands]") {
  REQUIRE(std::lround(chern_wannier(-pi / 2, pi / 2)) == -1);
  REQUIRE(std::lround(chern_wannier(pi / 2, pi / 2)) == -1);
  REQUIRE(std::lround(chern_wannier(0.0, 5 * pi / 6)) == 0);
  REQUIRE(std::lround(chern_wannier(-pi / 4, pi / 5)) == -1);
  REQUIRE(std::lround(chern_wannier(-pi / 4, pi)) == 0);
}

TEST_CASE("the phase diagram reproduces anchor cells and flags closures",
          "[bands]") {
  const auto d = phase_diagram(12, 12, 24);
  REQUIRE(d.theta1[2] == Catch::Approx(-pi / 2).margin(1e-12));
  REQUIRE(d.theta2[8] == Catch::Approx(pi / 2).margin(1e-12));
  REQUIRE(d.theta1[5] == Catch::Approx(0.0).margin(1e-12));
  REQUIRE(d.theta2[10] == Catch::Approx(5 * pi / 6).margin(1e-12));

  REQUIRE(d.gap_closed[d.idx(2, 8)] == 0);
  REQUIRE(d.chern[d.idx(2, 8)] == -1);
  REQUIRE(d.gap_closed[d.idx(5, 10)] == 0);
  REQUIRE(d.chern[d.idx(5, 10)] == 0);

  // theta1 = pi/2, theta2 = pi closes the gap.
  REQUIRE(d.theta1[8] == Catch::Approx(pi / 2).margin(1e-12));
  REQUIRE(d.theta2[11] == Catch::Approx(pi).margin(1e-12));
  REQUIRE(d.gap_closed[d.idx(8, 11)] == 1);

  int closed = 0;
  for (auto v : d.gap_closed) closed += v;
  REQUIRE(closed > 0);
  REQUIRE(closed < static_cast<int>(d.gap_closed.size()));
}
