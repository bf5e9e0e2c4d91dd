#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <numbers>

#include "csl/bubbles.hpp"
#include "csl/field.hpp"
#include "csl/radial_operator.hpp"

using namespace csl;
using std::numbers::pi;

namespace {
std::shared_ptr<RadialGrid> ball_grid(int n = 256) {
  return std::make_shared<RadialGrid>(n, 1.0);
}
}  // namespace

TEST_CASE("integrate: constants on the unit ball") {
  auto g = ball_grid();
  ScalarField one = radial_field(g, [](double) { return 1.0; }, "1");
  CHECK(integrate(one) == Catch::Approx(4.0 * pi / 3.0).epsilon(1e-12));
  ScalarField zero = radial_field(g, [](double) { return 0.0; }, "0");
  CHECK(integrate(zero) == 0.0);
}

TEST_CASE("integrate: sixth power of the bubble") {
  auto g = ball_grid();
  BubbleParams p = BubbleParams::make(Domain::ball(), Vec3::Zero(), 50.0);
  ScalarField u = u_bubble(g, p);
  ScalarField u6 = pow(u, 6.0);
  CHECK(integrate(u6) == Catch::Approx(pi * pi / 4.0).margin(1e-4));
}

TEST_CASE("integrate: quadrature converges on exp(-r^2)") {
  const double exact =
      4.0 * pi * (std::sqrt(pi) / 4.0 * std::erf(1.0) - 0.5 * std::exp(-1.0));
  double err_coarse = 0.0, err_fine = 0.0;
  for (int n : {6, 64}) {
    auto g = std::make_shared<RadialGrid>(n, 1.0);
    ScalarField f =
        radial_field(g, [](double r) { return std::exp(-r * r); }, "f");
    double e = std::abs(integrate(f) - exact);
    (n == 6 ? err_coarse : err_fine) = e;
  }
  CHECK(err_fine < err_coarse);
  CHECK(err_fine < 1e-12);
}

TEST_CASE("h1_inner: symmetry and positivity") {
  auto g = ball_grid(64);
  ScalarField u = radial_field(g, [](double r) { return 1.0 - r * r; }, "u");
  ScalarField v =
      radial_field(g, [](double r) { return std::cos(pi * r / 2.0); }, "v");
  double uv = h1_inner(u, v), vu = h1_inner(v, u);
  CHECK(uv == Catch::Approx(vu).epsilon(1e-12));
  CHECK(h1_inner(u, u) > 0.0);
  ScalarField z = radial_field(g, [](double) { return 0.0; }, "z");
  CHECK(h1_inner(z, z) == 0.0);
}

TEST_CASE("h1_inner: bubble Dirichlet energy on the ball") {
  // For U restricted to the unit ball the boundary terms shift the energy
  // away from the whole-space value 3 pi^2 / 4; the analytic restricted
  // value at lambda = 50 is integral_0^1 |U'|^2 4 pi r^2 dr.
  auto g = ball_grid(256);
  const double lam = 50.0;
  BubbleParams p = BubbleParams::make(Domain::ball(), Vec3::Zero(), lam);
  ScalarField u = u_bubble(g, p);
  // analytic: |U'(r)|^2 = lam^5 r^2 / (1+lam^2 r^2)^3
  auto integrand = [lam](double r) {
    double t = lam * r;
    return std::pow(lam, 5.0) * r * r / std::pow(1.0 + t * t, 3.0) * 4.0 * pi *
           r * r;
  };
  // high-order composite Simpson reference
  const int m = 20000;
  double exact = 0.0, h = 1.0 / m;
  for (int i = 0; i < m; ++i) {
    double r0 = i * h, r1 = r0 + h, rm = r0 + 0.5 * h;
    exact += h / 6.0 * (integrand(r0) + 4.0 * integrand(rm) + integrand(r1));
  }
  CHECK(h1_inner(u, u) == Catch::Approx(exact).epsilon(2e-3));
}

TEST_CASE("h1_inner: discrete Green identity against the laplacian") {
  auto g = ball_grid(64);
  ScalarField u = radial_field(g, [](double r) { return 1.0 - r * r; }, "u");
  ScalarField v = radial_field(
      g, [](double r) { return (1.0 - r) * std::exp(-r); }, "v");
  double lhs = h1_inner(u, v);
  double rhs = -integrate(pointwise(v, laplacian(u)));
  CHECK(lhs == Catch::Approx(rhs).margin(1e-10));
}

TEST_CASE("lp_norm: examples and scaling") {
  auto g = ball_grid(128);
  ScalarField c = radial_field(g, [](double) { return -3.0; }, "c");
  CHECK(lp_norm(c, 2.0) ==
        Catch::Approx(3.0 * std::sqrt(4.0 * pi / 3.0)).epsilon(1e-12));
  CHECK(lp_norm(c, std::numeric_limits<double>::infinity()) == 3.0);
  BubbleParams p = BubbleParams::make(Domain::ball(), Vec3::Zero(), 50.0);
  ScalarField u = u_bubble(ball_grid(256), p);
  CHECK(lp_norm(u, 6.0) ==
        Catch::Approx(std::pow(pi * pi / 4.0, 1.0 / 6.0)).margin(1e-4));
  CHECK(lp_norm(2.5 * u, 6.0) ==
        Catch::Approx(2.5 * lp_norm(u, 6.0)).epsilon(1e-13));
  CHECK_THROWS_AS(lp_norm(u, 0.5), InvalidExponent);
}

TEST_CASE("field arithmetic: grid mismatch is rejected") {
  ScalarField a = radial_field(ball_grid(32), [](double) { return 1.0; }, "a");
  ScalarField b = radial_field(ball_grid(48), [](double) { return 1.0; }, "b");
  CHECK_THROWS_AS(a + b, DomainMismatch);
  CHECK_THROWS_AS(h1_inner(a, b), DomainMismatch);
}

TEST_CASE("volumetric integrate: box volume and interior weighting") {
  Domain dom = Domain::box(Vec3(0, 0, 0), Vec3(1, 2, 3));
  auto g = std::make_shared<Grid3D>(dom, 9, 9, 9);
  ScalarField one = volumetric_field(g, [](const Vec3&) { return 1.0; }, "1");
  CHECK(integrate(one) == Catch::Approx(6.0).epsilon(1e-12));
}

TEST_CASE("volumetric h1_inner: separable eigenfunction energy") {
  Domain dom = Domain::box(Vec3(-1, -1, -1), Vec3(1, 1, 1));
  auto g = std::make_shared<Grid3D>(dom, 33, 33, 33);
  ScalarField u = volumetric_field(
      g,
      [](const Vec3& y) {
        return std::cos(pi * y.x() / 2) * std::cos(pi * y.y() / 2) *
               std::cos(pi * y.z() / 2);
      },
      "eig");
  // integral |grad u|^2 = 3 * (pi^2/4) = 7.40220...
  CHECK(h1_inner(u, u) == Catch::Approx(3.0 * pi * pi / 4.0).epsilon(5e-3));
}
