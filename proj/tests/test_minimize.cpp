#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <numbers>

#include "csl/minimize.hpp"

using namespace csl;
using std::numbers::pi;

namespace {
const double kCritical = -pi * pi / 4.0;

std::shared_ptr<RadialGrid> ball_grid(int n = 512) {
  return std::make_shared<RadialGrid>(n, 1.0);
}

ScalarField psi_init(std::shared_ptr<RadialGrid> g, const GreensData& ga,
                     const GreensData& g0, double lam) {
  BubbleParams p = BubbleParams::make(Domain::ball(), Vec3::Zero(), lam);
  return psi_trial(pu_bubble(g, p), p, ga, g0);
}
}  // namespace

TEST_CASE("radial minimize: concentrating regime at eps = 0.02") {
  auto g = ball_grid();
  auto gp = std::shared_ptr<const RadialGrid>(g);
  GreensData ga = solve_greens_radial(gp, kCritical);
  GreensData g0 = solve_greens_radial(gp, 0.0);
  const double s = sobolev_constant();
  const double eps = 0.02;
  const double lam_star = pi * pi * pi / (2.0 * eps);

  Eigen::VectorXd a_prof =
      Eigen::VectorXd::Constant(g->order() + 1, kCritical);
  Eigen::VectorXd v_prof = Eigen::VectorXd::Constant(g->order() + 1, -1.0);
  ScalarField psi = psi_init(g, ga, g0, lam_star);
  MinimizeResult r = minimize_rayleigh(g, a_prof, v_prof, eps, psi);

  CHECK(r.s_est < s);
  // S - S_est ~ 0.150 eps^2 within 35%
  double drop = s - r.s_est;
  CHECK(drop == Catch::Approx(0.14996 * eps * eps).epsilon(0.35));
  // normalization invariant after the final renormalization
  CHECK(integrate(pow(r.minimizer, 6.0)) ==
        Catch::Approx(pi * pi / 4.0).margin(1e-10));
  // the minimizer can only improve on the trial function
  ScalarField a_f = r.minimizer.with_values(a_prof, "a");
  ScalarField v_f = r.minimizer.with_values(v_prof, "V");
  CHECK(r.s_est <= rayleigh(psi, a_f, v_f, eps) + 1e-12);
  CHECK(r.initial_quotient >= r.s_est);

  SECTION("blow-up decomposition of the minimizer") {
    BlowupReport b = fit_decomposition(r.minimizer, ga, g0, eps);
    CHECK(b.correlation > 0.99);
    CHECK(b.eps_lambda > 0.7 * pi * pi * pi / 2.0);
    CHECK(b.eps_lambda < 1.3 * pi * pi * pi / 2.0);
    CHECK(std::abs(b.phi_a_over_eps) < 0.5);
    CHECK(b.r_norm_over_eps <= 0.5);
    // w is orthogonal to the zero-mode space by construction; check the
    // reconstruction through the reported data
    CHECK(b.alpha == Catch::Approx(1.0).margin(0.1));
  }

  SECTION("almost-minimizer gap certification") {
    double gap_min =
        almost_minimizer_gap(rayleigh(r.minimizer, a_f, v_f, eps), r.s_est);
    CHECK(std::abs(gap_min) < 1e-6);
    double gap_psi =
        almost_minimizer_gap(rayleigh(psi, a_f, v_f, eps), r.s_est);
    CHECK(gap_psi >= 0.0);
    CHECK(gap_psi < 0.3);
    // off-center bubble fails the almost-minimizer test
    BubbleParams wrong =
        BubbleParams::make(Domain::ball(), Vec3(0.5, 0, 0), lam_star);
    ScalarField uw = u_bubble(g, wrong);
    Eigen::VectorXd vals = uw.values();
    vals[g->order()] = 0.0;  // enforce the Dirichlet boundary value
    ScalarField uwc = uw.with_values(vals, "offcenter");
    double gap_bad =
        almost_minimizer_gap(rayleigh(uwc, a_f, v_f, eps), r.s_est);
    CHECK(gap_bad > 1.0);
  }
}

TEST_CASE("radial minimize: eps = 0 on the critical ball has no minimizer") {
  auto g = ball_grid(256);
  auto gp = std::shared_ptr<const RadialGrid>(g);
  GreensData ga = solve_greens_radial(gp, kCritical);
  GreensData g0 = solve_greens_radial(gp, 0.0);
  Eigen::VectorXd a_prof =
      Eigen::VectorXd::Constant(g->order() + 1, kCritical);
  Eigen::VectorXd v_prof = Eigen::VectorXd::Zero(g->order() + 1);
  MinimizeOptions opts;
  opts.max_iterations = 120;
  opts.gtol = 0.0;  // never declare convergence; the infimum is not attained
  ScalarField psi = psi_init(g, ga, g0, 100.0);
  MinimizeResult r = minimize_rayleigh(g, a_prof, v_prof, 0.0, psi, opts);
  CHECK(r.s_est >= sobolev_constant() - 5e-4);
  CHECK(r.exit_reason != MinimizeResult::Exit::Converged);
}

TEST_CASE("radial minimize: error paths") {
  auto g = ball_grid(64);
  Eigen::VectorXd ok = Eigen::VectorXd::Zero(g->order() + 1);
  Eigen::VectorXd bad =
      Eigen::VectorXd::Constant(g->order() + 1, -1.2 * pi * pi);
  ScalarField init =
      radial_field(g, [](double r) { return 1.0 - r; }, "init");
  CHECK_THROWS_AS(minimize_rayleigh(g, bad, ok, 0.0, init), NonCoercive);
  ScalarField zero = radial_field(g, [](double) { return 0.0; }, "0");
  CHECK_THROWS_AS(minimize_rayleigh(g, ok, ok, 0.0, zero), ZeroField);
}

TEST_CASE("box minimize: flat case stays above the Sobolev constant") {
  Domain dom = Domain::box(Vec3(-1, -1, -1), Vec3(1, 1, 1));
  auto grid = std::make_shared<Grid3D>(dom, 33, 33, 33);
  ScalarField z = volumetric_field(grid, [](const Vec3&) { return 0.0; }, "0");
  BubbleParams p = BubbleParams::make(dom, Vec3::Zero(), 5.0);
  ScalarField u0 = u_bubble(std::shared_ptr<const Grid3D>(grid), p);
  Eigen::VectorXd vals = u0.values();
  for (int id = 0; id < grid->num_nodes(); ++id)
    if (!grid->is_interior(id)) vals[id] = 0.0;
  ScalarField init = u0.with_values(vals, "bubble");
  MinimizeOptions opts;
  opts.max_iterations = 200;
  MinimizeResult r = minimize_rayleigh(
      std::shared_ptr<const Grid3D>(grid), z, z, 0.0, init, opts);
  CHECK(r.s_est >= sobolev_constant() - 2e-3);
  CHECK(r.s_est <= r.initial_quotient);
}

TEST_CASE("epsilon_sweep: V = 0 is eps-independent; input validation") {
  auto g = ball_grid(256);
  auto zero = [](double) { return 0.0; };
  auto crit = [](double) { return kCritical; };
  MinimizeOptions opts;
  opts.max_iterations = 400;
  EpsilonSweepResult sw =
      epsilon_sweep(g, crit, zero, {0.3, 0.2, 0.1}, opts, 1);
  for (const auto& e : sw.entries)
    CHECK(e.s_est == Catch::Approx(sw.entries[0].s_est).margin(1e-10));

  CHECK_THROWS_AS(epsilon_sweep(g, crit, zero, {0.1, 0.2, 0.3}, opts, 1),
                  InsufficientSweep);
  CHECK_THROWS_AS(epsilon_sweep(g, crit, zero, {0.1, 0.05}, opts, 1),
                  InsufficientSweep);
}

TEST_CASE("fit_decomposition: synthetic oracles") {
  auto g = ball_grid(256);
  auto gp = std::shared_ptr<const RadialGrid>(g);
  GreensData ga = solve_greens_radial(gp, kCritical);
  GreensData g0 = solve_greens_radial(gp, 0.0);

  SECTION("pure PU is recovered exactly") {
    BubbleParams p = BubbleParams::make(Domain::ball(), Vec3::Zero(), 60.0);
    ScalarField pu = pu_bubble(g, p);
    BlowupReport b = fit_decomposition(pu, ga, g0);
    CHECK(b.alpha == Catch::Approx(1.0).margin(1e-6));
    CHECK(b.lambda == Catch::Approx(60.0).epsilon(1e-4));
    CHECK(b.x.norm() < 1e-12);
    CHECK(b.w_norm < 1e-6);
  }

  SECTION("synthetic w perpendicular to T is recovered") {
    BubbleParams p = BubbleParams::make(Domain::ball(), Vec3::Zero(), 60.0);
    BubbleBasis basis = zero_mode_basis(gp, p);
    ScalarField bump = radial_field(
        g, [](double r) { return r * (1.0 - r) * std::exp(-3.0 * r); },
        "bump");
    ScalarField w_raw = project_T_perp(bump, basis);
    double wn = std::sqrt(h1_inner(w_raw, w_raw));
    ScalarField w = (0.01 / wn) * w_raw;
    const double alpha = 1.37;
    ScalarField u = alpha * (basis.modes[0] + w);
    BlowupReport b = fit_decomposition(u, ga, g0);
    CHECK(b.alpha == Catch::Approx(alpha).epsilon(1e-3));
    CHECK(b.lambda == Catch::Approx(60.0).epsilon(1e-3));
    CHECK(b.w_norm == Catch::Approx(0.01).epsilon(0.05));
  }

  SECTION("zero field and degenerate fits are rejected") {
    ScalarField z = radial_field(g, [](double) { return 0.0; }, "0");
    CHECK_THROWS_AS(fit_decomposition(z, ga, g0), ZeroField);
  }
}

TEST_CASE("almost_minimizer_gap: division guard") {
  CHECK_THROWS_AS(almost_minimizer_gap(5.4, sobolev_constant()),
                  DivisionUnstable);
}
