#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <numbers>

#include "csl/asymptotics.hpp"

using namespace csl;
using std::numbers::pi;

TEST_CASE("Sobolev constant and its algebraic companions") {
  const double s = sobolev_constant();
  CHECK(s == Catch::Approx(3.0 * std::pow(pi / 2.0, 4.0 / 3.0)).epsilon(1e-15));
  SobolevTable t = sobolev_table();
  CHECK(t.s32_over_3 == Catch::Approx(pi * pi / 4.0).epsilon(1e-14));
  CHECK(t.s32_scaled == Catch::Approx(3.0 * pi * pi / 4.0).epsilon(1e-14));
  CHECK(t.inv_sqrt ==
        Catch::Approx(std::pow(pi / 2.0, -2.0 / 3.0)).epsilon(1e-14));
}

TEST_CASE("predictors: vanishing corrections return leading terms") {
  ExpansionInputs flat{0.0, 0.0, 0.0};
  CHECK(predict_numerator(100.0, 0.0, flat) ==
        Catch::Approx(3.0 * pi * pi / 4.0).epsilon(1e-14));
  CHECK(predict_denominator(100.0, flat) ==
        Catch::Approx(pi * pi / 4.0).epsilon(1e-14));
  CHECK(predict_quotient(100.0, 0.0, flat) ==
        Catch::Approx(sobolev_constant()).epsilon(1e-14));
}

TEST_CASE("predictors: critical-ball quotient and epsilon linearity") {
  ExpansionInputs in{0.0, -pi * pi / 4.0, -2.0 * pi};  // phi, a(x), Q_V
  const double lam = 100.0, s = sobolev_constant();
  double coeff = std::pow(s / 3.0, -0.5) * 2.0 * pi * pi * (pi * pi / 4.0);
  CHECK(predict_quotient(lam, 0.0, in) ==
        Catch::Approx(s + coeff / (lam * lam)).epsilon(1e-12));
  // the epsilon term enters as (S/3)^{-1/2} Q_V eps / lambda
  double d1 = predict_quotient(lam, 0.02, in) - predict_quotient(lam, 0.0, in);
  double d2 = predict_quotient(lam, 0.04, in) - predict_quotient(lam, 0.0, in);
  CHECK(d2 == Catch::Approx(2.0 * d1).epsilon(1e-10));
  CHECK(d1 == Catch::Approx(std::pow(s / 3.0, -0.5) * (-2.0 * pi) * 0.02 / lam)
                  .epsilon(1e-10));
}

TEST_CASE("predict_limit: concentrating, flat, and degenerate regimes") {
  // ball data: a = -pi^2/4, Q_V = -2 pi at the single zero-set point
  std::vector<ZeroSetSample> ball = {
      {Vec3::Zero(), -pi * pi / 4.0, -2.0 * pi}};
  LimitPrediction lp = predict_limit(ball);
  CHECK(lp.verdict == LimitPrediction::Verdict::NegativeRegime);
  double expected = -std::sqrt(3.0 / sobolev_constant()) *
                    (2.0 * pi) * (2.0 * pi) /
                    (8.0 * pi * pi * (pi * pi / 4.0));
  CHECK(lp.coefficient == Catch::Approx(expected).epsilon(1e-12));
  CHECK(lp.coefficient == Catch::Approx(-0.14996).epsilon(1e-4));

  // quadratic scaling in V
  std::vector<ZeroSetSample> scaled = {
      {Vec3::Zero(), -pi * pi / 4.0, -2.0 * pi * 3.0}};
  CHECK(predict_limit(scaled).coefficient ==
        Catch::Approx(9.0 * lp.coefficient).epsilon(1e-12));

  // V >= 0 on the zero set: Theorem 1.3 regime marker
  std::vector<ZeroSetSample> flat = {{Vec3::Zero(), -pi * pi / 4.0, 2.0 * pi}};
  CHECK(predict_limit(flat).verdict == LimitPrediction::Verdict::FlatRegime);

  CHECK_THROWS_AS(predict_limit({}), EmptyZeroSet);
  std::vector<ZeroSetSample> degenerate = {{Vec3::Zero(), 0.0, -1.0}};
  CHECK_THROWS_AS(predict_limit(degenerate), DivisionUnstable);
}

TEST_CASE("predict_scale: ball value pi^3/2") {
  double scale = predict_scale(-pi * pi / 4.0, -2.0 * pi);
  CHECK(scale == Catch::Approx(pi * pi * pi / 2.0).epsilon(1e-12));
  CHECK_THROWS_AS(predict_scale(-1.0, 0.0), EmptyZeroSet);
}

TEST_CASE("fit_coefficients: oracles and failure modes") {
  std::vector<double> xs = {25, 50, 100, 200};
  std::vector<double> ys;
  for (double x : xs) ys.push_back(3.0 + 5.0 / x);
  FitResult f = fit_coefficients(xs, ys, {0.0, -1.0});
  CHECK(f.coefficients[0] == Catch::Approx(3.0).margin(1e-10));
  CHECK(f.coefficients[1] == Catch::Approx(5.0).margin(1e-9));

  // noisy regression stays within 1e-6
  std::vector<double> noisy;
  int k = 0;
  for (double x : xs)
    noisy.push_back(pi * pi / 4.0 - 8.0 * pi / x +
                    ((k++ % 2) ? 1e-8 : -1e-8));
  FitResult g = fit_coefficients(xs, noisy, {0.0, -1.0});
  CHECK(g.coefficients[0] == Catch::Approx(pi * pi / 4.0).margin(1e-6));
  CHECK(g.coefficients[1] == Catch::Approx(-8.0 * pi).margin(1e-5));

  CHECK_THROWS_AS(fit_coefficients({50, 50, 100}, {1, 1, 2}, {0.0, -1.0}),
                  SingularDesign);
  CHECK_THROWS_AS(fit_coefficients({50.0}, {1.0}, {0.0, -1.0}),
                  InsufficientSweep);
  CHECK_THROWS_AS(fit_coefficients({-1, 2, 3}, {1, 1, 2}, {0.0, -1.0}),
                  SingularDesign);
}

TEST_CASE("validate_lemma: lem-uh with b = 0 recovers 4 pi / 3") {
  LemmaConfig cfg;  // b = 0, phi_0(0) = 1
  ExpansionReport rep = validate_lemma("lem-uh", cfg);
  CHECK(rep.pass);
  CHECK(rep.fitted_coefficient ==
        Catch::Approx(4.0 * pi / 3.0).epsilon(0.05));
}

TEST_CASE("validate_lemma: lem-int-a on the critical ball") {
  LemmaConfig cfg;
  cfg.b = [](double) { return -pi * pi / 4.0; };
  cfg.b_at_x = -pi * pi / 4.0;
  ExpansionReport rep = validate_lemma("lem-int-a", cfg);
  CHECK(rep.pass);
  double target = 2.0 * pi * (pi - 2.0) * (-pi * pi / 4.0);
  CHECK(rep.fitted_coefficient == Catch::Approx(target).epsilon(0.10));
}

TEST_CASE("validate_lemma: lem-uh2 critical leading term vanishes") {
  LemmaConfig cfg;
  cfg.b = [](double) { return -pi * pi / 4.0; };
  cfg.b_at_x = -pi * pi / 4.0;
  cfg.sweep = {100, 200, 400, 800};
  ExpansionReport rep = validate_lemma("lem-uh2", cfg);
  CHECK(rep.pass);
  CHECK(std::abs(rep.fitted_coefficient) <= 1e-2);
}

TEST_CASE("validate_lemma: lem-V envelope and num1 constant") {
  LemmaConfig cfg;
  cfg.b = [](double) { return -pi * pi / 4.0; };
  cfg.b_at_x = -pi * pi / 4.0;
  CHECK(validate_lemma("lem-V", cfg).pass);

  LemmaConfig flat;  // b = 0
  ExpansionReport n1 = validate_lemma("num1", flat);
  CHECK(n1.pass);
  CHECK(n1.fitted_coefficient ==
        Catch::Approx(3.0 * pi * pi / 4.0).epsilon(0.05));
}

TEST_CASE("validate_lemma: short sweeps are rejected") {
  LemmaConfig cfg;
  cfg.sweep = {50, 100};
  CHECK_THROWS_AS(validate_lemma("lem-uh", cfg), InsufficientSweep);
}
