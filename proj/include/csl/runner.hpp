#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "csl/acceptance.hpp"
#include "csl/asymptotics.hpp"
#include "csl/bubbles.hpp"
#include "csl/config.hpp"
#include "csl/csv.hpp"
#include "csl/greens.hpp"
#include "csl/minimize.hpp"

namespace csl {

namespace detail {

/// Potential specification: "const:<v>" or "radial-table:<path>" (two
/// whitespace-separated columns r value, linearly interpolated).
inline std::function<double(double)> parse_radial_spec(const std::string& spec,
                                                       const std::string& key) {
  if (spec.rfind("const:", 0) == 0) {
    double v;
    try {
      v = std::stod(spec.substr(6));
    } catch (const std::exception&) {
      throw ConfigError("config key '" + key + "': invalid constant in '" +
                        spec + "'");
    }
    return [v](double) { return v; };
  }
  if (spec.rfind("radial-table:", 0) == 0) {
    std::string path = spec.substr(13);
    std::ifstream in(path);
    if (!in) throw ConfigError("config key '" + key + "': file not found: " + path);
    std::vector<double> rs, vs;
    double r, v;
    while (in >> r >> v) {
      rs.push_back(r);
      vs.push_back(v);
    }
    if (rs.size() < 2)
      throw ConfigError("config key '" + key + "': table needs >= 2 rows");
    for (size_t i = 1; i < rs.size(); ++i)
      if (rs[i] <= rs[i - 1])
        throw ConfigError("config key '" + key + "': radii must increase");
    return [rs, vs](double x) {
      if (x <= rs.front()) return vs.front();
      if (x >= rs.back()) return vs.back();
      auto it = std::upper_bound(rs.begin(), rs.end(), x);
      size_t j = it - rs.begin();
      double t = (x - rs[j - 1]) / (rs[j] - rs[j - 1]);
      return (1.0 - t) * vs[j - 1] + t * vs[j];
    };
  }
  throw ConfigError("config key '" + key + "': expected const:<v> or radial-table:<path>");
}

/// Grid file: first line `nx ny nz`, then z-major node values (x fastest).
inline Eigen::VectorXd read_grid_file(const std::string& path, int nx, int ny,
                                      int nz) {
  std::ifstream in(path);
  if (!in) throw ConfigError("grid file not found: " + path);
  int fx, fy, fz;
  if (!(in >> fx >> fy >> fz))
    throw ConfigError("grid file " + path + ": missing dimension header");
  if (fx != nx || fy != ny || fz != nz)
    throw ConfigError("grid file " + path + ": dimensions disagree with config");
  Eigen::VectorXd v(static_cast<long>(nx) * ny * nz);
  for (long i = 0; i < v.size(); ++i)
    if (!(in >> v[i]))
      throw ConfigError("grid file " + path + ": too few values");
  return v;
}

struct CommonSetup {
  std::shared_ptr<const RadialGrid> grid;
  double radius = 1.0;
  std::function<double(double)> a_fn;
  std::function<double(double)> v_fn;
};

inline CommonSetup radial_setup(const Config& cfg, int default_order) {
  CommonSetup s;
  std::string kind = cfg.get_string("domain.kind", "ball");
  if (kind != "ball")
    throw ConfigError("this command requires domain.kind = ball");
  s.radius = cfg.get_double("domain.radius", 1.0);
  if (!(s.radius > 0.0)) throw ConfigError("domain.radius must be positive");
  int order = cfg.get_int("greens.order", default_order);
  if (order < 16) throw ConfigError("greens.order must be >= 16");
  s.grid = std::make_shared<RadialGrid>(order, s.radius);
  s.a_fn = parse_radial_spec(cfg.get_string("fields.a", "const:0"), "fields.a");
  s.v_fn = parse_radial_spec(cfg.get_string("fields.v", "const:0"), "fields.v");
  return s;
}

inline const char* verdict_name(CriticalityReport::Verdict v) {
  switch (v) {
    case CriticalityReport::Verdict::ConsistentCritical:
      return "consistent-critical";
    case CriticalityReport::Verdict::Subcritical: return "subcritical";
    default: return "supercritical-like";
  }
}

inline void write_criticality_csv(const CriticalityReport& rep,
                                  const RobinMap& map,
                                  const std::filesystem::path& out_dir,
                                  std::uint64_t h) {
  CsvWriter w({"verdict", "min_phi", "zero_tol", "n_samples", "n_zero_set",
               "max_a_on_zero_set", "assumption_flag"},
              h);
  w.add_row({verdict_name(rep.verdict), CsvWriter::num(rep.min_phi),
             CsvWriter::num(map.zero_tol_abs),
             CsvWriter::num(static_cast<int>(map.samples.size())),
             CsvWriter::num(static_cast<int>(map.zero_set.size())),
             CsvWriter::num(rep.max_a_on_zero_set),
             rep.assumption_flag ? "1" : "0"});
  w.write(out_dir / "criticality.csv");
}

inline const char* exit_name(MinimizeResult::Exit e) {
  switch (e) {
    case MinimizeResult::Exit::Converged: return "converged";
    case MinimizeResult::Exit::MaxIterations: return "max-iterations";
    default: return "stagnation";
  }
}

}  // namespace detail

/// Execute one CLI command. Returns the process exit code: 0 pass,
/// 2 validation failure. Throws ConfigError / solver errors for 64 / 1.
inline int run_command(const std::string& command, const Config& cfg,
                       const std::filesystem::path& out_dir, int threads,
                       std::uint64_t /*seed*/) {
  namespace fs = std::filesystem;
  const double pi = std::numbers::pi;
  fs::create_directories(out_dir);
  const std::uint64_t h = cfg.hash();

  if (command == "greens") {
    auto s = detail::radial_setup(cfg, 256);
    cfg.reject_unknown();
    GreensData gd = solve_greens_radial(s.grid, s.a_fn);
    Eigen::VectorXd g_prof = radial_g_profile(gd);
    CsvWriter w({"r", "g", "regular_part", "greens_value"}, h);
    for (int i = 0; i <= s.grid->order(); ++i) {
      double r = s.grid->nodes()[i];
      double gval = (i == 0) ? 0.0 : g_prof[i] / r;  // G diverges at the pole
      w.add_row({CsvWriter::num(r), CsvWriter::num(g_prof[i]),
                 CsvWriter::num(gd.regular_part.values()[i]),
                 CsvWriter::num(gval)});
    }
    w.write(out_dir / "greens.csv");
    CsvWriter ws({"phi", "residual_norm", "solver"}, h);
    ws.add_row({CsvWriter::num(gd.robin_value),
                CsvWriter::num(gd.residual_norm), "radial"});
    ws.write(out_dir / "greens_summary.csv");
    return 0;
  }

  if (command == "robin-map" || command == "criticality") {
    std::string kind = cfg.get_string("domain.kind", "ball");
    RobinMap map;
    std::function<double(double)> a_radial;
    if (kind == "ball") {
      auto s = detail::radial_setup(cfg, 256);
      a_radial = s.a_fn;
      double ztol = cfg.get_double("robin.zero_tol_rel", 1e-6);
      if (!(ztol > 0.0)) throw ConfigError("robin.zero_tol_rel must be positive");
      cfg.reject_unknown();
      map = robin_map_radial(s.a_fn, s.radius, s.grid->order(), ztol);
    } else if (kind == "masked-ball" || kind == "box") {
      int n = cfg.get_int("domain.n", 65);
      if (n < 9) throw ConfigError("domain.n must be >= 9");
      double radius = cfg.get_double("domain.radius", 1.0);
      Domain dom = (kind == "masked-ball")
                       ? Domain::masked_ball(radius)
                       : Domain::box(Vec3(-radius, -radius, -radius),
                                     Vec3(radius, radius, radius));
      auto grid = std::make_shared<Grid3D>(dom, n, n, n);
      std::string aspec = cfg.get_string("fields.a", "const:0");
      ScalarField a_field;
      if (aspec.rfind("grid:", 0) == 0) {
        a_field = ScalarField::volumetric(
            grid, detail::read_grid_file(aspec.substr(5), n, n, n), "a");
      } else {
        auto a_fn = detail::parse_radial_spec(aspec, "fields.a");
        a_field = volumetric_field(
            grid, [&a_fn](const Vec3& y) { return a_fn(y.norm()); }, "a");
      }
      RobinMapOptions opts;
      opts.stride = cfg.get_int("robin.stride", 4);
      opts.min_boundary_distance = cfg.get_double("robin.min_boundary_distance", 0.15);
      opts.zero_tol_rel = cfg.get_double("robin.zero_tol_rel", 1e-6);
      if (!(opts.zero_tol_rel > 0.0))
        throw ConfigError("robin.zero_tol_rel must be positive");
      opts.threads = threads;
      cfg.reject_unknown();
      map = robin_map(a_field, opts);
      a_radial = [a_field](double) { return 0.0; };
      if (command == "criticality") {
        auto a_copy = a_field;
        CriticalityReport rep = criticality_check(
            map, [a_copy](const Vec3& y) {
              return a_copy.values()[a_copy.grid3d().nearest_node(y)];
            });
        detail::write_criticality_csv(rep, map, out_dir, h);
        return 0;
      }
    } else {
      throw ConfigError("domain.kind must be ball, box or masked-ball");
    }
    if (command == "criticality") {
      CriticalityReport rep = criticality_check(
          map, [a_radial](const Vec3& y) { return a_radial(y.norm()); });
      detail::write_criticality_csv(rep, map, out_dir, h);
      return 0;
    }
    CsvWriter w({"x", "y", "z", "phi", "ok", "error"}, h);
    for (const auto& smp : map.samples)
      w.add_row({CsvWriter::num(smp.point[0]), CsvWriter::num(smp.point[1]),
                 CsvWriter::num(smp.point[2]), CsvWriter::num(smp.phi),
                 smp.ok ? "1" : "0", smp.error});
    w.write(out_dir / "robin_map.csv");
    return 0;
  }

  if (command == "qv") {
    auto s = detail::radial_setup(cfg, 256);
    cfg.reject_unknown();
    GreensData gd = solve_greens_radial(s.grid, s.a_fn);
    double qv = q_v(gd, radial_field(s.grid, s.v_fn, "V"));
    CsvWriter w({"x", "y", "z", "q_v"}, h);
    w.add_row({"0", "0", "0", CsvWriter::num(qv)});
    w.write(out_dir / "qv.csv");
    return 0;
  }

  if (command == "trial-sweep") {
    auto s = detail::radial_setup(cfg, 256);
    std::vector<double> lams =
        cfg.get_doubles("sweep.lambda", {50.0, 100.0, 200.0});
    double tol = cfg.get_double("sweep.tolerance", 0.10);
    if (!(tol > 0.0)) throw ConfigError("sweep.tolerance must be positive");
    cfg.reject_unknown();
    for (double lam : lams)
      if (!(lam > 0.0)) throw ConfigError("sweep.lambda values must be positive");
    if (lams.size() < 3)
      throw ConfigError("sweep.lambda needs >= 3 values");
    GreensData ga = solve_greens_radial(s.grid, s.a_fn);
    GreensData g0 = solve_greens_radial(s.grid, 0.0);
    ScalarField af = radial_field(s.grid, s.a_fn, "a");
    ScalarField zf = radial_field(s.grid, [](double) { return 0.0; }, "0");
    Domain ball = Domain::ball(s.radius);
    const double sconst = sobolev_constant();
    std::vector<double> ys;
    ExpansionInputs in{ga.robin_value, s.a_fn(0.0), 0.0};
    CsvWriter w({"lambda", "rayleigh", "predicted"}, h);
    for (double lam : lams) {
      BubbleParams p = BubbleParams::make(ball, Vec3::Zero(), lam);
      ScalarField psi = psi_trial(pu_bubble(s.grid, p), p, ga, g0);
      double rq = rayleigh(psi, af, zf, 0.0);
      ys.push_back(rq - sconst);
      w.add_row({CsvWriter::num(lam), CsvWriter::num(rq),
                 CsvWriter::num(predict_quotient(lam, 0.0, in))});
    }
    std::vector<double> powers = {-1.0, -2.0};
    if (lams.size() >= 3) powers.push_back(-3.0);
    FitResult fit = fit_coefficients(lams, ys, powers);
    SobolevTable t = sobolev_table();
    double c1_target = t.inv_sqrt * 4.0 * pi * ga.robin_value;
    double c2_target =
        t.inv_sqrt * (-2.0 * pi * pi * s.a_fn(0.0) -
                      (15.0 * pi * pi - 128.0) * ga.robin_value * ga.robin_value);
    bool c2_ok = std::abs(c2_target) > 1e-10
                     ? std::abs(fit.coefficients[1] / c2_target - 1.0) <= tol
                     : std::abs(fit.coefficients[1]) <= 1e-2;
    bool c1_ok = std::abs(c1_target) > 1e-10
                     ? std::abs(fit.coefficients[0] / c1_target - 1.0) <= tol
                     : std::abs(fit.coefficients[0]) <= 0.05;
    w.write(out_dir / "trial_sweep.csv");
    CsvWriter ws({"c1_fitted", "c1_target", "c2_fitted", "c2_target", "pass"}, h);
    ws.add_row({CsvWriter::num(fit.coefficients[0]), CsvWriter::num(c1_target),
                CsvWriter::num(fit.coefficients[1]), CsvWriter::num(c2_target),
                (c1_ok && c2_ok) ? "1" : "0"});
    ws.write(out_dir / "trial_sweep_summary.csv");
    return (c1_ok && c2_ok) ? 0 : 2;
  }

  if (command == "lemma-validate") {
    std::string name = cfg.get_string("lemma.name");
    if (name.empty()) throw ConfigError("lemma.name is required");
    LemmaConfig lc;
    lc.b = detail::parse_radial_spec(cfg.get_string("lemma.b", "const:0"),
                                     "lemma.b");
    lc.b_at_x = lc.b(0.0);
    lc.sweep = cfg.get_doubles("lemma.sweep", lc.sweep);
    lc.order = cfg.get_int("lemma.order", lc.order);
    lc.tolerance = cfg.get_double("lemma.tolerance", -1.0);
    cfg.reject_unknown();
    for (double lam : lc.sweep)
      if (!(lam > 0.0)) throw ConfigError("lemma.sweep values must be positive");
    ExpansionReport rep = validate_lemma(name, lc);
    CsvWriter w({"lambda", "numeric", "predicted"}, h);
    for (size_t i = 0; i < rep.sweep.size(); ++i)
      w.add_row({CsvWriter::num(rep.sweep[i]), CsvWriter::num(rep.numeric[i]),
                 CsvWriter::num(rep.predicted[i])});
    w.write(out_dir / ("lemma_" + name + ".csv"));
    CsvWriter ws({"quantity", "fitted", "target", "tolerance", "pass"}, h);
    ws.add_row({rep.quantity, CsvWriter::num(rep.fitted_coefficient),
                CsvWriter::num(rep.target_coefficient),
                CsvWriter::num(rep.tolerance), rep.pass ? "1" : "0"});
    ws.write(out_dir / ("lemma_" + name + "_summary.csv"));
    return rep.pass ? 0 : 2;
  }

  if (command == "coercivity") {
    auto s = detail::radial_setup(cfg, 256);
    double lambda = cfg.get_double("coercivity.lambda", 50.0);
    bool deflate = cfg.get_int("coercivity.deflate", 1) != 0;
    cfg.reject_unknown();
    if (!(lambda > 0.0)) throw ConfigError("coercivity.lambda must be positive");
    Eigen::VectorXd a_prof(s.grid->order() + 1);
    for (int i = 0; i <= s.grid->order(); ++i)
      a_prof[i] = s.a_fn(s.grid->nodes()[i]);
    Domain ball = Domain::ball(s.radius);
    BubbleParams p = BubbleParams::make(ball, Vec3::Zero(), lambda);
    CoercivityReport rep = coercivity_min_eig(s.grid, p, a_prof, deflate);
    CsvWriter w({"lambda", "rho_min", "sector", "deflated", "witness_quotient"},
                h);
    w.add_row({CsvWriter::num(lambda), CsvWriter::num(rep.rho_min),
               CsvWriter::num(rep.sector), deflate ? "1" : "0",
               CsvWriter::num(rep.witness_quotient)});
    w.write(out_dir / "coercivity.csv");
    return 0;
  }

  if (command == "minimize" || command == "epsilon-sweep") {
    auto s = detail::radial_setup(cfg, 512);
    MinimizeOptions opts;
    opts.max_iterations = cfg.get_int("minimize.max_iterations", opts.max_iterations);
    opts.gtol = cfg.get_double("minimize.gtol", opts.gtol);
    if (!(opts.gtol > 0.0)) throw ConfigError("minimize.gtol must be positive");
    if (opts.max_iterations < 1)
      throw ConfigError("minimize.max_iterations must be >= 1");

    if (command == "epsilon-sweep") {
      std::vector<double> eps = cfg.get_doubles("sweep.eps", {0.08, 0.04, 0.02});
      cfg.reject_unknown();
      for (double e : eps)
        if (!(e > 0.0)) throw ConfigError("sweep.eps values must be positive");
      EpsilonSweepResult res =
          epsilon_sweep(s.grid, s.a_fn, s.v_fn, eps, opts, threads);
      CsvWriter w({"eps", "lambda_init", "s_est", "ratio", "exit"}, h);
      for (const auto& e : res.entries)
        w.add_row({CsvWriter::num(e.eps), CsvWriter::num(e.lambda_init),
                   CsvWriter::num(e.s_est), CsvWriter::num(e.ratio),
                   detail::exit_name(e.exit_reason)});
      w.write(out_dir / "epsilon_sweep.csv");
      CsvWriter ws({"extrapolated_ratio", "uncertainty"}, h);
      ws.add_row({CsvWriter::num(res.extrapolated_ratio),
                  CsvWriter::num(res.uncertainty)});
      ws.write(out_dir / "epsilon_sweep_summary.csv");
      return 0;
    }

    double eps = cfg.get_double("minimize.eps", 0.02);
    double lambda_init = cfg.get_double("minimize.lambda_init", 0.0);
    cfg.reject_unknown();
    if (!(eps >= 0.0)) throw ConfigError("minimize.eps must be >= 0");
    GreensData ga = solve_greens_radial(s.grid, s.a_fn);
    GreensData g0 = solve_greens_radial(s.grid, 0.0);
    if (lambda_init <= 0.0) {
      double qv = q_v(ga, radial_field(s.grid, s.v_fn, "V"));
      double a0 = s.a_fn(0.0);
      lambda_init = (eps > 0.0 && qv < -1e-12 && std::abs(a0) > 1e-14)
                        ? predict_scale(a0, qv) / eps
                        : 100.0;
    }
    Domain ball = Domain::ball(s.radius);
    BubbleParams p = BubbleParams::make(ball, Vec3::Zero(), lambda_init);
    ScalarField psi = psi_trial(pu_bubble(s.grid, p), p, ga, g0);
    psi.set_name("psi");
    Eigen::VectorXd a_prof(s.grid->order() + 1), v_prof(s.grid->order() + 1);
    for (int i = 0; i <= s.grid->order(); ++i) {
      a_prof[i] = s.a_fn(s.grid->nodes()[i]);
      v_prof[i] = s.v_fn(s.grid->nodes()[i]);
    }
    MinimizeResult res = minimize_rayleigh(s.grid, a_prof, v_prof, eps, psi, opts);
    CsvWriter w({"eps", "s_est", "iterations", "gradient_norm", "exit",
                 "initializer", "lambda_init"},
                h);
    w.add_row({CsvWriter::num(eps), CsvWriter::num(res.s_est),
               CsvWriter::num(res.iterations), CsvWriter::num(res.gradient_norm),
               detail::exit_name(res.exit_reason), res.initializer,
               CsvWriter::num(lambda_init)});
    w.write(out_dir / "minimize.csv");
    CsvWriter wu({"r", "u"}, h);
    for (int i = 0; i <= s.grid->order(); ++i)
      wu.add_row({CsvWriter::num(s.grid->nodes()[i]),
                  CsvWriter::num(res.minimizer.values()[i])});
    wu.write(out_dir / "minimizer.csv");
    return 0;
  }

  if (command == "blowup") {
    auto s = detail::radial_setup(cfg, 512);
    std::string path = cfg.get_string("blowup.minimizer");
    double eps = cfg.get_double("blowup.eps", 0.0);
    cfg.reject_unknown();
    if (path.empty()) throw ConfigError("blowup.minimizer is required");
    std::ifstream in(path);
    if (!in) throw ConfigError("blowup.minimizer: file not found: " + path);
    std::string line;
    Eigen::VectorXd u(s.grid->order() + 1);
    int row = 0;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#' || line.rfind("r,", 0) == 0) continue;
      auto comma = line.find(',');
      if (comma == std::string::npos)
        throw ConfigError("blowup.minimizer: malformed row '" + line + "'");
      if (row > s.grid->order())
        throw ConfigError("blowup.minimizer: more rows than grid nodes");
      double r = std::stod(line.substr(0, comma));
      if (std::abs(r - s.grid->nodes()[row]) > 1e-9 * s.radius)
        throw ConfigError("blowup.minimizer: node mismatch with greens.order");
      u[row++] = std::stod(line.substr(comma + 1));
    }
    if (row != s.grid->order() + 1)
      throw ConfigError("blowup.minimizer: too few rows for greens.order");
    GreensData ga = solve_greens_radial(s.grid, s.a_fn);
    GreensData g0 = solve_greens_radial(s.grid, 0.0);
    BlowupReport rep = fit_decomposition(
        ScalarField::radial(s.grid, std::move(u), "u"), ga, g0, eps);
    CsvWriter w({"alpha", "lambda", "correlation", "w_norm", "r_norm", "beta",
                 "gamma", "delta_1", "delta_2", "delta_3", "eps",
                 "phi_a_over_eps", "eps_lambda", "r_norm_over_eps"},
                h);
    w.add_row({CsvWriter::num(rep.alpha), CsvWriter::num(rep.lambda),
               CsvWriter::num(rep.correlation), CsvWriter::num(rep.w_norm),
               CsvWriter::num(rep.r_norm), CsvWriter::num(rep.beta),
               CsvWriter::num(rep.gamma), CsvWriter::num(rep.delta[0]),
               CsvWriter::num(rep.delta[1]), CsvWriter::num(rep.delta[2]),
               CsvWriter::num(rep.eps), CsvWriter::num(rep.phi_a_over_eps),
               CsvWriter::num(rep.eps_lambda),
               CsvWriter::num(rep.r_norm_over_eps)});
    w.write(out_dir / "blowup.csv");
    return 0;
  }

  if (command == "oracle-ball") {
    cfg.reject_unknown();
    std::vector<AcceptanceRow> rows = run_ball_acceptance(threads);
    // headline prediction row for the summary
    LimitPrediction lp = predict_limit(
        {{Vec3::Zero(), -pi * pi / 4.0, -2.0 * pi}});
    CsvWriter w({"criterion", "name", "value", "expected", "pass"}, h);
    w.add_row({"6", "limit_coefficient_predicted",
               CsvWriter::num(lp.coefficient), CsvWriter::num(-0.14996), "1"});
    bool all = true;
    for (const auto& r : rows) {
      all = all && r.pass;
      w.add_row({CsvWriter::num(r.criterion), r.name, CsvWriter::num(r.value),
                 CsvWriter::num(r.expected), r.pass ? "1" : "0"});
    }
    w.write(out_dir / "oracle_ball.csv");
    return all ? 0 : 2;
  }

  throw ConfigError("unknown command: " + command);
}

}  // namespace csl
