#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <future>
#include <memory>
#include <numbers>
#include <optional>
#include <thread>
#include <vector>

#include "csl/errors.hpp"
#include "csl/field.hpp"
#include "csl/grid_operator.hpp"
#include "csl/radial_operator.hpp"

namespace csl {

/// Green's function data for one pole: the regular part H_b(x,.), the Robin
/// value phi_b(x) = H_b(x,x), and solver diagnostics. The Green's function
/// itself is G(y) = 1/|x-y| - H(y).
struct GreensData {
  enum class Solver { Radial, GridFD };
  Vec3 pole = Vec3::Zero();
  ScalarField regular_part;
  double robin_value = 0.0;
  Solver solver = Solver::Radial;
  double residual_norm = 0.0;
};

struct RobinSample {
  Vec3 point;
  double phi = 0.0;
  bool ok = false;
  std::string error;
};

/// Robin function phi_b sampled over a lattice, with its minimum and the
/// zero-set candidates N_b = {phi <= zero_tol}.
struct RobinMap {
  std::vector<RobinSample> samples;
  Vec3 min_point = Vec3::Zero();
  double min_phi = 0.0;
  double zero_tol_abs = 0.0;
  std::vector<Vec3> zero_set;
  int failed = 0;
};

struct CriticalityReport {
  enum class Verdict { ConsistentCritical, Subcritical, SupercriticalLike };
  double min_phi = 0.0;
  double max_a_on_zero_set = 0.0;
  Verdict verdict = Verdict::ConsistentCritical;
  bool assumption_flag = false;  // a < 0 on all of N_a
  bool empty_zero_set = false;
};

namespace detail {

/// Angular integrals over the unit cube centered at the origin:
///   cube_c1 = \int_cube |z|^{-1} dz,  cube_c2 = \int_cube |z|^{-2} dz.
/// Both reduce to integrals of R(w)^{3-q} over directions, with R the cube
/// boundary distance.
inline std::pair<double, double> cube_singular_constants() {
  static std::pair<double, double> cached = [] {
    const int n_mu = 512, n_phi = 1024;
    double c1 = 0.0, c2 = 0.0;
    for (int i = 0; i < n_mu; ++i) {
      double mu = -1.0 + (i + 0.5) * (2.0 / n_mu);
      double sq = std::sqrt(1.0 - mu * mu);
      for (int j = 0; j < n_phi; ++j) {
        double ph = (j + 0.5) * (2.0 * std::numbers::pi / n_phi);
        double wx = sq * std::cos(ph), wy = sq * std::sin(ph), wz = mu;
        double m = std::max({std::abs(wx), std::abs(wy), std::abs(wz)});
        double r = 0.5 / m;
        double dw = (2.0 / n_mu) * (2.0 * std::numbers::pi / n_phi);
        c1 += 0.5 * r * r * dw;
        c2 += r * dw;
      }
    }
    return std::make_pair(c1, c2);
  }();
  return cached;
}

}  // namespace detail

/// Solve the radial Green's problem on a ball of radius R centered at the
/// origin via the ansatz G_b(0,y) = g(|y|)/|y| with
///   -g'' + b g = 0,  g(0) = 1,  g(R) = 0,
/// discretized by Chebyshev collocation. Then H_b(0,y) = (1 - g(r))/r and
/// phi_b(0) = -g'(0).
inline GreensData solve_greens_radial(std::shared_ptr<const RadialGrid> grid,
                                      const std::function<double(double)>& b) {
  const int order = grid->order();
  Eigen::VectorXd b_prof(order + 1);
  for (int i = 0; i <= order; ++i) b_prof[i] = b(grid->nodes()[i]);

  if (lowest_radial_eigenvalue(*grid, b_prof) <= 0.0)
    throw NonCoercive("solve_greens_radial: -Delta + b not coercive");

  const int n = order;
  const Eigen::MatrixXd d2 = grid->diff() * grid->diff();
  Eigen::MatrixXd a(n - 1, n - 1);
  Eigen::VectorXd rhs(n - 1);
  for (int i = 1; i < n; ++i) {
    for (int j = 1; j < n; ++j)
      a(i - 1, j - 1) = -d2(i, j) + (i == j ? b_prof[i] : 0.0);
    rhs[i - 1] = d2(i, 0);  // g(0) = 1 moved to the right side
  }
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
  Eigen::VectorXd g_int = lu.solve(rhs);
  if (!g_int.allFinite())
    throw ShootingFailure("solve_greens_radial: boundary value problem singular");
  Eigen::VectorXd g(n + 1);
  g[0] = 1.0;
  g.segment(1, n - 1) = g_int;
  g[n] = 0.0;

  Eigen::VectorXd gp = grid->derivative(g);
  double phi = -gp[0];

  Eigen::VectorXd h(n + 1);
  h[0] = phi;
  for (int i = 1; i <= n; ++i) h[i] = (1.0 - g[i]) / grid->nodes()[i];

  // defect of the collocation polynomial on a twice-finer grid
  RadialGrid fine(2 * order, grid->r_max());
  Eigen::VectorXd g_f = grid->interpolate(g, fine.nodes());
  Eigen::VectorXd defect = -(fine.diff() * (fine.diff() * g_f));
  for (int i = 0; i <= 2 * order; ++i) defect[i] += b(fine.nodes()[i]) * g_f[i];
  double res = 0.0;
  for (int i = 1; i < 2 * order; ++i) res = std::max(res, std::abs(defect[i]));

  GreensData out;
  out.pole = Vec3::Zero();
  out.regular_part = ScalarField::radial(grid, std::move(h), "H_b");
  out.regular_part.set_pole(Vec3::Zero());
  out.robin_value = phi;
  out.solver = GreensData::Solver::Radial;
  out.residual_norm = res;
  return out;
}

inline GreensData solve_greens_radial(const std::function<double(double)>& b,
                                      double r_max, int order = 256) {
  return solve_greens_radial(std::make_shared<RadialGrid>(order, r_max), b);
}

inline GreensData solve_greens_radial(double b_const, double r_max,
                                      int order = 256) {
  return solve_greens_radial([b_const](double) { return b_const; }, r_max, order);
}

inline GreensData solve_greens_radial(std::shared_ptr<const RadialGrid> grid,
                                      double b_const) {
  return solve_greens_radial(std::move(grid),
                             [b_const](double) { return b_const; });
}

/// g(r) = 1 - r H(r), the radial numerator of G = g/r.
inline Eigen::VectorXd radial_g_profile(const GreensData& gd) {
  const RadialGrid& g = gd.regular_part.radial_grid();
  return Eigen::VectorXd::Ones(g.order() + 1) -
         g.nodes().cwiseProduct(gd.regular_part.values());
}

struct GridGreensOptions {
  GridSolveOptions solve;
  bool richardson = true;  // refine once and extrapolate phi
};

namespace detail {

/// Robin value from one grid solve: average H over the 6 lattice neighbors
/// of the pole (the odd Taylor term cancels), plus the known -a(x)/2 * h
/// cusp correction when no extrapolation partner is available.
inline double phi_neighbor_average(const Grid3D& g, const Eigen::VectorXd& h_vals,
                                   int pole_id) {
  const int strides[3] = {1, g.nx(), g.nx() * g.ny()};
  double s = 0.0;
  for (int axis = 0; axis < 3; ++axis)
    s += h_vals[pole_id - strides[axis]] + h_vals[pole_id + strides[axis]];
  return s / 6.0;
}

}  // namespace detail

/// Grid solve of the regular part: -Delta H + a H = a(y)/|x-y| in the
/// interior, H = 1/|x-y| on the boundary. The pole is snapped to the
/// nearest interior lattice node.
inline GreensData solve_greens_grid(const ScalarField& a_field, const Vec3& x,
                                    const GridGreensOptions& opts = {}) {
  if (!a_field.is_volumetric())
    throw DomainMismatch("solve_greens_grid: volumetric potential required");
  auto grid = a_field.grid3d_ptr();
  int pole_id = grid->nearest_node(x);
  if (!grid->is_interior(pole_id))
    throw Error("solve_greens_grid: pole is not an interior node");
  Vec3 x0 = grid->point(pole_id);
  const auto [c1, c2] = detail::cube_singular_constants();

  auto solve_level = [&](const Grid3D& g, const Eigen::VectorXd& a_nodal,
                         int pid) -> GridSolveResult {
    Vec3 xp = g.point(pid);
    double h_bar = std::cbrt(g.cell_volume());
    auto rhs = [&](const Vec3& y) {
      double r = (y - xp).norm();
      if (r < 0.25 * h_bar) return a_nodal[pid] * c1 / h_bar;  // cell average
      return a_nodal[g.nearest_node(y)] / r;
    };
    auto bc = [&](const Vec3& y) { return 1.0 / (y - xp).norm(); };
    return solve_grid_dirichlet(g, a_nodal, rhs, bc, opts.solve);
  };

  GridSolveResult coarse = solve_level(*grid, a_field.values(), pole_id);
  double h_bar = std::cbrt(grid->cell_volume());
  double a_at_pole = a_field.values()[pole_id];
  double phi_c = detail::phi_neighbor_average(*grid, coarse.values, pole_id);
  double phi;
  if (opts.richardson) {
    Grid3D fine(grid->domain(), 2 * (grid->nx() - 1) + 1,
                2 * (grid->ny() - 1) + 1, 2 * (grid->nz() - 1) + 1);
    Eigen::VectorXd a_fine(fine.num_nodes());
    for (int id = 0; id < fine.num_nodes(); ++id)
      a_fine[id] = a_field.values()[grid->nearest_node(fine.point(id))];
    int pid_f = fine.nearest_node(x0);
    GridSolveResult fr = solve_level(fine, a_fine, pid_f);
    double phi_f = detail::phi_neighbor_average(fine, fr.values, pid_f);
    phi = 2.0 * phi_f - phi_c;  // removes the O(h) cusp term
  } else {
    double h_avg = (grid->spacing().x() + grid->spacing().y() +
                    grid->spacing().z()) / 3.0;
    phi = phi_c + 0.5 * a_at_pole * h_avg;
  }

  GreensData out;
  out.pole = x0;
  Eigen::VectorXd h_vals = coarse.values;
  h_vals[pole_id] = phi;
  out.regular_part = ScalarField::volumetric(grid, std::move(h_vals), "H_a");
  out.regular_part.set_pole(x0);
  out.robin_value = phi;
  out.solver = GreensData::Solver::GridFD;
  out.residual_norm = coarse.residual;
  return out;
}

struct RobinMapOptions {
  int stride = 4;
  double min_boundary_distance = 0.15;
  double zero_tol_rel = 1e-6;  // relative to the phi scale over the samples
  double zero_tol_floor = 0.0;
  int threads = 1;
  GridGreensOptions greens;
};

/// Sample phi_a over a stride sub-lattice of interior nodes. Failed solves
/// are recorded per-sample, not fatal.
inline RobinMap robin_map(const ScalarField& a_field,
                          const RobinMapOptions& opts = {}) {
  if (!a_field.is_volumetric())
    throw DomainMismatch("robin_map: volumetric potential required");
  const Grid3D& g = a_field.grid3d();
  std::vector<int> pole_ids;
  for (int iz = 1; iz < g.nz() - 1; iz += opts.stride)
    for (int iy = 1; iy < g.ny() - 1; iy += opts.stride)
      for (int ix = 1; ix < g.nx() - 1; ix += opts.stride) {
        int id = g.node_id(ix, iy, iz);
        if (g.is_interior(id) &&
            g.domain().boundary_distance(g.point(id)) >= opts.min_boundary_distance)
          pole_ids.push_back(id);
      }

  RobinMap map;
  map.samples.resize(pole_ids.size());
  auto worker = [&](size_t begin, size_t end) {
    for (size_t k = begin; k < end; ++k) {
      RobinSample& s = map.samples[k];
      s.point = g.point(pole_ids[k]);
      try {
        GreensData gd = solve_greens_grid(a_field, s.point, opts.greens);
        s.phi = gd.robin_value;
        s.ok = true;
      } catch (const Error& e) {
        s.error = e.what();
      }
    }
  };
  int nt = std::max(1, opts.threads);
  if (nt == 1 || pole_ids.size() < 2) {
    worker(0, pole_ids.size());
  } else {
    std::vector<std::thread> pool;
    size_t chunk = (pole_ids.size() + nt - 1) / nt;
    for (int t = 0; t < nt; ++t) {
      size_t b = t * chunk, e = std::min(pole_ids.size(), (t + 1) * chunk);
      if (b < e) pool.emplace_back(worker, b, e);
    }
    for (auto& th : pool) th.join();
  }

  double scale = 0.0;
  map.min_phi = std::numeric_limits<double>::infinity();
  for (const RobinSample& s : map.samples) {
    if (!s.ok) {
      ++map.failed;
      continue;
    }
    scale = std::max(scale, std::abs(s.phi));
    if (s.phi < map.min_phi) {
      map.min_phi = s.phi;
      map.min_point = s.point;
    }
  }
  map.zero_tol_abs = std::max(opts.zero_tol_rel * scale, opts.zero_tol_floor);
  for (const RobinSample& s : map.samples)
    if (s.ok && s.phi <= map.zero_tol_abs) map.zero_set.push_back(s.point);
  return map;
}

/// Radial Robin map along the ball: phi at the center from the radial
/// solver (exact limit), used by calibration and the ball oracle.
inline RobinMap robin_map_radial(const std::function<double(double)>& b,
                                 double r_max, int order = 256,
                                 double zero_tol_rel = 1e-6) {
  GreensData gd = solve_greens_radial(b, r_max, order);
  RobinMap map;
  RobinSample s;
  s.point = Vec3::Zero();
  s.phi = gd.robin_value;
  s.ok = true;
  map.samples.push_back(s);
  map.min_point = s.point;
  map.min_phi = s.phi;
  map.zero_tol_abs = zero_tol_rel * std::max(1.0, std::abs(s.phi));
  if (s.phi <= map.zero_tol_abs) map.zero_set.push_back(s.point);
  return map;
}

inline CriticalityReport criticality_check(
    const RobinMap& robin, const std::function<double(const Vec3&)>& a) {
  CriticalityReport rep;
  rep.min_phi = robin.min_phi;
  double tol = robin.zero_tol_abs;
  if (robin.min_phi < -tol)
    rep.verdict = CriticalityReport::Verdict::Subcritical;
  else if (robin.min_phi > tol)
    rep.verdict = CriticalityReport::Verdict::SupercriticalLike;
  else
    rep.verdict = CriticalityReport::Verdict::ConsistentCritical;
  rep.empty_zero_set = robin.zero_set.empty();
  if (!robin.zero_set.empty()) {
    double mx = -std::numeric_limits<double>::infinity();
    for (const Vec3& p : robin.zero_set) mx = std::max(mx, a(p));
    rep.max_a_on_zero_set = mx;
    rep.assumption_flag = mx < 0.0;
  }
  return rep;
}

/// Q_V(x) = \int_Omega V(y) G(x,y)^2 dy with the singular split
/// G^2 = r^{-2} - 2 H / r + H^2. Radial data integrate exactly in r via
/// G^2 r^2 = g^2; on grids the pole cell uses local polar integrals of the
/// r^{-2} and r^{-1} parts with V and H frozen at the pole.
inline double q_v(const GreensData& greens, const ScalarField& v_field) {
  if (greens.regular_part.is_radial()) {
    if (!v_field.is_radial() || !greens.regular_part.same_grid(v_field))
      throw DomainMismatch("q_v: potential must live on the Green's grid");
    const RadialGrid& g = greens.regular_part.radial_grid();
    Eigen::VectorXd gg = radial_g_profile(greens);
    double s = 0.0;
    for (int i = 0; i <= g.order(); ++i)
      s += g.dr_weights()[i] * v_field.values()[i] * gg[i] * gg[i];
    return 4.0 * std::numbers::pi * s;
  }
  if (!v_field.is_volumetric() || !greens.regular_part.same_grid(v_field))
    throw DomainMismatch("q_v: potential must live on the Green's grid");
  const Grid3D& g = greens.regular_part.grid3d();
  const Eigen::VectorXd& h_vals = greens.regular_part.values();
  int pole_id = g.nearest_node(greens.pole);
  const auto [c1, c2] = detail::cube_singular_constants();
  double h_bar = std::cbrt(g.cell_volume());
  double s = 0.0;
  for (int id : g.interior_nodes()) {
    if (id == pole_id) continue;
    double r = (g.point(id) - greens.pole).norm();
    double gv = 1.0 / r - h_vals[id];
    s += g.cell_volume() * v_field.values()[id] * gv * gv;
  }
  double v0 = v_field.values()[pole_id];
  double h0 = h_vals[pole_id];
  s += v0 * (c2 * h_bar - 2.0 * h0 * c1 * h_bar * h_bar +
             h0 * h0 * g.cell_volume());
  return s;
}

/// Scale c such that c * b is critical on the ball: bisection on
/// phi_{c b}(0) = 0 within zero_tol. Requires phi to change sign on the
/// bracket, with b negative near the zero set.
inline double calibrate_critical_scale(const std::function<double(double)>& b,
                                       double r_max, int order = 256,
                                       double zero_tol = 1e-6,
                                       double c_lo = 0.0, double c_hi = 2.0) {
  auto phi_of = [&](double c) {
    return solve_greens_radial([&](double r) { return c * b(r); }, r_max, order)
        .robin_value;
  };
  double f_lo = phi_of(c_lo), f_hi = phi_of(c_hi);
  if (f_lo * f_hi > 0.0)
    throw Error("calibrate_critical_scale: bracket does not straddle phi = 0");
  for (int it = 0; it < 200; ++it) {
    double c = 0.5 * (c_lo + c_hi);
    double f = phi_of(c);
    if (std::abs(f) <= zero_tol) return c;
    if ((f > 0.0) == (f_lo > 0.0)) {
      c_lo = c;
      f_lo = f;
    } else {
      c_hi = c;
    }
  }
  return 0.5 * (c_lo + c_hi);
}

}  // namespace csl
