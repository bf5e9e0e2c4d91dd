#pragma once

#include <Eigen/Dense>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <vector>

#include "csl/errors.hpp"
#include "csl/field.hpp"

namespace csl {

struct GridSolveOptions {
  int max_iterations = 20000;
  double tolerance = 1e-10;
};

struct GridSolveResult {
  Eigen::VectorXd values;  // all lattice nodes, Dirichlet data filled in
  double residual = 0.0;
  int iterations = 0;
};

namespace detail {

/// Fraction theta in (0,1] of the lattice edge from an interior node to the
/// domain boundary, found by bisection of the boundary distance.
inline double boundary_cut(const Domain& dom, const Vec3& from, const Vec3& to) {
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 60; ++it) {
    double mid = 0.5 * (lo + hi);
    if (dom.boundary_distance(from + mid * (to - from)) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  // Clamp below: a node almost on the boundary would otherwise produce huge
  // stencil coefficients that destroy the conditioning of the system. The
  // clamp perturbs the boundary location by at most theta_min * h.
  return std::max(0.5 * (lo + hi), 0.05);
}

/// Smallest eigenvalue of the 7-point Dirichlet Laplacian on the bounding
/// box lattice (a lower bound for masked subdomains by interlacing).
inline double fd_laplacian_min_eig(const Grid3D& g) {
  double s = 0.0;
  const int n[3] = {g.nx(), g.ny(), g.nz()};
  for (int a = 0; a < 3; ++a) {
    double h = g.spacing()[a];
    s += 4.0 / (h * h) *
         std::pow(std::sin(std::numbers::pi / (2.0 * (n[a] - 1))), 2);
  }
  return s;
}

}  // namespace detail

/// Solve -Delta u + a u = f in the interior with u = d on non-interior
/// nodes. Boxes use the symmetric 7-point stencil (CG); masked domains use
/// Shortley-Weller cut-cell corrections at the curved boundary (BiCGSTAB).
inline GridSolveResult solve_grid_dirichlet(
    const Grid3D& grid, const Eigen::VectorXd& a_nodal,
    const std::function<double(const Vec3&)>& f,
    const std::function<double(const Vec3&)>& d,
    const GridSolveOptions& opts = {}) {
  const int m = grid.num_interior();
  const bool masked = grid.domain().kind() == Domain::Kind::MaskedGrid;
  const int strides[3] = {1, grid.nx(), grid.nx() * grid.ny()};

  double a_min = std::numeric_limits<double>::infinity();
  for (int id : grid.interior_nodes()) a_min = std::min(a_min, a_nodal[id]);
  if (detail::fd_laplacian_min_eig(grid) + a_min <= 0.0)
    throw NonCoercive("solve_grid_dirichlet: -Delta + a not coercive on grid");

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<size_t>(7) * m);
  Eigen::VectorXd rhs(m);
  for (int row = 0; row < m; ++row) {
    int id = grid.interior_nodes()[row];
    Vec3 y = grid.point(id);
    double diag = a_nodal[id];
    double b = f(y);
    for (int axis = 0; axis < 3; ++axis) {
      double h = grid.spacing()[axis];
      double h_side[2];
      int nb[2] = {id - strides[axis], id + strides[axis]};
      double bval[2] = {0.0, 0.0};
      bool cut[2] = {false, false};
      for (int s = 0; s < 2; ++s) {
        if (grid.is_interior(nb[s])) {
          h_side[s] = h;
        } else if (masked) {
          double theta = detail::boundary_cut(grid.domain(), y, grid.point(nb[s]));
          h_side[s] = theta * h;
          bval[s] = d(y + theta * (grid.point(nb[s]) - y));
          cut[s] = true;
        } else {
          h_side[s] = h;
          bval[s] = d(grid.point(nb[s]));
          cut[s] = true;
        }
      }
      diag += 2.0 / (h_side[0] * h_side[1]);
      for (int s = 0; s < 2; ++s) {
        double c = 2.0 / (h_side[s] * (h_side[0] + h_side[1]));
        if (cut[s])
          b += c * bval[s];
        else
          trip.emplace_back(row, grid.interior_index(nb[s]), -c);
      }
    }
    trip.emplace_back(row, row, diag);
    rhs[row] = b;
  }

  Eigen::SparseMatrix<double> mat(m, m);
  mat.setFromTriplets(trip.begin(), trip.end());

  Eigen::VectorXd u_int;
  GridSolveResult out;
  if (masked) {
    Eigen::BiCGSTAB<Eigen::SparseMatrix<double>> solver;
    solver.setMaxIterations(opts.max_iterations);
    solver.setTolerance(opts.tolerance);
    solver.compute(mat);
    u_int = solver.solve(rhs);
    if (solver.info() != Eigen::Success)
      throw LinearSolveFailure("solve_grid_dirichlet: BiCGSTAB did not converge");
    out.residual = solver.error();
    out.iterations = static_cast<int>(solver.iterations());
  } else {
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>,
                             Eigen::Lower | Eigen::Upper>
        solver;
    solver.setMaxIterations(opts.max_iterations);
    solver.setTolerance(opts.tolerance);
    solver.compute(mat);
    u_int = solver.solve(rhs);
    if (solver.info() != Eigen::Success)
      throw LinearSolveFailure("solve_grid_dirichlet: CG did not converge");
    out.residual = solver.error();
    out.iterations = static_cast<int>(solver.iterations());
  }

  out.values.resize(grid.num_nodes());
  for (int id = 0; id < grid.num_nodes(); ++id)
    out.values[id] = grid.is_interior(id) ? u_int[grid.interior_index(id)]
                                          : d(grid.point(id));
  return out;
}

/// Same solve with homogeneous Dirichlet data and a nodal right-hand side.
inline GridSolveResult solve_grid_poisson(const Grid3D& grid,
                                          const Eigen::VectorXd& a_nodal,
                                          const Eigen::VectorXd& f_nodal,
                                          const GridSolveOptions& opts = {}) {
  return solve_grid_dirichlet(
      grid, a_nodal,
      [&](const Vec3& y) { return f_nodal[grid.nearest_node(y)]; },
      [](const Vec3&) { return 0.0; }, opts);
}

}  // namespace csl
