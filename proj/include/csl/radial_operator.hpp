#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <memory>
#include <vector>

#include "csl/errors.hpp"
#include "csl/field.hpp"

namespace csl {

inline ScalarField radial_field(std::shared_ptr<const RadialGrid> grid,
                                const std::function<double(double)>& fn,
                                std::string name = {},
                                Harmonic harmonic = Harmonic::Monopole) {
  Eigen::VectorXd v(grid->order() + 1);
  for (int i = 0; i < v.size(); ++i) v[i] = fn(grid->nodes()[i]);
  return ScalarField::radial(std::move(grid), std::move(v), std::move(name),
                             harmonic);
}

inline ScalarField volumetric_field(std::shared_ptr<const Grid3D> grid,
                                    const std::function<double(const Vec3&)>& fn,
                                    std::string name = {}) {
  Eigen::VectorXd v(grid->num_nodes());
  for (int i = 0; i < v.size(); ++i) v[i] = fn(grid->point(i));
  return ScalarField::volumetric(std::move(grid), std::move(v), std::move(name));
}

/// Lowest Dirichlet eigenvalue of -Delta + b on the ball, computed in the
/// radial sector via the substitution w = r u, which turns the operator into
/// -w'' + b w on (0, R) with w(0) = w(R) = 0. The ground state is radial, so
/// this is the bottom of the full spectrum.
inline double lowest_radial_eigenvalue(const RadialGrid& grid,
                                       const Eigen::VectorXd& b_profile) {
  const int n = grid.order();
  const Eigen::MatrixXd d2 = grid.diff() * grid.diff();
  Eigen::MatrixXd a(n - 1, n - 1);
  for (int i = 1; i < n; ++i)
    for (int j = 1; j < n; ++j)
      a(i - 1, j - 1) = -d2(i, j) + (i == j ? b_profile[i] : 0.0);
  Eigen::EigenSolver<Eigen::MatrixXd> es(a, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success)
    throw EigenSolveFailure("lowest_radial_eigenvalue: eigensolver failed");
  double lo = std::numeric_limits<double>::infinity();
  for (int i = 0; i < es.eigenvalues().size(); ++i) {
    // collocation matrix is non-normal; spurious complex pairs sit far from
    // the physical (real) part of the spectrum
    if (std::abs(es.eigenvalues()[i].imag()) <
        1e-6 * (1.0 + std::abs(es.eigenvalues()[i].real())))
      lo = std::min(lo, es.eigenvalues()[i].real());
  }
  return lo;
}

/// Dirichlet solver for -Delta u + b u = f on the ball in one angular
/// sector. Sector 0 (monopole): unknowns at nodes 0..N-1, u(R) = 0.
/// Sector 1 (dipole profile): unknowns at nodes 1..N-1, u(0) = u(R) = 0.
class RadialDirichlet {
public:
  RadialDirichlet(std::shared_ptr<const RadialGrid> grid, int sector,
                  const Eigen::VectorXd& b_profile)
      : grid_(std::move(grid)), sector_(sector) {
    const int n = grid_->order();
    first_ = (sector == 0) ? 0 : 1;
    const int m = n - first_;
    Eigen::MatrixXd k = (sector == 0) ? grid_->stiffness_monopole()
                                      : grid_->stiffness_sector(1);
    const Eigen::VectorXd& mass = grid_->mass_monopole();
    Eigen::MatrixXd a = k.block(first_, first_, m, m);
    for (int i = 0; i < m; ++i)
      a(i, i) += mass[first_ + i] * b_profile[first_ + i];
    llt_.compute(a);
    if (llt_.info() != Eigen::Success)
      throw NonCoercive("RadialDirichlet: operator not positive definite");
  }

  const RadialGrid& grid() const { return *grid_; }

  /// Solve with right-hand side given by its nodal profile. Returns the full
  /// nodal solution (zeros at the constrained nodes).
  Eigen::VectorXd solve(const Eigen::VectorXd& f_profile) const {
    const int n = grid_->order();
    const int m = n - first_;
    Eigen::VectorXd rhs(m);
    for (int i = 0; i < m; ++i)
      rhs[i] = grid_->mass_monopole()[first_ + i] * f_profile[first_ + i];
    Eigen::VectorXd u_red = llt_.solve(rhs);
    Eigen::VectorXd u = Eigen::VectorXd::Zero(n + 1);
    u.segment(first_, m) = u_red;
    return u;
  }

private:
  std::shared_ptr<const RadialGrid> grid_;
  int sector_;
  int first_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
};

/// Smallest generalized eigenvalue of (A, B) restricted to the B-orthogonal
/// complement of the given deflation vectors. A symmetric, B symmetric
/// positive definite; all dense. Returns the eigenvalue and its witness in
/// the original coordinates.
inline std::pair<double, Eigen::VectorXd> deflated_min_eig(
    const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
    const std::vector<Eigen::VectorXd>& deflation) {
  const int n = static_cast<int>(a.rows());
  Eigen::LLT<Eigen::MatrixXd> llt(b);
  if (llt.info() != Eigen::Success)
    throw EigenSolveFailure("deflated_min_eig: B not positive definite");
  Eigen::MatrixXd l = llt.matrixL();
  // C = L^{-1} A L^{-T}; deflation vectors map to L^T phi.
  Eigen::MatrixXd c = l.triangularView<Eigen::Lower>().solve(a);
  c = l.triangularView<Eigen::Lower>().solve(c.transpose()).transpose();
  c = 0.5 * (c + c.transpose());

  Eigen::MatrixXd q;
  if (!deflation.empty()) {
    Eigen::MatrixXd v(n, deflation.size());
    for (size_t j = 0; j < deflation.size(); ++j)
      v.col(j) = l.transpose() * deflation[j];
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(v);
    Eigen::MatrixXd full = qr.householderQ();
    q = full.rightCols(n - static_cast<int>(deflation.size()));
  } else {
    q = Eigen::MatrixXd::Identity(n, n);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(q.transpose() * c * q);
  if (es.info() != Eigen::Success)
    throw EigenSolveFailure("deflated_min_eig: eigensolver failed");
  int idx = 0;
  es.eigenvalues().minCoeff(&idx);
  Eigen::VectorXd y = q * es.eigenvectors().col(idx);
  Eigen::VectorXd witness =
      l.transpose().triangularView<Eigen::Upper>().solve(y);
  return {es.eigenvalues()[idx], witness};
}

}  // namespace csl
