#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <memory>
#include <numbers>
#include <optional>
#include <vector>

#include "csl/errors.hpp"
#include "csl/field.hpp"
#include "csl/greens.hpp"
#include "csl/grid_operator.hpp"
#include "csl/radial_operator.hpp"

namespace csl {

/// Concentration point and scale of a bubble, with the derived boundary
/// distance. lambda * d below t_min leaves the asymptotic regime; that is a
/// warning condition, not an error.
struct BubbleParams {
  Vec3 x = Vec3::Zero();
  double lambda = 1.0;
  double d = 0.0;  // dist(x, boundary)
  double t_min = 10.0;

  static BubbleParams make(const Domain& dom, const Vec3& x, double lambda,
                           double t_min = 10.0) {
    BubbleParams p;
    p.x = x;
    p.lambda = lambda;
    p.d = dom.boundary_distance(x);
    p.t_min = t_min;
    return p;
  }
  bool asymptotic_regime() const { return lambda * d > t_min; }
};

inline double bubble_value(const BubbleParams& p, const Vec3& y) {
  double r2 = (y - p.x).squaredNorm();
  return std::sqrt(p.lambda) / std::sqrt(1.0 + p.lambda * p.lambda * r2);
}

inline double bubble_dlambda(const BubbleParams& p, const Vec3& y) {
  double t2 = p.lambda * p.lambda * (y - p.x).squaredNorm();
  return 0.5 / std::sqrt(p.lambda) * (1.0 - t2) / std::pow(1.0 + t2, 1.5);
}

inline double bubble_dx(const BubbleParams& p, const Vec3& y, int axis) {
  double t2 = p.lambda * p.lambda * (y - p.x).squaredNorm();
  return std::pow(p.lambda, 2.5) * (y[axis] - p.x[axis]) /
         std::pow(1.0 + t2, 1.5);
}

/// U_{x,lambda} sampled on a grid.
inline ScalarField u_bubble(std::shared_ptr<const RadialGrid> grid,
                            const BubbleParams& p) {
  return radial_field(grid, [&p](double r) {
    return bubble_value(p, p.x + Vec3(r, 0, 0));
  }, "U");
}

inline ScalarField u_bubble(std::shared_ptr<const Grid3D> grid,
                            const BubbleParams& p) {
  return volumetric_field(grid, [&p](const Vec3& y) { return bubble_value(p, y); },
                          "U");
}

/// The five-mode bubble family on one grid: PU and its scale/position
/// derivatives (all vanishing on the boundary), their H^1_0 norms, and the
/// Gram matrix of the normalized modes.
struct BubbleBasis {
  BubbleParams params;
  std::array<ScalarField, 5> modes;  // PU, dPU/dlambda, dPU/dx_i
  std::array<double, 5> norms{};     // ||grad mode||
  Eigen::Matrix<double, 5, 5> gram;  // of normalized modes
  ScalarField u;                     // the unprojected bubble
};

/// Radial-path basis for a ball with the bubble at the center: PU and
/// dPU/dlambda live in the monopole sector, dPU/dx_i in the dipole sectors
/// (profile shared across axes by symmetry).
inline BubbleBasis zero_mode_basis(std::shared_ptr<const RadialGrid> grid,
                                   const BubbleParams& p) {
  const double lam = p.lambda;
  RadialDirichlet mono(grid, 0, Eigen::VectorXd::Zero(grid->order() + 1));
  RadialDirichlet dip(grid, 1, Eigen::VectorXd::Zero(grid->order() + 1));

  auto prof = [&](const std::function<double(double)>& fn) {
    Eigen::VectorXd v(grid->order() + 1);
    for (int i = 0; i < v.size(); ++i) v[i] = fn(grid->nodes()[i]);
    return v;
  };
  auto uval = [&](double r) {
    return std::sqrt(lam) / std::sqrt(1.0 + lam * lam * r * r);
  };
  Eigen::VectorXd u5 = prof([&](double r) { return std::pow(uval(r), 5.0); });
  Eigen::VectorXd u4dlam = prof([&](double r) {
    double t2 = lam * lam * r * r;
    double dl = 0.5 / std::sqrt(lam) * (1.0 - t2) / std::pow(1.0 + t2, 1.5);
    return std::pow(uval(r), 4.0) * dl;
  });
  // dipole profile of dU/dx_i: lambda^{5/2} r (1 + lambda^2 r^2)^{-3/2}
  Eigen::VectorXd u4dx = prof([&](double r) {
    double t2 = lam * lam * r * r;
    return std::pow(uval(r), 4.0) * std::pow(lam, 2.5) * r /
           std::pow(1.0 + t2, 1.5);
  });

  BubbleBasis basis;
  basis.params = p;
  basis.u = ScalarField::radial(grid, prof(uval), "U");
  basis.modes[0] = ScalarField::radial(grid, mono.solve(3.0 * u5), "PU");
  basis.modes[1] =
      ScalarField::radial(grid, mono.solve(15.0 * u4dlam), "dPU_dlambda");
  Eigen::VectorXd dip_vals = dip.solve(15.0 * u4dx);
  static constexpr Harmonic axes[3] = {Harmonic::DipoleX, Harmonic::DipoleY,
                                       Harmonic::DipoleZ};
  for (int i = 0; i < 3; ++i)
    basis.modes[2 + i] =
        ScalarField::radial(grid, dip_vals, "dPU_dx", axes[i]);

  for (int j = 0; j < 5; ++j)
    basis.norms[j] = std::sqrt(h1_inner(basis.modes[j], basis.modes[j]));
  for (int j = 0; j < 5; ++j)
    for (int k = 0; k < 5; ++k)
      basis.gram(j, k) = h1_inner(basis.modes[j], basis.modes[k]) /
                         (basis.norms[j] * basis.norms[k]);
  return basis;
}

/// Volumetric basis: five Poisson solves on the lattice.
inline BubbleBasis zero_mode_basis(std::shared_ptr<const Grid3D> grid,
                                   const BubbleParams& p,
                                   const GridSolveOptions& opts = {}) {
  BubbleBasis basis;
  basis.params = p;
  basis.u = u_bubble(grid, p);
  Eigen::VectorXd zero_a = Eigen::VectorXd::Zero(grid->num_nodes());
  auto solve_rhs = [&](const std::function<double(const Vec3&)>& rhs,
                       const char* name) {
    GridSolveResult r = solve_grid_dirichlet(
        *grid, zero_a, rhs, [](const Vec3&) { return 0.0; }, opts);
    return ScalarField::volumetric(grid, std::move(r.values), name);
  };
  basis.modes[0] = solve_rhs(
      [&p](const Vec3& y) { return 3.0 * std::pow(bubble_value(p, y), 5.0); },
      "PU");
  basis.modes[1] = solve_rhs(
      [&p](const Vec3& y) {
        return 15.0 * std::pow(bubble_value(p, y), 4.0) * bubble_dlambda(p, y);
      },
      "dPU_dlambda");
  for (int i = 0; i < 3; ++i)
    basis.modes[2 + i] = solve_rhs(
        [&p, i](const Vec3& y) {
          return 15.0 * std::pow(bubble_value(p, y), 4.0) * bubble_dx(p, y, i);
        },
        "dPU_dx");
  for (int j = 0; j < 5; ++j)
    basis.norms[j] = std::sqrt(h1_inner(basis.modes[j], basis.modes[j]));
  for (int j = 0; j < 5; ++j)
    for (int k = 0; k < 5; ++k)
      basis.gram(j, k) = h1_inner(basis.modes[j], basis.modes[k]) /
                         (basis.norms[j] * basis.norms[k]);
  return basis;
}

/// PU alone (first basis mode).
template <typename GridPtr>
inline ScalarField pu_bubble(GridPtr grid, const BubbleParams& p) {
  return zero_mode_basis(grid, p).modes[0];
}

/// Residual f = U - lambda^{-1/2} H_0(x,.) - PU; its sup norm decays like
/// lambda^{-5/2} d^{-3}.
inline ScalarField pu_residual(const ScalarField& pu, const BubbleParams& p,
                               const GreensData& greens0) {
  if (!pu.same_grid(greens0.regular_part))
    throw DomainMismatch("pu_residual: PU and H_0 on different grids");
  double s = 1.0 / std::sqrt(p.lambda);
  ScalarField u = pu.is_radial() ? u_bubble(pu.radial_grid_ptr(), p)
                                 : u_bubble(pu.grid3d_ptr(), p);
  ScalarField f = u - s * greens0.regular_part - pu;
  f.set_name("f_residual");
  return f;
}

/// Trial function psi = PU - lambda^{-1/2} (H_a(x,.) - H_0(x,.)).
inline ScalarField psi_trial(const ScalarField& pu, const BubbleParams& p,
                             const GreensData& greens_a,
                             const GreensData& greens_0) {
  if ((greens_a.pole - greens_0.pole).norm() > 1e-12 ||
      (greens_a.pole - p.x).norm() > 1e-12)
    throw PoleMismatch("psi_trial: Green's data poles disagree");
  if (!pu.same_grid(greens_a.regular_part) ||
      !pu.same_grid(greens_0.regular_part))
    throw DomainMismatch("psi_trial: fields on different grids");
  double s = 1.0 / std::sqrt(p.lambda);
  ScalarField psi = pu - s * (greens_a.regular_part - greens_0.regular_part);
  psi.set_name("psi");
  return psi;
}

/// Orthonormalize the basis via the symmetric inverse square root of the
/// Gram matrix (eigenvalue floor 1e-12; condition cap 1e8).
inline Eigen::Matrix<double, 5, 5> gram_inverse_sqrt(
    const Eigen::Matrix<double, 5, 5>& gram) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 5, 5>> es(gram);
  if (es.info() != Eigen::Success)
    throw EigenSolveFailure("gram_inverse_sqrt: eigensolver failed");
  double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
  if (lo < 1e-12 || hi / std::max(lo, 1e-300) > 1e8)
    throw IllConditionedGram("gram_inverse_sqrt: Gram matrix ill-conditioned");
  Eigen::Matrix<double, 5, 5> g_isqrt =
      es.eigenvectors() *
      es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
      es.eigenvectors().transpose();
  return g_isqrt;
}

struct Projection {
  Eigen::Matrix<double, 5, 1> coefficients;  // in the orthonormalized basis
  ScalarField tangential;                    // Pi u
};

/// H^1_0-orthogonal projection of u onto T_{x,lambda}.
inline Projection project_T(const ScalarField& u, const BubbleBasis& basis) {
  Eigen::Matrix<double, 5, 5> g_isqrt = gram_inverse_sqrt(basis.gram);
  Eigen::Matrix<double, 5, 1> raw;  // <phi_tilde_k, u>
  for (int k = 0; k < 5; ++k)
    raw[k] = h1_inner(basis.modes[k], u) / basis.norms[k];
  Projection out;
  out.coefficients = g_isqrt * raw;
  // Pi u = sum_j c_j psi_j = sum_k (G^{-1} raw)_k phi_tilde_k
  Eigen::Matrix<double, 5, 1> nodal_c = g_isqrt * out.coefficients;
  ScalarField acc = (nodal_c[0] / basis.norms[0]) * basis.modes[0];
  for (int k = 1; k < 5; ++k) {
    double c = nodal_c[k] / basis.norms[k];
    if (c == 0.0) continue;
    if (u.is_radial() && basis.modes[k].harmonic() != acc.harmonic()) {
      // distinct angular sectors cannot be summed in the radial
      // representation; a monopole input never excites them
      if (std::abs(c) * basis.norms[k] > 1e-12 * (1.0 + raw.norm()))
        throw DomainMismatch("project_T: input excites mixed angular sectors");
      continue;
    }
    acc = acc + c * basis.modes[k];
  }
  acc.set_name("Pi(" + u.name() + ")");
  out.tangential = acc;
  return out;
}

inline ScalarField project_T_perp(const ScalarField& u, const BubbleBasis& basis) {
  ScalarField w = u - project_T(u, basis).tangential;
  w.set_name("PiPerp(" + u.name() + ")");
  return w;
}

/// Numerator of the quotient: \int |grad u|^2 + (a + eps V) u^2.
inline double energy(const ScalarField& u, const ScalarField& a,
                     const ScalarField& v, double eps) {
  ScalarField u2 = pointwise(u, u);
  return h1_inner(u, u) + integrate(pointwise(a + eps * v, u2));
}

/// S_{a + eps V}[u], invariant under scaling of u.
inline double rayleigh(const ScalarField& u, const ScalarField& a,
                       const ScalarField& v, double eps) {
  double den = integrate(pow(u, 6.0));
  if (!(den > 0.0)) throw ZeroField("rayleigh: field vanishes");
  return energy(u, a, v, eps) / std::cbrt(den);
}

struct CoercivityReport {
  BubbleParams params;
  double rho_min = 0.0;
  int sector = 0;       // angular sector attaining the minimum
  bool deflated = true;
  ScalarField witness;
  double witness_quotient = 0.0;  // Q[witness]/||grad witness||^2, recomputed
};

/// Smallest generalized eigenvalue of
///   Q[v] = \int (|grad v|^2 + a v^2 - 15 U^4 v^2)  relative to  \int |grad v|^2
/// on the discrete complement of T_{x,lambda} (ball, bubble at center).
/// Examined per angular sector: monopole (deflating PU, dPU/dlambda),
/// dipole (deflating dPU/dx), quadrupole (nothing to deflate).
inline CoercivityReport coercivity_min_eig(std::shared_ptr<const RadialGrid> grid,
                                           const BubbleParams& p,
                                           const Eigen::VectorXd& a_profile,
                                           bool deflate = true) {
  BubbleBasis basis = zero_mode_basis(grid, p);
  const int n = grid->order();
  const Eigen::VectorXd& mass = grid->mass_monopole();
  Eigen::VectorXd u4(n + 1);
  for (int i = 0; i <= n; ++i) {
    double uu = bubble_value(p, p.x + Vec3(grid->nodes()[i], 0, 0));
    u4[i] = std::pow(uu, 4.0);
  }

  CoercivityReport rep;
  rep.params = p;
  rep.deflated = deflate;
  rep.rho_min = std::numeric_limits<double>::infinity();

  for (int l = 0; l <= 2; ++l) {
    int first = (l == 0) ? 0 : 1;
    int m = n - first;
    Eigen::MatrixXd k =
        (l == 0 ? grid->stiffness_monopole() : grid->stiffness_sector(l))
            .block(first, first, m, m);
    Eigen::MatrixXd a_mat = k;
    for (int i = 0; i < m; ++i)
      a_mat(i, i) +=
          mass[first + i] * (a_profile[first + i] - 15.0 * u4[first + i]);
    std::vector<Eigen::VectorXd> deflation;
    if (deflate) {
      if (l == 0) {
        deflation.push_back(basis.modes[0].values().segment(first, m));
        deflation.push_back(basis.modes[1].values().segment(first, m));
      } else if (l == 1) {
        deflation.push_back(basis.modes[2].values().segment(first, m));
      }
    }
    auto [rho, w] = deflated_min_eig(a_mat, k, deflation);
    if (rho < rep.rho_min) {
      rep.rho_min = rho;
      rep.sector = l;
      Eigen::VectorXd full = Eigen::VectorXd::Zero(n + 1);
      full.segment(first, m) = w;
      Harmonic harm = (l == 1) ? Harmonic::DipoleX : Harmonic::Monopole;
      // quadrupole witnesses are reported by their radial profile
      rep.witness = ScalarField::radial(grid, full, "coercivity_witness", harm);
      double qw = w.dot(a_mat * w);
      double kw = w.dot(k * w);
      rep.witness_quotient = qw / kw;
    }
  }
  return rep;
}

}  // namespace csl
