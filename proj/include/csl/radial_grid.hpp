#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <memory>
#include <numbers>

#include "csl/chebyshev.hpp"
#include "csl/domain.hpp"

namespace csl {

/// Chebyshev-Lobatto grid on [0, R] for radially symmetric fields on a ball
/// centered at the origin of the radial coordinate. Carries the quadrature
/// rule for \int_0^R f r^2 dr and the spectral stiffness/mass matrices used
/// by all radial solvers.
///
/// The stiffness matrices are quadrature-Galerkin forms in the nodal
/// polynomial basis, so discrete integration by parts against the induced
/// Laplacian holds exactly for interior-supported fields.
class RadialGrid {
public:
  RadialGrid(int n, double r_max) : n_(n), r_max_(r_max) {
    nodes_ = cheb_nodes(n, r_max);
    dr_weights_ = clenshaw_curtis_weights(n, r_max);
    bary_ = cheb_bary_weights(n);
    diff_ = cheb_diff_matrix(n, r_max);
    const double four_pi = 4.0 * std::numbers::pi;
    // volume weights for \int f dy = 4 pi \int f r^2 dr (monopole sector)
    vol_weights_ = four_pi * dr_weights_.cwiseProduct(nodes_.cwiseProduct(nodes_));
    Eigen::MatrixXd wr2 = vol_weights_.asDiagonal();
    stiffness0_ = diff_.transpose() * wr2 * diff_;
    // \int (f'g' + l(l+1) f g / r^2) r^2 dr with plain dr-weights on the
    // angular-momentum term (the r^2 factors cancel); sector-wide angular
    // constants are applied by the field operations.
    angular_term_ = (four_pi * dr_weights_).asDiagonal();
  }

  int order() const { return n_; }
  double r_max() const { return r_max_; }
  const Eigen::VectorXd& nodes() const { return nodes_; }
  const Eigen::VectorXd& dr_weights() const { return dr_weights_; }
  const Eigen::VectorXd& vol_weights() const { return vol_weights_; }
  const Eigen::VectorXd& bary() const { return bary_; }
  const Eigen::MatrixXd& diff() const { return diff_; }

  /// Monopole stiffness 4 pi \int u' v' r^2 dr (nodal quadrature form).
  const Eigen::MatrixXd& stiffness_monopole() const { return stiffness0_; }

  /// Stiffness for the angular sector l, including the 4 pi factor but not
  /// the sector's angular normalization (which cancels in Rayleigh
  /// quotients and is applied explicitly elsewhere).
  Eigen::MatrixXd stiffness_sector(int l) const {
    return stiffness0_ + double(l * (l + 1)) * Eigen::MatrixXd(angular_term_);
  }

  /// Diagonal mass for \int u v dy in the monopole sector.
  const Eigen::VectorXd& mass_monopole() const { return vol_weights_; }

  Eigen::VectorXd interpolate(const Eigen::VectorXd& values,
                              const Eigen::VectorXd& points) const {
    return cheb_interpolate(nodes_, bary_, values, points);
  }

  /// Spectral derivative of nodal values.
  Eigen::VectorXd derivative(const Eigen::VectorXd& values) const {
    return diff_ * values;
  }

private:
  int n_;
  double r_max_;
  Eigen::VectorXd nodes_, dr_weights_, vol_weights_, bary_;
  Eigen::MatrixXd diff_, stiffness0_;
  Eigen::DiagonalMatrix<double, Eigen::Dynamic> angular_term_;
};

}  // namespace csl
