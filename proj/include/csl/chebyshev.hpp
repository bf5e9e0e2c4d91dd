#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <vector>

namespace csl {

// Chebyshev-Lobatto collocation utilities on an interval [0, R].
// Nodes are ordered ascending, r_0 = 0 < ... < r_N = R, clustered toward
// both endpoints.

/// Ascending Chebyshev-Lobatto nodes on [0, R].
inline Eigen::VectorXd cheb_nodes(int n, double r_max) {
  Eigen::VectorXd r(n + 1);
  for (int k = 0; k <= n; ++k)
    r[k] = 0.5 * r_max * (1.0 - std::cos(std::numbers::pi * k / n));
  return r;
}

/// Clenshaw-Curtis weights for \int_0^R f(r) dr on the nodes of cheb_nodes.
/// Exact for polynomials of degree <= n.
inline Eigen::VectorXd clenshaw_curtis_weights(int n, double r_max) {
  // Weights on [-1,1] for nodes cos(k pi / n), k = 0..n, then mapped.
  Eigen::VectorXd w = Eigen::VectorXd::Zero(n + 1);
  const double pi = std::numbers::pi;
  for (int k = 0; k <= n; ++k) {
    double th = pi * k / n;
    double s = 1.0;
    for (int j = 1; j <= n / 2; ++j) {
      double b = (2 * j == n) ? 1.0 : 2.0;
      s -= b * std::cos(2.0 * j * th) / (4.0 * j * j - 1.0);
    }
    double c = (k == 0 || k == n) ? 1.0 : 2.0;
    w[k] = c * s / n;
  }
  // Map [-1,1] -> [0,R]; node order reversal leaves the weights symmetric.
  return 0.5 * r_max * w;
}

/// Barycentric weights for the Chebyshev-Lobatto nodes (ascending order).
inline Eigen::VectorXd cheb_bary_weights(int n) {
  Eigen::VectorXd c(n + 1);
  for (int k = 0; k <= n; ++k) {
    double v = (k % 2 == 0) ? 1.0 : -1.0;
    if (k == 0 || k == n) v *= 0.5;
    c[k] = v;
  }
  return c;
}

/// Spectral differentiation matrix on cheb_nodes(n, r_max).
inline Eigen::MatrixXd cheb_diff_matrix(int n, double r_max) {
  Eigen::VectorXd r = cheb_nodes(n, r_max);
  Eigen::VectorXd c = cheb_bary_weights(n);
  Eigen::MatrixXd d(n + 1, n + 1);
  for (int i = 0; i <= n; ++i) {
    double row_sum = 0.0;
    for (int j = 0; j <= n; ++j) {
      if (i == j) continue;
      d(i, j) = (c[j] / c[i]) / (r[i] - r[j]);
      row_sum += d(i, j);
    }
    d(i, i) = -row_sum;  // negative sum trick
  }
  return d;
}

/// Barycentric interpolation of nodal values to arbitrary points in [0, R].
inline Eigen::VectorXd cheb_interpolate(const Eigen::VectorXd& nodes,
                                        const Eigen::VectorXd& bary,
                                        const Eigen::VectorXd& values,
                                        const Eigen::VectorXd& points) {
  Eigen::VectorXd out(points.size());
  for (int m = 0; m < points.size(); ++m) {
    double x = points[m];
    double num = 0.0, den = 0.0;
    bool hit = false;
    for (int j = 0; j < nodes.size(); ++j) {
      double dx = x - nodes[j];
      if (dx == 0.0) {
        out[m] = values[j];
        hit = true;
        break;
      }
      double t = bary[j] / dx;
      num += t * values[j];
      den += t;
    }
    if (!hit) out[m] = num / den;
  }
  return out;
}

}  // namespace csl
