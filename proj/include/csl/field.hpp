#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <utility>

#include "csl/errors.hpp"
#include "csl/grid3d.hpp"
#include "csl/radial_grid.hpp"

namespace csl {

/// Angular sector of a radially represented field: a plain radial profile
/// (monopole) or a profile times y_i/r (dipole along one axis). Dipole
/// sectors carry the position-derivative bubble modes on the ball.
enum class Harmonic { Monopole, DipoleX, DipoleY, DipoleZ };

inline int dipole_axis(Harmonic h) {
  switch (h) {
    case Harmonic::DipoleX: return 0;
    case Harmonic::DipoleY: return 1;
    case Harmonic::DipoleZ: return 2;
    default: return -1;
  }
}

/// Values of a function on a domain grid. Radial representation lives on a
/// ball with the pole at the center; volumetric representation on a Grid3D
/// lattice. Immutable after construction by convention: operations return
/// new fields.
class ScalarField {
public:
  ScalarField() = default;

  static ScalarField radial(std::shared_ptr<const RadialGrid> grid,
                            Eigen::VectorXd values, std::string name = {},
                            Harmonic harmonic = Harmonic::Monopole) {
    if (values.size() != grid->order() + 1)
      throw DomainMismatch("ScalarField: radial value count mismatch");
    ScalarField f;
    f.radial_ = std::move(grid);
    f.values_ = std::move(values);
    f.name_ = std::move(name);
    f.harmonic_ = harmonic;
    return f;
  }

  static ScalarField volumetric(std::shared_ptr<const Grid3D> grid,
                                Eigen::VectorXd values, std::string name = {}) {
    if (values.size() != grid->num_nodes())
      throw DomainMismatch("ScalarField: volumetric value count mismatch");
    ScalarField f;
    f.grid_ = std::move(grid);
    f.values_ = std::move(values);
    f.name_ = std::move(name);
    return f;
  }

  bool is_radial() const { return radial_ != nullptr; }
  bool is_volumetric() const { return grid_ != nullptr; }
  const RadialGrid& radial_grid() const { return *radial_; }
  const std::shared_ptr<const RadialGrid>& radial_grid_ptr() const { return radial_; }
  const Grid3D& grid3d() const { return *grid_; }
  const std::shared_ptr<const Grid3D>& grid3d_ptr() const { return grid_; }
  Harmonic harmonic() const { return harmonic_; }
  const Eigen::VectorXd& values() const { return values_; }
  Eigen::VectorXd& mutable_values() { return values_; }
  const std::string& name() const { return name_; }
  const std::optional<Vec3>& pole() const { return pole_; }
  void set_pole(const Vec3& p) { pole_ = p; }
  void set_name(std::string n) { name_ = std::move(n); }

  bool same_grid(const ScalarField& other) const {
    return radial_ == other.radial_ && grid_ == other.grid_;
  }

  ScalarField with_values(Eigen::VectorXd v, std::string name = {}) const {
    ScalarField f = *this;
    f.values_ = std::move(v);
    if (!name.empty()) f.name_ = std::move(name);
    return f;
  }

private:
  std::shared_ptr<const RadialGrid> radial_;
  std::shared_ptr<const Grid3D> grid_;
  Eigen::VectorXd values_;
  Harmonic harmonic_ = Harmonic::Monopole;
  std::string name_;
  std::optional<Vec3> pole_;
};

namespace detail {

/// Trapezoid-product quadrature weight of a lattice node (Box domains).
inline double box_node_weight(const Grid3D& g, int id) {
  auto [ix, iy, iz] = g.node_coords(id);
  double w = g.cell_volume();
  if (ix == 0 || ix == g.nx() - 1) w *= 0.5;
  if (iy == 0 || iy == g.ny() - 1) w *= 0.5;
  if (iz == 0 || iz == g.nz() - 1) w *= 0.5;
  return w;
}

inline void require_same_grid(const ScalarField& a, const ScalarField& b) {
  if (!a.same_grid(b)) throw DomainMismatch("fields live on different grids");
}

/// Angular moment \int_{S^2} |cos theta|^p dOmega = 4 pi / (p + 1).
inline double dipole_angular_moment(double p) {
  return 4.0 * std::numbers::pi / (p + 1.0);
}

}  // namespace detail

/// Quadrature approximation of \int_Omega f dy.
inline double integrate(const ScalarField& f) {
  if (!f.values().allFinite()) throw Error("integrate: non-finite values");
  if (f.is_radial()) {
    if (f.harmonic() != Harmonic::Monopole) return 0.0;  // odd angular part
    return f.radial_grid().vol_weights().dot(f.values());
  }
  const Grid3D& g = f.grid3d();
  double s = 0.0;
  if (g.domain().kind() == Domain::Kind::Box) {
    for (int id = 0; id < g.num_nodes(); ++id)
      s += detail::box_node_weight(g, id) * f.values()[id];
  } else {
    const double w = g.cell_volume();
    for (int id : g.interior_nodes()) s += w * f.values()[id];
  }
  return s;
}

/// Discrete H^1_0 inner product \int grad u . grad v dy, using the same
/// stencils as the solvers so that integration by parts against the
/// discrete Laplacian is exact for interior-supported fields.
inline double h1_inner(const ScalarField& u, const ScalarField& v) {
  detail::require_same_grid(u, v);
  if (u.is_radial()) {
    if (u.harmonic() != v.harmonic()) return 0.0;  // angular orthogonality
    const RadialGrid& g = u.radial_grid();
    if (u.harmonic() == Harmonic::Monopole)
      return u.values().dot(g.stiffness_monopole() * v.values());
    // dipole sector: (1/3) * [4 pi \int (f'g' + 2 f g / r^2) r^2 dr]
    return u.values().dot(g.stiffness_sector(1) * v.values()) / 3.0;
  }
  const Grid3D& g = u.grid3d();
  const Vec3& h = g.spacing();
  const double vol = g.cell_volume();
  const int strides[3] = {1, g.nx(), g.nx() * g.ny()};
  const int limits[3] = {g.nx(), g.ny(), g.nz()};
  double s = 0.0;
  auto val = [&](const Eigen::VectorXd& x, int id) {
    return g.is_interior(id) ? x[id] : 0.0;
  };
  for (int axis = 0; axis < 3; ++axis) {
    const double c = vol / (h[axis] * h[axis]);
    for (int iz = 0; iz < g.nz(); ++iz)
      for (int iy = 0; iy < g.ny(); ++iy)
        for (int ix = 0; ix < g.nx(); ++ix) {
          int idx[3] = {ix, iy, iz};
          if (idx[axis] + 1 >= limits[axis]) continue;
          int a = g.node_id(ix, iy, iz);
          int b = a + strides[axis];
          if (!g.is_interior(a) && !g.is_interior(b)) continue;
          s += c * (val(u.values(), b) - val(u.values(), a)) *
               (val(v.values(), b) - val(v.values(), a));
        }
  }
  return s;
}

/// L^p norm; p = infinity returns max |f|.
inline double lp_norm(const ScalarField& f, double p) {
  if (p < 1.0) throw InvalidExponent("lp_norm: p must be >= 1");
  if (std::isinf(p)) return f.values().cwiseAbs().maxCoeff();
  if (f.is_radial()) {
    const RadialGrid& g = f.radial_grid();
    Eigen::VectorXd absp = f.values().cwiseAbs().array().pow(p);
    double radial_part = g.dr_weights().dot(
        absp.cwiseProduct(g.nodes().cwiseProduct(g.nodes())));
    double ang = (f.harmonic() == Harmonic::Monopole)
                     ? 4.0 * std::numbers::pi
                     : detail::dipole_angular_moment(p);
    return std::pow(ang * radial_part, 1.0 / p);
  }
  ScalarField absp = f.with_values(f.values().cwiseAbs().array().pow(p));
  return std::pow(integrate(absp), 1.0 / p);
}

/// Discrete Laplacian matching h1_inner: for interior-supported u, v one has
/// h1_inner(u, v) = -integrate(v * laplacian(u)) exactly.
inline ScalarField laplacian(const ScalarField& u) {
  if (u.is_radial()) {
    const RadialGrid& g = u.radial_grid();
    Eigen::MatrixXd k = (u.harmonic() == Harmonic::Monopole)
                            ? g.stiffness_monopole()
                            : (g.stiffness_sector(1) / 3.0);
    Eigen::VectorXd ku = k * u.values();
    Eigen::VectorXd mass = g.mass_monopole();
    if (u.harmonic() != Harmonic::Monopole)
      mass *= detail::dipole_angular_moment(2.0) / (4.0 * std::numbers::pi);
    Eigen::VectorXd out(ku.size());
    for (int i = 0; i < ku.size(); ++i)
      out[i] = (mass[i] > 0.0) ? -ku[i] / mass[i] : 0.0;
    // r = 0 is a coordinate endpoint with zero quadrature weight; use the
    // pseudospectral limit 3 u''(0) there (monopole only).
    if (u.harmonic() == Harmonic::Monopole)
      out[0] = 3.0 * (g.diff() * (g.diff() * u.values()))[0];
    return u.with_values(std::move(out), "lap(" + u.name() + ")");
  }
  const Grid3D& g = u.grid3d();
  const Vec3& h = g.spacing();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(g.num_nodes());
  const int strides[3] = {1, g.nx(), g.nx() * g.ny()};
  auto val = [&](int id) { return g.is_interior(id) ? u.values()[id] : 0.0; };
  for (int id : g.interior_nodes()) {
    double acc = 0.0;
    for (int axis = 0; axis < 3; ++axis) {
      double inv_h2 = 1.0 / (h[axis] * h[axis]);
      acc += (val(id + strides[axis]) - 2.0 * u.values()[id] +
              val(id - strides[axis])) *
             inv_h2;
    }
    out[id] = acc;
  }
  return u.with_values(std::move(out), "lap(" + u.name() + ")");
}

// Pointwise arithmetic within one representation.

inline ScalarField operator+(const ScalarField& a, const ScalarField& b) {
  detail::require_same_grid(a, b);
  if (a.is_radial() && a.harmonic() != b.harmonic())
    throw DomainMismatch("cannot add fields from different angular sectors");
  return a.with_values(a.values() + b.values());
}

inline ScalarField operator-(const ScalarField& a, const ScalarField& b) {
  detail::require_same_grid(a, b);
  if (a.is_radial() && a.harmonic() != b.harmonic())
    throw DomainMismatch("cannot subtract fields from different angular sectors");
  return a.with_values(a.values() - b.values());
}

inline ScalarField operator*(double c, const ScalarField& a) {
  return a.with_values(c * a.values());
}

inline ScalarField pointwise(const ScalarField& a, const ScalarField& b) {
  detail::require_same_grid(a, b);
  if (a.is_radial() && !(a.harmonic() == Harmonic::Monopole &&
                         b.harmonic() == Harmonic::Monopole))
    throw DomainMismatch("pointwise products only in the monopole sector");
  return a.with_values(a.values().cwiseProduct(b.values()));
}

inline ScalarField pow(const ScalarField& a, double p) {
  if (a.is_radial() && a.harmonic() != Harmonic::Monopole)
    throw DomainMismatch("pow only in the monopole sector");
  return a.with_values(a.values().array().pow(p).matrix());
}

}  // namespace csl
