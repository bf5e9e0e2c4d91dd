#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <functional>
#include <utility>

#include "csl/errors.hpp"

namespace csl {

using Vec3 = Eigen::Vector3d;

/// Bounded computational domain: a ball, an axis-aligned box, or a box
/// lattice masked by an inside predicate (given as a signed boundary
/// distance).
class Domain {
public:
  enum class Kind { UnitBall, Box, MaskedGrid };

  static Domain ball(double radius = 1.0, const Vec3& center = Vec3::Zero()) {
    if (!(radius > 0.0)) throw Error("Domain: ball radius must be positive");
    Domain d;
    d.kind_ = Kind::UnitBall;
    d.radius_ = radius;
    d.center_ = center;
    d.lower_ = center.array() - radius;
    d.upper_ = center.array() + radius;
    return d;
  }

  static Domain box(const Vec3& lower, const Vec3& upper) {
    if (!((upper - lower).minCoeff() > 0.0))
      throw Error("Domain: box edge lengths must be positive");
    Domain d;
    d.kind_ = Kind::Box;
    d.lower_ = lower;
    d.upper_ = upper;
    return d;
  }

  /// Box lattice restricted to {distance > 0}. `distance` must be positive
  /// inside, non-positive outside.
  static Domain masked(const Vec3& lower, const Vec3& upper,
                       std::function<double(const Vec3&)> distance) {
    if (!((upper - lower).minCoeff() > 0.0))
      throw Error("Domain: box edge lengths must be positive");
    Domain d;
    d.kind_ = Kind::MaskedGrid;
    d.lower_ = lower;
    d.upper_ = upper;
    d.distance_ = std::move(distance);
    return d;
  }

  /// Ball of given radius embedded in its bounding box lattice.
  static Domain masked_ball(double radius = 1.0,
                            const Vec3& center = Vec3::Zero()) {
    Domain d = masked(center.array() - radius, center.array() + radius,
                      [radius, center](const Vec3& p) {
                        return radius - (p - center).norm();
                      });
    d.radius_ = radius;
    d.center_ = center;
    return d;
  }

  Kind kind() const { return kind_; }
  double radius() const { return radius_; }
  const Vec3& center() const { return center_; }
  const Vec3& lower() const { return lower_; }
  const Vec3& upper() const { return upper_; }

  double boundary_distance(const Vec3& p) const {
    switch (kind_) {
      case Kind::UnitBall:
        return radius_ - (p - center_).norm();
      case Kind::Box: {
        double d = (p - lower_).minCoeff();
        d = std::min(d, (upper_ - p).minCoeff());
        return d;
      }
      case Kind::MaskedGrid:
        return distance_(p);
    }
    return 0.0;
  }

  double volume_of_box() const { return (upper_ - lower_).prod(); }

private:
  Kind kind_ = Kind::Box;
  double radius_ = 0.0;
  Vec3 center_ = Vec3::Zero();
  Vec3 lower_ = Vec3::Zero();
  Vec3 upper_ = Vec3::Ones();
  std::function<double(const Vec3&)> distance_;
};

}  // namespace csl
