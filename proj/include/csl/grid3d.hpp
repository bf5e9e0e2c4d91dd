#pragma once

#include <Eigen/Dense>
#include <array>
#include <memory>
#include <vector>

#include "csl/domain.hpp"
#include "csl/errors.hpp"

namespace csl {

/// Uniform lattice over the bounding box of a Box or MaskedGrid domain.
/// Node ordering is x-fastest (index = ix + nx*(iy + ny*iz)), matching the
/// z-major file format of the CLI.
class Grid3D {
public:
  Grid3D(const Domain& domain, int nx, int ny, int nz)
      : domain_(domain), n_{nx, ny, nz} {
    if (nx < 3 || ny < 3 || nz < 3) throw Error("Grid3D: need >= 3 nodes per axis");
    const Vec3 lo = domain.lower();
    const Vec3 hi = domain.upper();
    h_ = Vec3((hi.x() - lo.x()) / (nx - 1), (hi.y() - lo.y()) / (ny - 1),
              (hi.z() - lo.z()) / (nz - 1));
    const int total = nx * ny * nz;
    interior_index_.assign(total, -1);
    for (int iz = 0; iz < nz; ++iz)
      for (int iy = 0; iy < ny; ++iy)
        for (int ix = 0; ix < nx; ++ix) {
          int id = node_id(ix, iy, iz);
          bool lattice_boundary = ix == 0 || iy == 0 || iz == 0 ||
                                  ix == nx - 1 || iy == ny - 1 || iz == nz - 1;
          if (!lattice_boundary && domain.boundary_distance(point(id)) > 0.0) {
            interior_index_[id] = static_cast<int>(interior_nodes_.size());
            interior_nodes_.push_back(id);
          }
        }
  }

  Grid3D(const Domain& domain, int n) : Grid3D(domain, n, n, n) {}

  const Domain& domain() const { return domain_; }
  int nx() const { return n_[0]; }
  int ny() const { return n_[1]; }
  int nz() const { return n_[2]; }
  int num_nodes() const { return n_[0] * n_[1] * n_[2]; }
  const Vec3& spacing() const { return h_; }
  double cell_volume() const { return h_.prod(); }

  int node_id(int ix, int iy, int iz) const {
    return ix + n_[0] * (iy + n_[1] * iz);
  }
  std::array<int, 3> node_coords(int id) const {
    int ix = id % n_[0];
    int iy = (id / n_[0]) % n_[1];
    int iz = id / (n_[0] * n_[1]);
    return {ix, iy, iz};
  }
  Vec3 point(int id) const {
    auto [ix, iy, iz] = node_coords(id);
    return domain_.lower() + Vec3(ix * h_.x(), iy * h_.y(), iz * h_.z());
  }

  bool is_interior(int id) const { return interior_index_[id] >= 0; }
  int interior_index(int id) const { return interior_index_[id]; }
  const std::vector<int>& interior_nodes() const { return interior_nodes_; }
  int num_interior() const { return static_cast<int>(interior_nodes_.size()); }

  /// Nearest lattice node to a point.
  int nearest_node(const Vec3& p) const {
    auto clampi = [](double v, int n) {
      int i = static_cast<int>(std::lround(v));
      return std::max(0, std::min(n - 1, i));
    };
    Vec3 q = p - domain_.lower();
    return node_id(clampi(q.x() / h_.x(), n_[0]), clampi(q.y() / h_.y(), n_[1]),
                   clampi(q.z() / h_.z(), n_[2]));
  }

private:
  Domain domain_;
  std::array<int, 3> n_;
  Vec3 h_;
  std::vector<int> interior_index_;
  std::vector<int> interior_nodes_;
};

}  // namespace csl
