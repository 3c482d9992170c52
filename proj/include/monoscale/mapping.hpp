#pragma once

// Scaled terrain map, voxel occupancy and bowl-mask grasp detection.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Core>

#include "monoscale/errors.hpp"
#include "monoscale/geometry.hpp"

namespace monoscale {

using Vector3i = Eigen::Vector3i;

enum class CloudUnits { kUnscaled, kMeters };

inline const char* to_string(CloudUnits u) {
  return u == CloudUnits::kMeters ? "meters" : "unscaled-map-units";
}

struct PointCloud {
  std::vector<Vector3d> points;
  CloudUnits units = CloudUnits::kUnscaled;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }

  void validate() const {
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (!points[i].allFinite()) throw Error("point " + std::to_string(i) + " is not finite");
    }
  }
};

/// Multiplies every point by `s` and relabels the cloud as metric.
inline PointCloud scale_cloud(const PointCloud& c, double s) {
  if (c.units == CloudUnits::kMeters) throw AlreadyScaled("cloud is already in meters");
  if (!(s > 0.0) || !std::isfinite(s)) throw Error("scale must be positive and finite");
  PointCloud out;
  out.units = CloudUnits::kMeters;
  out.points.reserve(c.points.size());
  for (const auto& p : c.points) out.points.push_back(s * p);
  return out;
}

/// Dense binary occupancy grid. Cell (i, j, k) spans
/// [origin + (i, j, k) * voxel_size, origin + (i+1, j+1, k+1) * voxel_size).
class VoxelGrid {
 public:
  VoxelGrid() = default;
  VoxelGrid(const Vector3d& origin, double voxel_size, const Vector3i& dims)
      : origin_(origin), voxel_size_(voxel_size), dims_(dims) {
    if (!(voxel_size > 0.0) || !std::isfinite(voxel_size)) {
      throw Error("voxel_size must be positive");
    }
    if ((dims.array() < 1).any()) throw Error("grid dims must all be >= 1");
    occupancy_.assign(static_cast<std::size_t>(dims.x()) * dims.y() * dims.z(), 0);
  }

  const Vector3d& origin() const { return origin_; }
  double voxel_size() const { return voxel_size_; }
  const Vector3i& dims() const { return dims_; }
  std::size_t cell_count() const { return occupancy_.size(); }
  const std::vector<std::uint8_t>& data() const { return occupancy_; }

  bool contains(const Vector3i& c) const {
    return (c.array() >= 0).all() && (c.array() < dims_.array()).all();
  }

  /// Out-of-bounds cells read as free.
  bool occupied(const Vector3i& c) const { return contains(c) && occupancy_[index(c)] != 0; }

  void set(const Vector3i& c, bool value) {
    if (!contains(c)) throw Error("voxel index out of range");
    occupancy_[index(c)] = value ? 1 : 0;
  }

  std::size_t occupied_count() const {
    return static_cast<std::size_t>(std::count(occupancy_.begin(), occupancy_.end(), 1));
  }

  /// Cell containing point p; may lie outside the grid.
  Vector3i cell_of(const Vector3d& p) const {
    const Vector3d rel = (p - origin_) / voxel_size_;
    return {static_cast<int>(std::floor(rel.x())), static_cast<int>(std::floor(rel.y())),
            static_cast<int>(std::floor(rel.z()))};
  }

  Vector3d center(const Vector3i& c) const {
    return origin_ + voxel_size_ * (c.cast<double>() + Vector3d::Constant(0.5));
  }

  /// x fastest, then y, then z.
  std::size_t index(const Vector3i& c) const {
    return static_cast<std::size_t>(c.x()) +
           static_cast<std::size_t>(dims_.x()) *
               (static_cast<std::size_t>(c.y()) +
                static_cast<std::size_t>(dims_.y()) * static_cast<std::size_t>(c.z()));
  }

 private:
  Vector3d origin_ = Vector3d::Zero();
  double voxel_size_ = 1.0;
  Vector3i dims_ = Vector3i::Ones();
  std::vector<std::uint8_t> occupancy_ = std::vector<std::uint8_t>(1, 0);
};

inline constexpr double kDefaultVoxelSize = 0.002;
inline constexpr int kDefaultMinPoints = 3;

/// Bins a metric cloud into cells of `voxel_size`. The lattice is aligned to
/// the world origin and covers the bounding box plus one cell on every side.
inline VoxelGrid voxelize(const PointCloud& c, double voxel_size = kDefaultVoxelSize,
                          int min_points = kDefaultMinPoints) {
  if (c.empty()) throw EmptyCloud("cannot voxelize an empty cloud");
  if (c.units != CloudUnits::kMeters) throw Error("voxelize needs a cloud in meters");
  if (!(voxel_size > 0.0) || !std::isfinite(voxel_size)) throw Error("voxel_size must be positive");
  if (min_points < 1) throw Error("min_points must be >= 1");
  c.validate();

  auto lattice = [voxel_size](const Vector3d& p) {
    return Vector3i(static_cast<int>(std::floor(p.x() / voxel_size)),
                    static_cast<int>(std::floor(p.y() / voxel_size)),
                    static_cast<int>(std::floor(p.z() / voxel_size)));
  };
  Vector3i lo = lattice(c.points.front());
  Vector3i hi = lo;
  for (const auto& p : c.points) {
    lo = lo.cwiseMin(lattice(p));
    hi = hi.cwiseMax(lattice(p));
  }
  const Vector3i first = lo - Vector3i::Ones();
  VoxelGrid grid(voxel_size * first.cast<double>(), voxel_size, hi - lo + Vector3i::Constant(3));

  std::vector<int> counts(grid.cell_count(), 0);
  for (const auto& p : c.points) {
    const Vector3i cell = grid.cell_of(p);
    if (grid.contains(cell)) ++counts[grid.index(cell)];
  }
  for (int z = 0; z < grid.dims().z(); ++z) {
    for (int y = 0; y < grid.dims().y(); ++y) {
      for (int x = 0; x < grid.dims().x(); ++x) {
        const Vector3i v(x, y, z);
        if (counts[grid.index(v)] >= min_points) grid.set(v, true);
      }
    }
  }
  return grid;
}

/// Solid terrain from a surface scan. Each (x, y) column gets a surface
/// height equal to the mean z of the cloud points in its highest occupied
/// cell; cells whose centers lie at or below that height are occupied and all
/// others are free. Columns without occupied cells stay empty.
inline VoxelGrid solidify(const VoxelGrid& grid, const PointCloud& cloud) {
  const Vector3i d = grid.dims();
  const double vs = grid.voxel_size();
  std::vector<int> top(static_cast<std::size_t>(d.x()) * d.y(), -1);
  for (int y = 0; y < d.y(); ++y) {
    for (int x = 0; x < d.x(); ++x) {
      for (int z = d.z() - 1; z >= 0; --z) {
        if (grid.occupied({x, y, z})) {
          top[static_cast<std::size_t>(x) + static_cast<std::size_t>(d.x()) * y] = z;
          break;
        }
      }
    }
  }
  std::vector<double> sum(top.size(), 0.0);
  std::vector<int> count(top.size(), 0);
  for (const auto& p : cloud.points) {
    const Vector3i c = grid.cell_of(p);
    if (!grid.contains(c)) continue;
    const std::size_t col = static_cast<std::size_t>(c.x()) + static_cast<std::size_t>(d.x()) * c.y();
    if (c.z() != top[col]) continue;
    sum[col] += p.z();
    ++count[col];
  }
  VoxelGrid out(grid.origin(), vs, d);
  for (int y = 0; y < d.y(); ++y) {
    for (int x = 0; x < d.x(); ++x) {
      const std::size_t col = static_cast<std::size_t>(x) + static_cast<std::size_t>(d.x()) * y;
      if (count[col] == 0) continue;
      const double height = sum[col] / count[col];
      for (int z = 0; z <= top[col]; ++z) {
        if (out.center({x, y, z}).z() <= height) out.set({x, y, z}, true);
      }
    }
  }
  return out;
}

struct GripperParams {
  double outer_radius = 0.030;
  double inner_radius = 0.020;
  double depth = 0.015;
};

/// Bowl-shaped set of cell offsets relative to the anchor cell.
struct GripperMask {
  std::vector<Vector3i> solid_cells;
  GripperParams params;
  double voxel_size = kDefaultVoxelSize;

  std::size_t size() const { return solid_cells.size(); }
  Vector3i min_offset() const { return bound([](int a, int b) { return std::min(a, b); }); }
  Vector3i max_offset() const { return bound([](int a, int b) { return std::max(a, b); }); }

 private:
  template <typename F>
  Vector3i bound(F f) const {
    Vector3i r = solid_cells.empty() ? Vector3i::Zero() : solid_cells.front();
    for (const auto& o : solid_cells) r = Vector3i(f(r.x(), o.x()), f(r.y(), o.y()), f(r.z(), o.z()));
    return r;
  }
};

namespace detail {
// Tolerance for cell centers that sit exactly on a shell or rim, in voxels.
inline constexpr double kMaskSlack = 1e-9;
}  // namespace detail

/// Includes offset o iff inner <= |o| * voxel_size <= outer and the offset's
/// z lies in [-outer, -outer + depth].
inline GripperMask build_mask(const GripperParams& params, double voxel_size = kDefaultVoxelSize) {
  const double outer = params.outer_radius;
  const double inner = params.inner_radius;
  if (!(voxel_size > 0.0) || !std::isfinite(voxel_size)) {
    throw DegenerateMask("voxel_size must be positive");
  }
  if (!(inner > 0.0 && inner < outer)) {
    throw DegenerateMask("need 0 < inner_radius < outer_radius");
  }
  if (!(params.depth > 0.0 && params.depth <= outer)) {
    throw DegenerateMask("need 0 < depth <= outer_radius");
  }
  if (voxel_size > outer - inner) {
    throw DegenerateMask("voxel_size exceeds the shell thickness outer_radius - inner_radius");
  }

  const double ro = outer / voxel_size;
  const double ri = inner / voxel_size;
  const double z_lo = -ro;
  const double z_hi = (params.depth - outer) / voxel_size;
  const int n = static_cast<int>(std::ceil(ro)) + 1;

  GripperMask mask;
  mask.params = params;
  mask.voxel_size = voxel_size;
  for (int z = -n; z <= 0; ++z) {
    if (z < z_lo - detail::kMaskSlack || z > z_hi + detail::kMaskSlack) continue;
    for (int y = -n; y <= n; ++y) {
      for (int x = -n; x <= n; ++x) {
        const double r = std::sqrt(static_cast<double>(x * x + y * y + z * z));
        if (r >= ri - detail::kMaskSlack && r <= ro + detail::kMaskSlack) {
          mask.solid_cells.emplace_back(x, y, z);
        }
      }
    }
  }
  if (mask.solid_cells.empty()) throw DegenerateMask("mask has no solid cells");
  return mask;
}

struct GraspablePoint {
  Vector3d position = Vector3d::Zero();
  Vector3i cell = Vector3i::Zero();
  /// Occupied cells inside the mask bounding box around the anchor.
  int support_count = 0;
};

/// z descending, then x ascending, then y ascending (on cell indices).
inline bool graspable_order(const Vector3i& a, const Vector3i& b) {
  return std::make_tuple(-a.z(), a.x(), a.y()) < std::make_tuple(-b.z(), b.x(), b.y());
}

/// Every grid cell `a` such that `a + o` is occupied for every mask offset `o`.
inline std::vector<GraspablePoint> detect_graspable(const VoxelGrid& grid, const GripperMask& mask) {
  if (mask.solid_cells.empty()) throw DegenerateMask("mask has no solid cells");
  if (std::abs(grid.voxel_size() - mask.voxel_size) > 1e-12 * mask.voxel_size) {
    throw Error("grid and mask voxel sizes differ");
  }
  const Vector3i lo = mask.min_offset();
  const Vector3i hi = mask.max_offset();
  // Anchors whose mask leaves the grid can never be supported.
  const Vector3i first = (-lo).cwiseMax(Vector3i::Zero());
  const Vector3i last = (grid.dims() - Vector3i::Ones() - hi).cwiseMin(grid.dims() - Vector3i::Ones());

  // Rim cells first: they are the most likely to be free.
  std::vector<Vector3i> order = mask.solid_cells;
  std::stable_sort(order.begin(), order.end(),
                   [](const Vector3i& a, const Vector3i& b) { return a.z() > b.z(); });

  std::vector<GraspablePoint> out;
  for (int z = last.z(); z >= first.z(); --z) {
    for (int x = first.x(); x <= last.x(); ++x) {
      for (int y = first.y(); y <= last.y(); ++y) {
        const Vector3i a(x, y, z);
        bool ok = true;
        for (const auto& o : order) {
          if (!grid.occupied(a + o)) {
            ok = false;
            break;
          }
        }
        if (!ok) continue;
        GraspablePoint g;
        g.cell = a;
        g.position = grid.center(a);
        for (int dz = lo.z(); dz <= hi.z(); ++dz) {
          for (int dy = lo.y(); dy <= hi.y(); ++dy) {
            for (int dx = lo.x(); dx <= hi.x(); ++dx) {
              g.support_count += grid.occupied(a + Vector3i(dx, dy, dz)) ? 1 : 0;
            }
          }
        }
        out.push_back(g);
      }
    }
  }
  return out;
}

}  // namespace monoscale
