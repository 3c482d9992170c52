#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "monoscale/mapping.hpp"

namespace monoscale::testing {

/// Mask membership evaluated directly from the parameters.
inline bool in_bowl(const Vector3i& o, const GripperParams& p, double vs) {
  const Vector3d c = vs * o.cast<double>();
  const double tol = 1e-9 * vs;
  return c.norm() >= p.inner_radius - tol && c.norm() <= p.outer_radius + tol &&
         c.z() >= -p.outer_radius - tol && c.z() <= -p.outer_radius + p.depth + tol;
}

/// Triple loop over anchors, scanning the full bounding box of the bowl.
inline std::vector<Vector3i> brute_force_detect(const VoxelGrid& g, const GripperParams& p) {
  const double vs = g.voxel_size();
  const int n = static_cast<int>(std::ceil(p.outer_radius / vs)) + 2;
  std::vector<Vector3i> box;
  for (int z = -n; z <= n; ++z)
    for (int y = -n; y <= n; ++y)
      for (int x = -n; x <= n; ++x)
        if (in_bowl({x, y, z}, p, vs)) box.emplace_back(x, y, z);
  std::vector<Vector3i> hits;
  for (int x = 0; x < g.dims().x(); ++x) {
    for (int y = 0; y < g.dims().y(); ++y) {
      for (int z = 0; z < g.dims().z(); ++z) {
        const Vector3i a(x, y, z);
        bool all = true;
        for (const auto& o : box) {
          const Vector3i c = a + o;
          const bool inside = (c.array() >= 0).all() && (c.array() < g.dims().array()).all();
          if (!inside || !g.data()[g.index(c)]) {
            all = false;
            break;
          }
        }
        if (all) hits.push_back(a);
      }
    }
  }
  std::sort(hits.begin(), hits.end(), [](const Vector3i& a, const Vector3i& b) {
    if (a.z() != b.z()) return a.z() > b.z();
    if (a.x() != b.x()) return a.x() < b.x();
    return a.y() < b.y();
  });
  return hits;
}

inline std::vector<Vector3i> cells_of(const std::vector<GraspablePoint>& pts) {
  std::vector<Vector3i> out;
  for (const auto& p : pts) out.push_back(p.cell);
  return out;
}

/// Random terrain: heightfield bumps, random solid blobs, or dense noise.
inline VoxelGrid random_grid(std::mt19937_64& rng, int max_dim) {
  std::uniform_int_distribution<int> dim(1, max_dim);
  VoxelGrid g(Vector3d::Zero(), 1.0, {dim(rng), dim(rng), dim(rng)});
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int kind = std::uniform_int_distribution<int>(0, 2)(rng);
  const Vector3i d = g.dims();
  if (kind == 0) {
    const int bumps = 1 + static_cast<int>(u(rng) * 6);
    std::vector<Vector3d> centers;
    for (int b = 0; b < bumps; ++b) centers.emplace_back(u(rng) * d.x(), u(rng) * d.y(), 2.0 + 6.0 * u(rng));
    const double base = 1.0 + 3.0 * u(rng);
    for (int y = 0; y < d.y(); ++y) {
      for (int x = 0; x < d.x(); ++x) {
        double h = base;
        for (const auto& c : centers) {
          const double r2 = (x - c.x()) * (x - c.x()) + (y - c.y()) * (y - c.y());
          if (r2 <= c.z() * c.z()) h = std::max(h, base + std::sqrt(c.z() * c.z() - r2));
        }
        for (int z = 0; z < d.z() && z < h; ++z) g.set({x, y, z}, true);
      }
    }
  } else if (kind == 1) {
    for (int b = 0; b < 8; ++b) {
      const Vector3d c(u(rng) * d.x(), u(rng) * d.y(), u(rng) * d.z());
      const double r = 2.0 + 8.0 * u(rng);
      for (int z = 0; z < d.z(); ++z)
        for (int y = 0; y < d.y(); ++y)
          for (int x = 0; x < d.x(); ++x)
            if ((Vector3d(x, y, z) - c).norm() <= r) g.set({x, y, z}, true);
    }
  } else {
    const double density = 0.9 + 0.1 * u(rng);
    for (int z = 0; z < d.z(); ++z)
      for (int y = 0; y < d.y(); ++y)
        for (int x = 0; x < d.x(); ++x) g.set({x, y, z}, u(rng) < density);
  }
  return g;
}

/// Dense samples of a hemisphere on the z = 0 plane.
inline PointCloud hemisphere_on_plane(const Vector3d& center, double radius, double extent, double spacing) {
  PointCloud c{{}, CloudUnits::kMeters};
  for (double x = -extent; x <= extent; x += spacing) {
    for (double y = -extent; y <= extent; y += spacing) {
      const double r2 = (x - center.x()) * (x - center.x()) + (y - center.y()) * (y - center.y());
      c.points.emplace_back(x, y, r2 < radius * radius ? std::sqrt(radius * radius - r2) : 0.0);
    }
  }
  return c;
}

inline VoxelGrid solidify_cloud(const PointCloud& c, double vs) { return solidify(voxelize(c, vs, 3), c); }

}  // namespace monoscale::testing
