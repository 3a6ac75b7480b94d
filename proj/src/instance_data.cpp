#include "mono3d/instance_data.hpp"

#include <deque>
#include <unordered_map>

namespace mono3d {

DepthMap densify_depth(const DepthMap& sparse) {
  DepthMap dense = sparse;
  std::deque<std::pair<int, int>> queue;
  for (int v = 0; v < sparse.height; ++v) {
    for (int u = 0; u < sparse.width; ++u) {
      if (sparse.valid(u, v)) queue.emplace_back(u, v);
    }
  }
  if (queue.empty()) {
    throw Error(ErrorCode::empty_depth, "depth map has no valid pixel");
  }
  static constexpr int du[4] = {1, -1, 0, 0};
  static constexpr int dv[4] = {0, 0, 1, -1};
  while (!queue.empty()) {
    const auto [u, v] = queue.front();
    queue.pop_front();
    const double z = dense.at(u, v);
    for (int k = 0; k < 4; ++k) {
      const int nu = u + du[k], nv = v + dv[k];
      if (!dense.in_bounds(nu, nv) || dense.valid(nu, nv)) continue;
      dense.at(nu, nv) = z;
      queue.emplace_back(nu, nv);
    }
  }
  return dense;
}

SceneTensor depth_to_scene(const DepthMap& depth, const CameraModel& camera) {
  SceneTensor scene;
  scene.width = depth.width;
  scene.height = depth.height;
  scene.points.assign(depth.z.size(), Vec3::Zero());
  scene.valid.assign(depth.z.size(), 0);
  for (int v = 0; v < depth.height; ++v) {
    for (int u = 0; u < depth.width; ++u) {
      if (!depth.valid(u, v)) continue;
      const size_t k = scene.index(u, v);
      scene.points[k] =
          backproject(camera, Vec2(u + 0.5, v + 0.5), depth.at(u, v));
      scene.valid[k] = 1;
    }
  }
  return scene;
}

std::vector<PixelPoint> segment_instance(const SceneTensor& scene,
                                         const Box3D& gt, double eps_seg) {
  if (!gt.valid()) {
    throw Error(ErrorCode::invalid_argument, "invalid ground-truth box");
  }
  const Mat3 R = rotation_about_y(gt.yaw);
  const Vec3 half = 0.5 * gt.dims +
                    Vec3::Constant(eps_seg + 1e-9);  // numeric slack on faces
  std::vector<PixelPoint> out;
  for (int v = 0; v < scene.height; ++v) {
    for (int u = 0; u < scene.width; ++u) {
      if (!scene.is_valid(u, v)) continue;
      const Vec3& p = scene.at(u, v);
      const Vec3 q = R.transpose() * (p - gt.t);
      if (std::abs(q.x()) <= half.x() && std::abs(q.y()) <= half.y() &&
          std::abs(q.z()) <= half.z()) {
        out.push_back({u, v, p});
      }
    }
  }
  if (out.empty()) {
    throw Error(ErrorCode::empty_instance, "no scene point inside the box");
  }
  return out;
}

InstanceGrid make_instance_grid(const std::vector<PixelPoint>& points,
                                const Box2D& box, int grid_size) {
  if (points.empty()) {
    throw Error(ErrorCode::empty_instance, "empty instance point set");
  }
  if (!box.valid() || grid_size < 1) {
    throw Error(ErrorCode::invalid_argument, "invalid crop box or grid size");
  }
  std::unordered_map<int64_t, const PixelPoint*> by_pixel;
  by_pixel.reserve(points.size());
  int max_u = 0, max_v = 0;
  for (const auto& pp : points) {
    by_pixel[(static_cast<int64_t>(pp.v) << 32) | static_cast<uint32_t>(pp.u)] =
        &pp;
    max_u = std::max(max_u, pp.u);
    max_v = std::max(max_v, pp.v);
  }

  const int L = grid_size;
  InstanceGrid grid(L, L, GridFrame::camera);
  grid.source_box = box;
  const double su = box.width() / L;
  const double sv = box.height() / L;
  // Nearest source pixel to a continuous coordinate x: pixel centers sit at
  // integer + 0.5, so floor(x) — except exactly on a boundary, where the tie
  // goes to the smaller index.
  const auto nearest = [](double x) {
    const double f = std::floor(x);
    return static_cast<int>(f == x ? f - 1.0 : f);
  };
  for (int i = 0; i < L; ++i) {
    const int pv = nearest(box.v1 + (i + 0.5) * sv);
    for (int j = 0; j < L; ++j) {
      const int pu = nearest(box.u1 + (j + 0.5) * su);
      const size_t k = grid.index(i, j);
      grid.expected_px[k] = Vec2(pu + 0.5, pv + 0.5);
      auto it = by_pixel.find((static_cast<int64_t>(pv) << 32) |
                              static_cast<uint32_t>(pu));
      if (it != by_pixel.end()) {
        grid.mask[k] = 1;
        grid.points[k] = it->second->point;
      }
    }
  }
  return grid;
}

InstanceGrid grid_to_local(const InstanceGrid& grid, const Box3D& gt,
                           double alpha_h) {
  return camera_to_local(grid, build_T_CO(gt.t, alpha_h));
}

}  // namespace mono3d
