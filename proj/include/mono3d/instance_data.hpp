#pragma once

#include "mono3d/camera.hpp"
#include "mono3d/frames.hpp"
#include "mono3d/instance_grid.hpp"
#include "mono3d/types.hpp"

namespace mono3d {

// Per-pixel camera-frame points (x, y, z) backprojected from a depth map.
// A cell is valid iff the source depth pixel was valid; the z channel of a
// valid cell equals the source depth exactly.
struct SceneTensor {
  int width = 0;
  int height = 0;
  std::vector<Vec3> points;
  std::vector<uint8_t> valid;

  size_t index(int u, int v) const { return static_cast<size_t>(v) * width + u; }
  const Vec3& at(int u, int v) const { return points[index(u, v)]; }
  bool is_valid(int u, int v) const { return valid[index(u, v)] != 0; }
};

struct PixelPoint {
  int u = 0;
  int v = 0;
  Vec3 point = Vec3::Zero();
};

struct InstanceGridParams {
  int grid_size = 48;     // L = W
  double eps_seg = 0.0;   // segmentation margin, meters
  int k_min = 8;          // minimum valid points per instance
};

// Fills every invalid pixel with the depth of its nearest valid neighbor
// (multi-source BFS dilation; valid input pixels are unchanged, ties go to
// the earlier source in row-major order). Throws EmptyDepth when nothing is
// valid.
DepthMap densify_depth(const DepthMap& sparse);

// Backprojects each valid pixel center (u + 0.5, v + 0.5) at its depth.
SceneTensor depth_to_scene(const DepthMap& depth, const CameraModel& camera);

// Cells whose point lies inside the yaw-rotated ground-truth box expanded by
// eps_seg on each face (closed containment, with a 1e-9 numeric slack so
// points computed exactly on a face stay inside). Throws EmptyInstance when
// no cell qualifies.
std::vector<PixelPoint> segment_instance(const SceneTensor& scene,
                                         const Box3D& gt, double eps_seg);

// Resamples the 2D box crop to an L x W grid by nearest-source-pixel
// assignment. G(i, j) is the chosen source pixel center; a cell is valid iff
// its source pixel belongs to the instance set. Points stay in the camera
// frame.
InstanceGrid make_instance_grid(const std::vector<PixelPoint>& points,
                                const Box2D& box, int grid_size = 48);

// Camera-frame grid into the object-local frame of the ground-truth box via
// build_T_CO(gt centroid, alpha_h).
InstanceGrid grid_to_local(const InstanceGrid& grid, const Box3D& gt,
                           double alpha_h);

}  // namespace mono3d
