#pragma once

#include "mono3d/camera.hpp"
#include "mono3d/kitti_io.hpp"
#include "mono3d/types.hpp"

#include <functional>
#include <random>

namespace mono3d {

struct ClassSpec {
  std::string label;
  Vec3 mean_dims = Vec3::Zero();  // (d_x, d_y, d_z)
  double dim_jitter = 0.1;        // relative, uniform
  double weight = 1.0;
};

std::vector<ClassSpec> default_class_specs();

struct SceneSpec {
  uint64_t seed = 1;
  int num_objects = 4;
  std::vector<ClassSpec> classes = default_class_specs();
  double z_min = 5.0;
  double z_max = 80.0;
  double yaw_min = -M_PI;
  double yaw_max = M_PI;
  int image_width = 640;
  int image_height = 192;
  CameraModel camera = CameraModel::pinhole(400.0, 400.0, 320.0, 96.0);
  double background_depth = 120.0;
  double camera_height = 1.65;  // ground plane at y = camera_height
  bool on_axis = false;         // centroids on the principal axis (else ground)
  double margin_px = 2.0;       // projected boxes stay inside by this margin
  int max_retries = 200;

  void validate() const;
};

struct SynthScene {
  std::vector<LabeledObject> objects;  // exact (unrounded) ground truth
  DepthMap depth;                      // dense, background-filled
  CameraModel camera = CameraModel::pinhole(1, 1, 0, 0);
  ImageMeta meta;
  std::string labels_text;
  std::string calib_text;
};

// Places non-overlapping (BEV) boxes, renders their camera-facing surfaces by
// per-pixel ray-box intersection with a z-buffer over a constant-depth
// background, and emits KITTI-format label/calib text. Deterministic per
// seed. Throws PlacementFailure when an object cannot be placed within
// max_retries attempts.
SynthScene generate_scene(const SceneSpec& spec);

struct MonteCarloIoU {
  double iou = 0.0;
  double standard_error = 0.0;
  size_t samples = 0;
};

// Rejection-sampled 3D IoU estimate: uniform samples inside box a tested for
// containment in b. Independent of the polygon-clipping path.
MonteCarloIoU oracle_monte_carlo_iou(const Box3D& a, const Box3D& b,
                                     size_t n_samples, uint64_t seed = 7);

// Central finite differences (f(x + h e_i) - f(x - h e_i)) / 2h.
Eigen::VectorXd oracle_numeric_gradient(
    const std::function<double(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x, double h);

struct DepthResidualSample {
  double alpha_v = 0.0;
  double theta = 0.0;
  double residual = 0.0;  // t_z minus the similar-triangles depth
};

// Empirical depth residual of the height relation on exact projected boxes,
// swept over vertical viewing angle and yaw. Diagnostic only.
std::vector<DepthResidualSample> empirical_depth_residual_sweep(
    const CameraModel& camera, const Vec3& dims, double t_z,
    const std::vector<double>& t_ys, const std::vector<double>& yaws);

}  // namespace mono3d
