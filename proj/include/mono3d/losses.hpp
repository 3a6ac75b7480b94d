#pragma once

#include "mono3d/camera.hpp"
#include "mono3d/frames.hpp"
#include "mono3d/instance_grid.hpp"
#include "mono3d/types.hpp"

#include <map>

namespace mono3d {

struct LossWeights {
  double w_t = 1.0;
  double w_theta = 1.0;
  double w_dim = 1.0;
  double w_local = 1.0;
  double w_z = 1.0;
  double w_proj = 1.0;

  void validate() const;
};

struct LossOptions {
  double delta = 1.0;        // smooth L1 transition point
  bool point_grads = false;  // also differentiate w.r.t. the local points
};

// Smooth L1 value and derivative: 0.5 x^2/delta inside |x| < delta,
// |x| - 0.5 delta outside; C1 at the junction.
struct SmoothL1 {
  double value = 0.0;
  double deriv = 0.0;
};
SmoothL1 smooth_l1(double x, double delta = 1.0);

// A loss term with its gradient with respect to the pose variables: the
// translation T (rows y and z are the (dt_y, dt_z) offsets) and the frame
// rotation angle alpha_h. Point gradients are filled only when requested.
struct LossTerm {
  double value = 0.0;
  Vec3 d_t = Vec3::Zero();
  double d_alpha_h = 0.0;
  std::vector<Vec3> d_points;
};

struct CentroidLoss {
  double value = 0.0;
  Vec2 d_pred = Vec2::Zero();
};
// Smooth L1 per component of (pred - target), summed; pred/target are the
// (dt_y, dt_z) regression values.
CentroidLoss centroid_loss(const Vec2& pred_offsets, const Vec2& target_offsets,
                           double delta = 1.0);

struct OrientationLoss {
  double value = 0.0;
  double classification = 0.0;
  double regression = 0.0;
  std::vector<double> d_logits;
  std::vector<double> d_residuals;
};
// Softmax cross entropy over the angle bins plus smooth L1 on the target
// bin's residual only.
OrientationLoss orientation_loss(const std::vector<double>& logits,
                                 const std::vector<double>& residuals,
                                 double target_beta, const AngleBinCodec& codec,
                                 double delta = 1.0);

struct DimensionLoss {
  double value = 0.0;
  Vec3 d_pred = Vec3::Zero();
};
// Smooth L1 per axis on the offsets from class mean dimensions; equals the
// direct pred-vs-target loss for any mean.
DimensionLoss dimension_loss(const Vec3& pred_dims, const Vec3& class_mean_dims,
                             const Vec3& target_dims, double delta = 1.0);
DimensionLoss dimension_loss_direct(const Vec3& pred_dims,
                                    const Vec3& target_dims,
                                    double delta = 1.0);

// Mean smooth L1 over the three channels of all valid cells (divides by 3K).
// Masks must match cell for cell.
LossTerm local_pc_loss(const InstanceGrid& pred_local,
                       const InstanceGrid& gt_local,
                       const LossOptions& opts = {});

// Transforms the local grid with t and penalizes the z channel against the
// scene depth sampled at the instance (mean over K valid cells).
LossTerm z_loss(const InstanceGrid& pred_local, const FrameTransform& t,
                const std::vector<double>& gt_depth,
                const LossOptions& opts = {});

// Projection alignment: H = project(camera, T_CO * p) per valid cell,
// residual (G - H) normalized by the 2D box width/height, smooth L1 per
// component, mean over K valid cells.
LossTerm projection_loss(const InstanceGrid& pred_local,
                         const FrameTransform& t, const CameraModel& camera,
                         const Box2D& box, const LossOptions& opts = {});

struct LossReport {
  double total = 0.0;
  std::map<std::string, double> terms;
  // gradient with respect to (dt_y, dt_z, alpha_h)
  Vec3 gradient = Vec3::Zero();

  std::string to_text() const;
};

// Weighted sum per the multi-task objective; the reconstruction-consistency
// part combines the local, z and projection terms.
LossReport total_loss(double centroid, double orientation, double dimension,
                      const LossTerm& local, const LossTerm& z,
                      const LossTerm& proj, const LossWeights& weights);

}  // namespace mono3d
