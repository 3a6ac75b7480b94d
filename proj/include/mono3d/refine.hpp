#pragma once

#include "mono3d/camera.hpp"
#include "mono3d/instance_grid.hpp"
#include "mono3d/losses.hpp"
#include "mono3d/types.hpp"

namespace mono3d {

struct OptimizerConfig {
  int max_iters = 200;
  double step_init = 1.0;
  double backtrack = 0.5;   // step shrink factor in (0, 1)
  double grad_tol = 1e-8;
  double loss_tol = 0.0;    // relative loss-change stop; 0 disables
  double max_offset = 10.0; // bound on |dt_y|, |dt_z| in meters

  void validate() const;
};

struct TraceEntry {
  int iter = 0;
  double loss = 0.0;
  double dt_y = 0.0;
  double dt_z = 0.0;
  double step = 0.0;
};

std::string trace_to_text(const std::vector<TraceEntry>& trace);

struct RefineResult {
  RefinementOffsets offsets;
  Box3D refined;
  std::vector<TraceEntry> trace;
  bool converged_at_start = false;
  double final_loss = 0.0;
  Vec3 final_gradient = Vec3::Zero();  // (dt_y, dt_z, alpha_h)
};

// Lateral position from the ray through the 2D box center at depth t_z.
double recover_tx(const CameraModel& camera, const Box2D& box, double t_z);

// Minimizes w_z * z_loss + w_proj * projection_loss over (dt_y, dt_z) with
// backtracking-line-search gradient descent. The centroid stays on the
// 2D-box-center ray (t_x follows dt_z); alpha_h and the local grid are held
// fixed. Pass an empty gt_depth to run in projection-only mode (w_z is then
// ignored). The loss over accepted steps is non-increasing.
RefineResult refine_pose(const Proposal& proposal,
                         const InstanceGrid& local_grid,
                         const std::vector<double>& gt_depth,
                         const CameraModel& camera, const LossWeights& weights,
                         const OptimizerConfig& cfg);

// make_proposal followed by refine_pose; yaw is recovered as
// beta - alpha_h of the refined centroid ray.
RefineResult propose_and_refine(const CameraModel& camera, const Box2D& box,
                                const Vec3& dims, double beta,
                                const InstanceGrid& local_grid,
                                const std::vector<double>& gt_depth,
                                const LossWeights& weights,
                                const OptimizerConfig& cfg);

}  // namespace mono3d
