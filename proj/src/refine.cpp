#include "mono3d/refine.hpp"

#include "mono3d/frames.hpp"

#include <sstream>

namespace mono3d {

void OptimizerConfig::validate() const {
  if (max_iters < 0 || !(step_init > 0.0) || !(backtrack > 0.0) ||
      !(backtrack < 1.0) || !(grad_tol >= 0.0) || !(max_offset > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "bad optimizer configuration");
  }
}

std::string trace_to_text(const std::vector<TraceEntry>& trace) {
  std::ostringstream out;
  out << "# iter loss dt_y dt_z step\n";
  char buf[160];
  for (const auto& e : trace) {
    std::snprintf(buf, sizeof(buf), "%d %.12g %.9g %.9g %.3g\n", e.iter,
                  e.loss, e.dt_y, e.dt_z, e.step);
    out << buf;
  }
  return out.str();
}

double recover_tx(const CameraModel& camera, const Box2D& box, double t_z) {
  return backproject(camera, box.center(), t_z).x();
}

namespace {

constexpr double kMinDepth = 0.1;
constexpr double kArmijo = 1e-4;

struct Objective {
  const Proposal& proposal;
  const InstanceGrid& grid;
  const std::vector<double>& gt_depth;
  const CameraModel& camera;
  double w_z;
  double w_proj;
  double alpha_h;
  double ray_x0;     // t_x = ray_x0 + ray_slope * t_z
  double ray_slope;

  Vec3 centroid(const Vec2& dt) const {
    const double t_z = proposal.p.z() + dt.y();
    return {ray_x0 + ray_slope * t_z, proposal.p.y() + dt.x(), t_z};
  }

  // Loss and gradient w.r.t. (dt_y, dt_z); t_x is chained through the ray.
  double eval(const Vec2& dt, Vec2* grad) const {
    const FrameTransform t = build_T_CO(centroid(dt), alpha_h);
    double loss = 0.0;
    Vec3 g_t = Vec3::Zero();
    if (w_z > 0.0) {
      const LossTerm term = z_loss(grid, t, gt_depth);
      loss += w_z * term.value;
      g_t += w_z * term.d_t;
    }
    if (w_proj > 0.0) {
      const LossTerm term = projection_loss(grid, t, camera, proposal.box);
      loss += w_proj * term.value;
      g_t += w_proj * term.d_t;
    }
    if (grad) {
      (*grad)[0] = g_t.y();
      (*grad)[1] = g_t.z() + g_t.x() * ray_slope;
    }
    return loss;
  }
};

}  // namespace

RefineResult refine_pose(const Proposal& proposal,
                         const InstanceGrid& local_grid,
                         const std::vector<double>& gt_depth,
                         const CameraModel& camera, const LossWeights& weights,
                         const OptimizerConfig& cfg) {
  cfg.validate();
  if (local_grid.frame != GridFrame::local) {
    throw Error(ErrorCode::frame_mismatch, "refinement grid must be local");
  }
  if (!(proposal.p.z() > 0.0)) {
    throw Error(ErrorCode::non_positive_depth, "proposal depth must be positive");
  }
  const bool use_z = weights.w_z > 0.0 && !gt_depth.empty();
  const double w_proj = weights.w_proj;
  if (!use_z && !(w_proj > 0.0)) {
    throw Error(ErrorCode::invalid_argument,
                "refinement needs a z or projection term");
  }

  const Vec3 r1 = backproject(camera, proposal.box.center(), 1.0);
  const Vec3 r2 = backproject(camera, proposal.box.center(), 2.0);
  Objective obj{proposal,
                local_grid,
                gt_depth,
                camera,
                use_z ? weights.w_z : 0.0,
                w_proj,
                std::atan2(r1.x(), r1.z()),
                2.0 * r1.x() - r2.x(),
                r2.x() - r1.x()};

  const auto clamp_dt = [&](Vec2 dt) {
    dt.x() = std::clamp(dt.x(), -cfg.max_offset, cfg.max_offset);
    const double lo = std::max(-cfg.max_offset, kMinDepth - proposal.p.z());
    dt.y() = std::clamp(dt.y(), lo, cfg.max_offset);
    return dt;
  };

  RefineResult result;
  Vec2 dt = clamp_dt(Vec2::Zero());
  Vec2 grad;
  double loss = obj.eval(dt, &grad);
  if (!std::isfinite(loss) || !grad.allFinite()) {
    throw Error(ErrorCode::diverged_non_finite,
                "non-finite loss at the starting point");
  }
  result.trace.push_back({0, loss, dt.x(), dt.y(), 0.0});

  double step = cfg.step_init;
  if (grad.norm() <= cfg.grad_tol) {
    result.converged_at_start = true;
  } else {
    for (int iter = 1; iter <= cfg.max_iters; ++iter) {
      Vec2 next;
      double next_loss = loss;
      bool accepted = false;
      while (step > 1e-16) {
        next = clamp_dt(dt - step * grad);
        next_loss = obj.eval(next, nullptr);
        if (!std::isfinite(next_loss)) {
          throw Error(ErrorCode::diverged_non_finite,
                      "loss became non-finite during line search");
        }
        const double predicted = grad.dot(dt - next);  // >= 0 after clamping
        if (next_loss <= loss - kArmijo * predicted && next_loss <= loss) {
          accepted = true;
          break;
        }
        step *= cfg.backtrack;
      }
      if (!accepted) break;  // no feasible descent step left

      const double prev_loss = loss;
      dt = next;
      loss = obj.eval(dt, &grad);
      if (!std::isfinite(loss) || !grad.allFinite()) {
        throw Error(ErrorCode::diverged_non_finite, "non-finite gradient");
      }
      result.trace.push_back({iter, loss, dt.x(), dt.y(), step});
      if (grad.norm() <= cfg.grad_tol) break;
      if (cfg.loss_tol > 0.0 &&
          std::abs(prev_loss - loss) <= cfg.loss_tol * std::max(1.0, prev_loss)) {
        break;
      }
      step = std::min(step * 2.0, 1e6);  // allow the line search to regrow
    }
  }

  result.offsets = {dt.x(), dt.y()};
  result.final_loss = loss;
  result.final_gradient = Vec3(grad.x(), grad.y(), 0.0);

  Box3D refined;
  refined.label = proposal.box.label;
  refined.t = obj.centroid(dt);
  refined.dims = proposal.dims;
  refined.yaw = normalize_angle(
      proposal.beta - std::atan2(refined.t.x(), refined.t.z()));
  result.refined = refined;
  return result;
}

RefineResult propose_and_refine(const CameraModel& camera, const Box2D& box,
                                const Vec3& dims, double beta,
                                const InstanceGrid& local_grid,
                                const std::vector<double>& gt_depth,
                                const LossWeights& weights,
                                const OptimizerConfig& cfg) {
  const Proposal proposal = make_proposal(camera, box, dims, beta);
  return refine_pose(proposal, local_grid, gt_depth, camera, weights, cfg);
}

}  // namespace mono3d
