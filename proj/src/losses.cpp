#include "mono3d/losses.hpp"

#include <sstream>

namespace mono3d {

void LossWeights::validate() const {
  const double ws[] = {w_t, w_theta, w_dim, w_local, w_z, w_proj};
  double sum = 0.0;
  for (double w : ws) {
    if (!(w >= 0.0)) {
      throw Error(ErrorCode::invalid_argument,
                  "loss weights must be nonnegative");
    }
    sum += w;
  }
  if (!(sum > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "all loss weights are zero");
  }
}

SmoothL1 smooth_l1(double x, double delta) {
  if (!(delta > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "smooth L1 delta must be positive");
  }
  SmoothL1 r;
  if (std::abs(x) < delta) {
    r.value = 0.5 * x * x / delta;
    r.deriv = x / delta;
  } else {
    r.value = std::abs(x) - 0.5 * delta;
    r.deriv = x > 0 ? 1.0 : -1.0;
  }
  return r;
}

CentroidLoss centroid_loss(const Vec2& pred_offsets, const Vec2& target_offsets,
                           double delta) {
  CentroidLoss out;
  for (int i = 0; i < 2; ++i) {
    const SmoothL1 r = smooth_l1(pred_offsets[i] - target_offsets[i], delta);
    out.value += r.value;
    out.d_pred[i] = r.deriv;
  }
  return out;
}

OrientationLoss orientation_loss(const std::vector<double>& logits,
                                 const std::vector<double>& residuals,
                                 double target_beta, const AngleBinCodec& codec,
                                 double delta) {
  const size_t n = static_cast<size_t>(codec.num_bins());
  if (logits.size() != n || residuals.size() != n) {
    throw Error(ErrorCode::dimension_mismatch,
                "logits/residuals length must equal the bin count");
  }
  const auto target = codec.encode(target_beta);

  OrientationLoss out;
  out.d_logits.resize(n);
  out.d_residuals.assign(n, 0.0);

  double maxl = logits[0];
  for (double l : logits) maxl = std::max(maxl, l);
  double sum = 0.0;
  for (double l : logits) sum += std::exp(l - maxl);
  const double lse = maxl + std::log(sum);
  out.classification = lse - logits[static_cast<size_t>(target.bin)];
  for (size_t i = 0; i < n; ++i) {
    out.d_logits[i] = std::exp(logits[i] - lse) -
                      (i == static_cast<size_t>(target.bin) ? 1.0 : 0.0);
  }

  const SmoothL1 reg = smooth_l1(
      residuals[static_cast<size_t>(target.bin)] - target.residual, delta);
  out.regression = reg.value;
  out.d_residuals[static_cast<size_t>(target.bin)] = reg.deriv;

  out.value = out.classification + out.regression;
  return out;
}

DimensionLoss dimension_loss(const Vec3& pred_dims, const Vec3& class_mean_dims,
                             const Vec3& target_dims, double delta) {
  if (!(class_mean_dims.minCoeff() > 0.0)) {
    throw Error(ErrorCode::invalid_argument,
                "class mean dimensions must be positive");
  }
  DimensionLoss out;
  for (int i = 0; i < 3; ++i) {
    const double pred_off = pred_dims[i] - class_mean_dims[i];
    const double target_off = target_dims[i] - class_mean_dims[i];
    const SmoothL1 r = smooth_l1(pred_off - target_off, delta);
    out.value += r.value;
    out.d_pred[i] = r.deriv;
  }
  return out;
}

DimensionLoss dimension_loss_direct(const Vec3& pred_dims,
                                    const Vec3& target_dims, double delta) {
  DimensionLoss out;
  for (int i = 0; i < 3; ++i) {
    const SmoothL1 r = smooth_l1(pred_dims[i] - target_dims[i], delta);
    out.value += r.value;
    out.d_pred[i] = r.deriv;
  }
  return out;
}

namespace {

void require_local(const InstanceGrid& grid) {
  if (grid.frame != GridFrame::local) {
    throw Error(ErrorCode::frame_mismatch, "grid must be in the local frame");
  }
}

}  // namespace

LossTerm local_pc_loss(const InstanceGrid& pred_local,
                       const InstanceGrid& gt_local, const LossOptions& opts) {
  require_local(pred_local);
  require_local(gt_local);
  if (pred_local.rows != gt_local.rows || pred_local.cols != gt_local.cols ||
      pred_local.mask != gt_local.mask) {
    throw Error(ErrorCode::mask_mismatch,
                "prediction and ground truth masks differ");
  }
  LossTerm out;
  if (opts.point_grads) out.d_points.assign(pred_local.cell_count(), Vec3::Zero());
  size_t K = 0;
  for (size_t k = 0; k < pred_local.cell_count(); ++k) {
    if (!pred_local.mask[k]) continue;
    ++K;
    for (int c = 0; c < 3; ++c) {
      const SmoothL1 r =
          smooth_l1(pred_local.points[k][c] - gt_local.points[k][c], opts.delta);
      out.value += r.value;
      if (opts.point_grads) out.d_points[k][c] = r.deriv;
    }
  }
  if (K == 0) {
    throw Error(ErrorCode::empty_instance, "no valid cells");
  }
  const double norm = 1.0 / (3.0 * static_cast<double>(K));
  out.value *= norm;
  if (opts.point_grads) {
    for (auto& g : out.d_points) g *= norm;
  }
  return out;
}

LossTerm z_loss(const InstanceGrid& pred_local, const FrameTransform& t,
                const std::vector<double>& gt_depth, const LossOptions& opts) {
  require_local(pred_local);
  if (gt_depth.size() != pred_local.cell_count()) {
    throw Error(ErrorCode::dimension_mismatch,
                "depth grid size does not match the instance grid");
  }
  const double c = std::cos(t.alpha_h), s = std::sin(t.alpha_h);
  LossTerm out;
  if (opts.point_grads) out.d_points.assign(pred_local.cell_count(), Vec3::Zero());
  size_t K = 0;
  for (size_t k = 0; k < pred_local.cell_count(); ++k) {
    if (!pred_local.mask[k]) continue;
    ++K;
    const Vec3& p = pred_local.points[k];
    const double z_cam = -s * p.x() + c * p.z() + t.T.z();
    const SmoothL1 r = smooth_l1(z_cam - gt_depth[k], opts.delta);
    out.value += r.value;
    out.d_t.z() += r.deriv;
    out.d_alpha_h += r.deriv * (-c * p.x() - s * p.z());
    if (opts.point_grads) out.d_points[k] = r.deriv * Vec3(-s, 0.0, c);
  }
  if (K == 0) {
    throw Error(ErrorCode::empty_instance, "no valid cells");
  }
  const double norm = 1.0 / static_cast<double>(K);
  out.value *= norm;
  out.d_t *= norm;
  out.d_alpha_h *= norm;
  if (opts.point_grads) {
    for (auto& g : out.d_points) g *= norm;
  }
  return out;
}

LossTerm projection_loss(const InstanceGrid& pred_local,
                         const FrameTransform& t, const CameraModel& camera,
                         const Box2D& box, const LossOptions& opts) {
  require_local(pred_local);
  if (!box.valid()) {
    throw Error(ErrorCode::invalid_argument, "invalid 2D box");
  }
  const Mat34& P = camera.P();
  const double c = std::cos(t.alpha_h), s = std::sin(t.alpha_h);
  const double inv_bw = 1.0 / box.width();
  const double inv_bh = 1.0 / box.height();

  LossTerm out;
  if (opts.point_grads) out.d_points.assign(pred_local.cell_count(), Vec3::Zero());
  size_t K = 0;
  for (size_t k = 0; k < pred_local.cell_count(); ++k) {
    if (!pred_local.mask[k]) continue;
    ++K;
    const Vec3& p = pred_local.points[k];
    const Vec3 p_cam = t.to_camera(p);
    if (!(p_cam.z() > 1e-3)) {
      throw Error(ErrorCode::point_behind_camera,
                  "transformed point too close to the image plane");
    }
    const double w = p_cam.z() + P(2, 3);
    const double u = (P.row(0).head<3>().dot(p_cam) + P(0, 3)) / w;
    const double v = (P.row(1).head<3>().dot(p_cam) + P(1, 3)) / w;

    const Vec3 du_dp(P(0, 0) / w, P(0, 1) / w, (P(0, 2) - u) / w);
    const Vec3 dv_dp(P(1, 0) / w, P(1, 1) / w, (P(1, 2) - v) / w);

    const double e_u = (pred_local.expected_px[k].x() - u) * inv_bw;
    const double e_v = (pred_local.expected_px[k].y() - v) * inv_bh;
    const SmoothL1 ru = smooth_l1(e_u, opts.delta);
    const SmoothL1 rv = smooth_l1(e_v, opts.delta);
    out.value += ru.value + rv.value;

    const Vec3 g_pcam =
        -ru.deriv * inv_bw * du_dp - rv.deriv * inv_bh * dv_dp;
    out.d_t += g_pcam;
    const Vec3 dR_pO(c * p.z() - s * p.x(), 0.0, -c * p.x() - s * p.z());
    out.d_alpha_h += g_pcam.dot(dR_pO);
    if (opts.point_grads) out.d_points[k] = t.R.transpose() * g_pcam;
  }
  if (K == 0) {
    throw Error(ErrorCode::empty_instance, "no valid cells");
  }
  const double norm = 1.0 / static_cast<double>(K);
  out.value *= norm;
  out.d_t *= norm;
  out.d_alpha_h *= norm;
  if (opts.point_grads) {
    for (auto& g : out.d_points) g *= norm;
  }
  return out;
}

LossReport total_loss(double centroid, double orientation, double dimension,
                      const LossTerm& local, const LossTerm& z,
                      const LossTerm& proj, const LossWeights& weights) {
  weights.validate();
  LossReport report;
  report.terms["centroid"] = centroid;
  report.terms["orientation"] = orientation;
  report.terms["dimension"] = dimension;
  report.terms["local"] = local.value;
  report.terms["z"] = z.value;
  report.terms["projection"] = proj.value;
  report.total = weights.w_t * centroid + weights.w_theta * orientation +
                 weights.w_dim * dimension + weights.w_local * local.value +
                 weights.w_z * z.value + weights.w_proj * proj.value;
  if (!std::isfinite(report.total)) {
    throw Error(ErrorCode::non_finite_term, "non-finite loss term");
  }
  const Vec3 g = weights.w_local * Vec3(local.d_t.y(), local.d_t.z(), local.d_alpha_h) +
                 weights.w_z * Vec3(z.d_t.y(), z.d_t.z(), z.d_alpha_h) +
                 weights.w_proj * Vec3(proj.d_t.y(), proj.d_t.z(), proj.d_alpha_h);
  report.gradient = g;
  return report;
}

std::string LossReport::to_text() const {
  std::ostringstream out;
  char buf[96];
  std::snprintf(buf, sizeof(buf), "total %.12g\n", total);
  out << buf;
  for (const auto& [name, value] : terms) {
    std::snprintf(buf, sizeof(buf), "%s %.12g\n", name.c_str(), value);
    out << buf;
  }
  std::snprintf(buf, sizeof(buf), "grad_dt_y %.12g\ngrad_dt_z %.12g\ngrad_alpha_h %.12g\n",
                gradient.x(), gradient.y(), gradient.z());
  out << buf;
  return out.str();
}

}  // namespace mono3d
