#include "mono3d/camera.hpp"

namespace mono3d {

Vec2 project(const CameraModel& camera, const Vec3& point) {
  if (!(point.z() > 1e-6)) {
    throw Error(ErrorCode::behind_camera, "point behind camera (z <= 1e-6)");
  }
  Eigen::Vector4d ph(point.x(), point.y(), point.z(), 1.0);
  const Vec3 h = camera.P() * ph;
  return {h.x() / h.z(), h.y() / h.z()};
}

Vec3 backproject(const CameraModel& camera, const Vec2& pixel, double z) {
  if (!(z > 0.0)) {
    throw Error(ErrorCode::non_positive_depth,
                "backprojection depth must be positive");
  }
  const Mat34& P = camera.P();
  const double w = z + P(2, 3);
  // Solve the 2x2 system [P00 P01; P10 P11] (x, y) = rhs for the given z.
  Eigen::Matrix2d A;
  A << P(0, 0), P(0, 1), P(1, 0), P(1, 1);
  Vec2 rhs(pixel.x() * w - P(0, 2) * z - P(0, 3),
           pixel.y() * w - P(1, 2) * z - P(1, 3));
  const Vec2 xy = A.inverse() * rhs;
  return {xy.x(), xy.y(), z};
}

ViewingAngles viewing_angles(const CameraModel& camera, const Box2D& box) {
  const Vec3 p = backproject(camera, box.center(), 1.0);
  return {std::atan2(p.x(), p.z()), std::atan2(p.y(), p.z())};
}

double proposal_depth(double f, double h, double h_hat) {
  if (!(f > 0.0) || !(h > 0.0)) {
    throw Error(ErrorCode::invalid_argument,
                "proposal_depth needs positive focal length and height");
  }
  if (h_hat < 1.0) {
    throw Error(ErrorCode::degenerate_box,
                "projected box height below one pixel");
  }
  return f * h / h_hat;
}

Proposal make_proposal(const CameraModel& camera, const Box2D& box,
                       const Vec3& dims, double beta) {
  Proposal prop;
  prop.box = box;
  prop.beta = normalize_angle(beta);
  prop.dims = dims;
  const double p_z = proposal_depth(camera.fv(), dims.y(), box.height());
  prop.p = backproject(camera, box.center(), p_z);
  prop.theta =
      normalize_angle(prop.beta - viewing_angles(camera, box).alpha_h);
  return prop;
}

AngleBinCodec::AngleBinCodec(int num_bins) : num_bins_(num_bins) {
  if (num_bins < 2) {
    throw Error(ErrorCode::invalid_argument, "need at least 2 angle bins");
  }
}

AngleBinCodec::Encoded AngleBinCodec::encode(double angle) const {
  const double a = normalize_angle(angle);
  const double w = bin_width();
  double shifted = std::fmod(a + 2.0 * M_PI, 2.0 * M_PI);  // [0, 2*pi)
  int bin = static_cast<int>(std::llround(shifted / w)) % num_bins_;
  Encoded enc;
  enc.bin = bin;
  enc.residual = normalize_angle(a - bin * w);
  return enc;
}

double AngleBinCodec::decode(int bin, double residual) const {
  return normalize_angle(bin * bin_width() + residual);
}

}  // namespace mono3d
