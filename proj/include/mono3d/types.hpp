#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace mono3d {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Mat34 = Eigen::Matrix<double, 3, 4>;

// Error codes shared with the C API (values are part of the ABI, do not
// renumber).
enum class ErrorCode : int {
  ok = 0,
  missing_key = 1,
  malformed_number = 2,
  malformed_line = 3,
  unsupported_format = 4,
  behind_camera = 5,
  non_positive_depth = 6,
  degenerate_box = 7,
  frame_mismatch = 8,
  mask_mismatch = 9,
  dimension_mismatch = 10,
  empty_depth = 11,
  empty_instance = 12,
  point_behind_camera = 13,
  non_finite_term = 14,
  diverged_non_finite = 15,
  placement_failure = 16,
  empty_set = 17,
  id_mismatch = 18,
  io_error = 19,
  invalid_argument = 20,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

// Normalizes an angle to (-pi, pi].
inline double normalize_angle(double a) {
  a = std::fmod(a, 2.0 * M_PI);
  if (a <= -M_PI) a += 2.0 * M_PI;
  if (a > M_PI) a -= 2.0 * M_PI;
  return a;
}

struct ImageMeta {
  int width = 0;
  int height = 0;
  std::string frame_id;
};

// Pinhole camera described by a 3x4 projection matrix in pixel units.
// Row 2 of P must be (0, 0, 1, p23); the baseline-induced translation terms
// bx, by are derived as bx = P(0,3) / -fu, by = P(1,3) / -fv.
class CameraModel {
 public:
  static CameraModel from_matrix(const Mat34& P);
  static CameraModel pinhole(double fu, double fv, double cu, double cv,
                             double bx = 0.0, double by = 0.0);

  const Mat34& P() const { return P_; }
  double fu() const { return fu_; }
  double fv() const { return fv_; }
  double cu() const { return cu_; }
  double cv() const { return cv_; }
  double bx() const { return bx_; }
  double by() const { return by_; }

 private:
  explicit CameraModel(const Mat34& P);

  Mat34 P_;
  double fu_ = 0, fv_ = 0, cu_ = 0, cv_ = 0, bx_ = 0, by_ = 0;
};

// Axis-aligned pixel-space box. u grows right, v grows down.
struct Box2D {
  double u1 = 0, v1 = 0, u2 = 0, v2 = 0;
  double score = 1.0;
  std::string label;

  double width() const { return u2 - u1; }
  double height() const { return v2 - v1; }
  Vec2 center() const { return {0.5 * (u1 + u2), 0.5 * (v1 + v2)}; }
  bool valid() const { return u2 > u1 && v2 > v1; }
};

// Amodal oriented 3D box in camera coordinates (x right, y down, z forward).
// The stored translation is the geometric centroid; dims = (d_x, d_y, d_z)
// with d_y the height; yaw rotates about the camera y axis. Pitch and roll
// are identically zero.
struct Box3D {
  std::string label;
  Vec3 t = Vec3::Zero();
  Vec3 dims = Vec3::Zero();
  double yaw = 0.0;
  double truncation = 0.0;
  int occlusion = 0;

  bool valid() const {
    return dims.x() > 0 && dims.y() > 0 && dims.z() > 0 && t.z() > 0;
  }
  double volume() const { return dims.x() * dims.y() * dims.z(); }
  // Observation angle through the centroid ray: yaw + atan2(t_x, t_z).
  double beta() const { return normalize_angle(yaw + std::atan2(t.x(), t.z())); }
  // Corners in camera frame, yaw applied about y through the centroid.
  std::vector<Vec3> corners() const;
};

// Dense or sparse per-pixel depth in meters. Values <= 0 mark invalid pixels.
struct DepthMap {
  int width = 0;
  int height = 0;
  std::vector<double> z;

  DepthMap() = default;
  DepthMap(int w, int h, double fill = 0.0)
      : width(w), height(h), z(static_cast<size_t>(w) * h, fill) {}

  double at(int u, int v) const { return z[static_cast<size_t>(v) * width + u]; }
  double& at(int u, int v) { return z[static_cast<size_t>(v) * width + u]; }
  bool valid(int u, int v) const { return at(u, v) > 0.0; }
  bool in_bounds(int u, int v) const {
    return u >= 0 && u < width && v >= 0 && v < height;
  }
};

// Initial 3D centroid estimate derived from a 2D box (Proposal Generation).
struct Proposal {
  Vec3 p = Vec3::Zero();   // (p_x, p_y, p_z), camera frame, meters
  Box2D box;               // source 2D box
  double beta = 0.0;       // observation angle
  Vec3 dims = Vec3::Zero();
  double theta = 0.0;      // beta - alpha_h of the box center ray
};

// Translation residuals recovered by refinement.
struct RefinementOffsets {
  double dt_y = 0.0;
  double dt_z = 0.0;
};

}  // namespace mono3d
