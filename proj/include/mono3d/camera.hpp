#pragma once

#include "mono3d/types.hpp"

namespace mono3d {

// Horizontal/vertical rotations between the camera principal axis and the
// ray through a 2D box center. Positive alpha_h looks right, positive
// alpha_v looks down (camera y axis points down).
struct ViewingAngles {
  double alpha_h = 0.0;
  double alpha_v = 0.0;
};

// Projects a camera-frame point to continuous pixel coordinates using the
// full 3x4 matrix (baseline terms included). Throws BehindCamera for
// z <= 1e-6.
Vec2 project(const CameraModel& camera, const Vec3& point);

// Inverse of project at a fixed depth z: returns the camera-frame point
// (x, y, z) whose projection is `pixel`. Throws NonPositiveDepth.
Vec3 backproject(const CameraModel& camera, const Vec2& pixel, double z);

// Viewing angles of the ray through the 2D box center (at unit depth).
ViewingAngles viewing_angles(const CameraModel& camera, const Box2D& box);

// Pinhole similar-triangles depth: f * h / h_hat. Throws DegenerateBox for
// projected heights below one pixel.
double proposal_depth(double f, double h, double h_hat);

// Full proposal: depth from the height relation (through fv, since h is a
// vertical extent), lateral/vertical location by re-projecting the box
// center at that depth, and yaw recovered as beta - alpha_h.
Proposal make_proposal(const CameraModel& camera, const Box2D& box,
                       const Vec3& dims, double beta);

// Discrete angle-bin encoding: bins of width 2*pi/num_bins centered at
// i * 2*pi/num_bins. decode(encode(a)) reproduces normalize_angle(a).
class AngleBinCodec {
 public:
  explicit AngleBinCodec(int num_bins = 12);

  int num_bins() const { return num_bins_; }
  double bin_width() const { return 2.0 * M_PI / num_bins_; }
  double bin_center(int bin) const {
    return normalize_angle(bin * bin_width());
  }

  struct Encoded {
    int bin = 0;
    double residual = 0.0;
  };
  Encoded encode(double angle) const;
  double decode(int bin, double residual) const;

 private:
  int num_bins_;
};

}  // namespace mono3d
