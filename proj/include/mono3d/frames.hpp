#pragma once

#include "mono3d/instance_grid.hpp"
#include "mono3d/types.hpp"

namespace mono3d {

// Rigid object->camera transform: rotation about the camera y axis by the
// horizontal viewing angle, then translation by the object centroid.
// p_camera = R * p_local + T.
struct FrameTransform {
  Mat3 R = Mat3::Identity();
  Vec3 T = Vec3::Zero();
  double alpha_h = 0.0;

  Mat4 matrix() const {
    Mat4 m = Mat4::Identity();
    m.topLeftCorner<3, 3>() = R;
    m.topRightCorner<3, 1>() = T;
    return m;
  }
  Vec3 to_camera(const Vec3& p_local) const { return R * p_local + T; }
  Vec3 to_local(const Vec3& p_camera) const {
    return R.transpose() * (p_camera - T);
  }
};

// Rotation about +y by angle a: x' = cos(a) x + sin(a) z,
// z' = -sin(a) x + cos(a) z.
Mat3 rotation_about_y(double angle);

FrameTransform build_T_CO(const Vec3& centroid, double alpha_h);

// Transform every valid point of a local-frame grid into the camera frame.
// Mask and expected pixels are untouched. Throws FrameMismatch if the grid
// is not tagged local.
InstanceGrid local_to_camera(const InstanceGrid& grid, const FrameTransform& t);

// Exact inverse of local_to_camera.
InstanceGrid camera_to_local(const InstanceGrid& grid, const FrameTransform& t);

}  // namespace mono3d
