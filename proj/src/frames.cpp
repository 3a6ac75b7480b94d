#include "mono3d/frames.hpp"

namespace mono3d {

Mat3 rotation_about_y(double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  Mat3 R;
  R << c, 0, s,
       0, 1, 0,
      -s, 0, c;
  return R;
}

FrameTransform build_T_CO(const Vec3& centroid, double alpha_h) {
  if (!centroid.allFinite() || !std::isfinite(alpha_h)) {
    throw Error(ErrorCode::invalid_argument, "non-finite transform inputs");
  }
  FrameTransform t;
  t.R = rotation_about_y(alpha_h);
  t.T = centroid;
  t.alpha_h = alpha_h;
  return t;
}

namespace {

InstanceGrid transform_grid(const InstanceGrid& grid, const FrameTransform& t,
                            GridFrame expected, GridFrame target,
                            bool forward) {
  if (grid.frame != expected) {
    throw Error(ErrorCode::frame_mismatch,
                std::string("grid is not in the ") +
                    (expected == GridFrame::local ? "local" : "camera") +
                    " frame");
  }
  InstanceGrid out = grid;
  out.frame = target;
  for (size_t k = 0; k < grid.cell_count(); ++k) {
    if (!grid.mask[k]) continue;
    out.points[k] = forward ? t.to_camera(grid.points[k])
                            : t.to_local(grid.points[k]);
  }
  return out;
}

}  // namespace

InstanceGrid local_to_camera(const InstanceGrid& grid,
                             const FrameTransform& t) {
  return transform_grid(grid, t, GridFrame::local, GridFrame::camera, true);
}

InstanceGrid camera_to_local(const InstanceGrid& grid,
                             const FrameTransform& t) {
  return transform_grid(grid, t, GridFrame::camera, GridFrame::local, false);
}

}  // namespace mono3d
