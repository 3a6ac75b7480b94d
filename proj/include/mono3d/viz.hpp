#pragma once

#include "mono3d/eval.hpp"
#include "mono3d/instance_grid.hpp"
#include "mono3d/kitti_io.hpp"
#include "mono3d/types.hpp"

namespace mono3d {

// Static SVG with the image-plane view (projected 3D wireframes) on the left
// and a bird's-eye-view panel on the right. Ground truth is drawn red,
// detections green; instance grid points, when given, are drawn as dots.
std::string render_frame_svg(const CameraModel& camera, const ImageMeta& meta,
                             const std::vector<LabeledObject>& ground_truth,
                             const std::vector<Detection>& detections,
                             const std::vector<InstanceGrid>& grids = {});

std::string render_pr_svg(const PRCurve& curve, const std::string& title);

}  // namespace mono3d
