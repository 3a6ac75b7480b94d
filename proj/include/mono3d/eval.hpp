#pragma once

#include "mono3d/kitti_io.hpp"
#include "mono3d/types.hpp"

#include <functional>

namespace mono3d {

// KITTI-convention ground-truth filter. Thresholds follow the public
// benchmark difficulty definitions; they are external to this library's
// method and fully configurable.
struct DifficultyFilter {
  std::string name;
  double min_box_height = 0.0;  // pixels
  int max_occlusion = 3;
  double max_truncation = 1.0;

  bool passes(const Box2D& box2d, const Box3D& box3d) const {
    return box2d.height() >= min_box_height &&
           box3d.occlusion <= max_occlusion &&
           box3d.truncation <= max_truncation;
  }

  static DifficultyFilter easy() { return {"easy", 40.0, 0, 0.15}; }
  static DifficultyFilter moderate() { return {"moderate", 25.0, 1, 0.30}; }
  static DifficultyFilter hard() { return {"hard", 25.0, 2, 0.50}; }
  static std::vector<DifficultyFilter> all();
};

struct PRCurve {
  std::vector<Vec2> samples;  // (recall, precision), recall nondecreasing
  double ap = 0.0;            // reported x100
};

// IoU of the yaw-rotated box footprints in the x-z plane (convex polygon
// clipping).
double bev_iou(const Box3D& a, const Box3D& b);

// Full 3D IoU: BEV intersection area times vertical overlap along y.
double iou_3d(const Box3D& a, const Box3D& b);

// Convex polygon intersection area (Sutherland-Hodgman); exposed for tests.
double convex_intersection_area(const std::vector<Vec2>& subject,
                                const std::vector<Vec2>& clip);
std::vector<Vec2> bev_corners(const Box3D& box);

struct FrameDetections {
  std::string frame_id;
  std::vector<Detection> detections;
};

struct FrameGroundTruth {
  std::string frame_id;
  std::vector<LabeledObject> objects;
  std::vector<Box2D> dontcare;
};

using IoUFn = std::function<double(const Box3D&, const Box3D&)>;

// Score-descending greedy matching per frame with one detection per ground
// truth. Ground truths failing the filter (and detections matched to them)
// are ignored rather than counted; detections mostly inside DontCare regions
// are ignored too. Interpolated AP over uniformly spaced recall points (11
// by default, 40 behind the flag), reported x100.
PRCurve average_precision(const std::vector<FrameDetections>& detections,
                          const std::vector<FrameGroundTruth>& ground_truth,
                          const std::string& class_name, const IoUFn& iou_fn,
                          double iou_threshold, const DifficultyFilter& filter,
                          int recall_points = 11);

struct DepthErrorStats {
  double mean_abs = 0.0;
  double stddev = 0.0;  // population std of the absolute errors
  size_t count = 0;
};

struct DepthPair {
  double pred_z = 0.0;
  double gt_z = 0.0;
  Box2D gt_box2d;
  Box3D gt_box3d;
};

DepthErrorStats depth_error_stats(const std::vector<DepthPair>& pairs,
                                  const DifficultyFilter& filter);

std::string pr_curve_to_text(const PRCurve& curve);

}  // namespace mono3d
