#pragma once

#include "mono3d/types.hpp"

namespace mono3d {

struct LabeledObject {
  Box2D box2d;
  Box3D box3d;
};

struct LabelFile {
  std::vector<LabeledObject> objects;
  std::vector<Box2D> dontcare;
  // Data warnings (non-fatal), e.g. alpha disagreeing with yaw + alpha_h.
  std::vector<std::string> warnings;
};

// Parses a KITTI calibration file: the "P2:" line followed by 12
// whitespace-separated reals, row-major. Throws MissingKey if no P2 line
// exists and MalformedNumber on any other token count or unparseable token.
CameraModel parse_calib(const std::string& text);

// Writes the consumed subset of the calibration: a single P2 line with
// round-trippable precision.
std::string write_calib(const CameraModel& camera);

// Parses KITTI label/detection lines (15 fields, optional 16th score).
// KITTI stores the bottom-face center; the returned Box3D holds the
// geometric centroid (t_y shifted by -d_y/2). DontCare regions are returned
// separately as 2D boxes. Tolerance for the alpha-vs-(yaw + alpha_h)
// consistency warning accommodates the 2-decimal file quantization.
LabelFile parse_labels(const std::string& text,
                       double alpha_warn_tol = 2e-2);

struct Detection {
  Box2D box2d;
  Box3D box3d;
  double score = 1.0;
};

// KITTI 16-field detection lines, 2-decimal fixed point. The alpha field is
// recomputed as the observation angle of the 3D box. Re-parsing reproduces
// the boxes up to the 1e-2 rounding; a second write is byte-identical.
std::string write_detections(const std::vector<Detection>& detections);

// 15-field ground-truth label lines (no score column).
std::string write_labels(const std::vector<LabeledObject>& objects,
                         const std::vector<Box2D>& dontcare = {});

// KITTI depth-map convention: single-channel 16-bit PNG, meters = raw/256,
// raw 0 marks invalid pixels. Throws UnsupportedFormat for other bit depths
// or channel counts.
DepthMap read_depth_png(const std::vector<uint8_t>& bytes);
std::vector<uint8_t> write_depth_png(const DepthMap& depth);

DepthMap read_depth_png_file(const std::string& path);
void write_depth_png_file(const DepthMap& depth, const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace mono3d
