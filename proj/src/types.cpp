#include "mono3d/types.hpp"

namespace mono3d {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::ok: return "Ok";
    case ErrorCode::missing_key: return "MissingKey";
    case ErrorCode::malformed_number: return "MalformedNumber";
    case ErrorCode::malformed_line: return "MalformedLine";
    case ErrorCode::unsupported_format: return "UnsupportedFormat";
    case ErrorCode::behind_camera: return "BehindCamera";
    case ErrorCode::non_positive_depth: return "NonPositiveDepth";
    case ErrorCode::degenerate_box: return "DegenerateBox";
    case ErrorCode::frame_mismatch: return "FrameMismatch";
    case ErrorCode::mask_mismatch: return "MaskMismatch";
    case ErrorCode::dimension_mismatch: return "DimensionMismatch";
    case ErrorCode::empty_depth: return "EmptyDepth";
    case ErrorCode::empty_instance: return "EmptyInstance";
    case ErrorCode::point_behind_camera: return "PointBehindCamera";
    case ErrorCode::non_finite_term: return "NonFiniteTerm";
    case ErrorCode::diverged_non_finite: return "DivergedNonFinite";
    case ErrorCode::placement_failure: return "PlacementFailure";
    case ErrorCode::empty_set: return "EmptySet";
    case ErrorCode::id_mismatch: return "IdMismatch";
    case ErrorCode::io_error: return "IoError";
    case ErrorCode::invalid_argument: return "InvalidArgument";
  }
  return "Unknown";
}

CameraModel::CameraModel(const Mat34& P) : P_(P) {
  fu_ = P(0, 0);
  fv_ = P(1, 1);
  cu_ = P(0, 2);
  cv_ = P(1, 2);
  bx_ = P(0, 3) / -fu_;
  by_ = P(1, 3) / -fv_;
}

CameraModel CameraModel::from_matrix(const Mat34& P) {
  if (!(P(0, 0) > 0.0) || !(P(1, 1) > 0.0)) {
    throw Error(ErrorCode::invalid_argument,
                "camera focal lengths must be positive");
  }
  if (std::abs(P(2, 0)) > 1e-12 || std::abs(P(2, 1)) > 1e-12 ||
      std::abs(P(2, 2) - 1.0) > 1e-12 || !std::isfinite(P(2, 3))) {
    throw Error(ErrorCode::invalid_argument,
                "camera projection row 2 must be (0, 0, 1, finite)");
  }
  if (!P.allFinite()) {
    throw Error(ErrorCode::invalid_argument,
                "camera projection matrix must be finite");
  }
  return CameraModel(P);
}

CameraModel CameraModel::pinhole(double fu, double fv, double cu, double cv,
                                 double bx, double by) {
  Mat34 P = Mat34::Zero();
  P(0, 0) = fu;
  P(0, 2) = cu;
  P(0, 3) = -bx * fu;
  P(1, 1) = fv;
  P(1, 2) = cv;
  P(1, 3) = -by * fv;
  P(2, 2) = 1.0;
  return from_matrix(P);
}

std::vector<Vec3> Box3D::corners() const {
  const double c = std::cos(yaw), s = std::sin(yaw);
  std::vector<Vec3> out;
  out.reserve(8);
  for (int ix : {-1, 1}) {
    for (int iy : {-1, 1}) {
      for (int iz : {-1, 1}) {
        const double x = 0.5 * ix * dims.x();
        const double y = 0.5 * iy * dims.y();
        const double z = 0.5 * iz * dims.z();
        // rotation about +y: x' = c x + s z, z' = -s x + c z
        out.emplace_back(t.x() + c * x + s * z, t.y() + y,
                         t.z() - s * x + c * z);
      }
    }
  }
  return out;
}

}  // namespace mono3d
