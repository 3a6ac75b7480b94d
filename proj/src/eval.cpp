#include "mono3d/eval.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace mono3d {

std::vector<DifficultyFilter> DifficultyFilter::all() {
  return {easy(), moderate(), hard()};
}

namespace {

constexpr double kAreaEps = 1e-12;

double polygon_area(const std::vector<Vec2>& poly) {
  double twice = 0.0;
  const size_t n = poly.size();
  for (size_t i = 0; i < n; ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % n];
    twice += a.x() * b.y() - b.x() * a.y();
  }
  return 0.5 * std::abs(twice);
}

double edge_side(const Vec2& a, const Vec2& b, const Vec2& p) {
  return (b.x() - a.x()) * (p.y() - a.y()) - (b.y() - a.y()) * (p.x() - a.x());
}

Vec2 line_intersection(const Vec2& a, const Vec2& b, const Vec2& p,
                       const Vec2& q) {
  const Vec2 r = b - a;
  const Vec2 s = q - p;
  const double denom = r.x() * s.y() - r.y() * s.x();
  const double t = ((p.x() - a.x()) * s.y() - (p.y() - a.y()) * s.x()) / denom;
  return a + t * r;
}

}  // namespace

double convex_intersection_area(const std::vector<Vec2>& subject,
                                const std::vector<Vec2>& clip) {
  std::vector<Vec2> poly = subject;
  const size_t nc = clip.size();
  for (size_t e = 0; e < nc && !poly.empty(); ++e) {
    const Vec2& a = clip[e];
    const Vec2& b = clip[(e + 1) % nc];
    std::vector<Vec2> input;
    input.swap(poly);
    const size_t n = input.size();
    for (size_t i = 0; i < n; ++i) {
      const Vec2& cur = input[i];
      const Vec2& prev = input[(i + n - 1) % n];
      const bool cur_in = edge_side(a, b, cur) >= -kAreaEps;
      const bool prev_in = edge_side(a, b, prev) >= -kAreaEps;
      if (cur_in) {
        if (!prev_in) poly.push_back(line_intersection(a, b, prev, cur));
        poly.push_back(cur);
      } else if (prev_in) {
        poly.push_back(line_intersection(a, b, prev, cur));
      }
    }
  }
  if (poly.size() < 3) return 0.0;
  const double area = polygon_area(poly);
  return area <= kAreaEps ? 0.0 : area;
}

std::vector<Vec2> bev_corners(const Box3D& box) {
  const double c = std::cos(box.yaw), s = std::sin(box.yaw);
  const double hx = 0.5 * box.dims.x(), hz = 0.5 * box.dims.z();
  // counterclockwise in the (x, z) plane
  const double local[4][2] = {{hx, hz}, {-hx, hz}, {-hx, -hz}, {hx, -hz}};
  std::vector<Vec2> out;
  out.reserve(4);
  for (const auto& l : local) {
    out.emplace_back(box.t.x() + c * l[0] + s * l[1],
                     box.t.z() - s * l[0] + c * l[1]);
  }
  return out;
}

double bev_iou(const Box3D& a, const Box3D& b) {
  const double inter = convex_intersection_area(bev_corners(a), bev_corners(b));
  if (inter <= 0.0) return 0.0;
  const double area_a = a.dims.x() * a.dims.z();
  const double area_b = b.dims.x() * b.dims.z();
  const double uni = area_a + area_b - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

double iou_3d(const Box3D& a, const Box3D& b) {
  const double y_lo = std::max(a.t.y() - 0.5 * a.dims.y(),
                               b.t.y() - 0.5 * b.dims.y());
  const double y_hi = std::min(a.t.y() + 0.5 * a.dims.y(),
                               b.t.y() + 0.5 * b.dims.y());
  if (y_hi <= y_lo) return 0.0;
  const double inter_area =
      convex_intersection_area(bev_corners(a), bev_corners(b));
  if (inter_area <= 0.0) return 0.0;
  const double inter_vol = inter_area * (y_hi - y_lo);
  const double uni = a.volume() + b.volume() - inter_vol;
  return std::clamp(inter_vol / uni, 0.0, 1.0);
}

namespace {

double box2d_ioa(const Box2D& det, const Box2D& region) {
  const double iw = std::min(det.u2, region.u2) - std::max(det.u1, region.u1);
  const double ih = std::min(det.v2, region.v2) - std::max(det.v1, region.v1);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  return (iw * ih) / (det.width() * det.height());
}

}  // namespace

PRCurve average_precision(const std::vector<FrameDetections>& detections,
                          const std::vector<FrameGroundTruth>& ground_truth,
                          const std::string& class_name, const IoUFn& iou_fn,
                          double iou_threshold, const DifficultyFilter& filter,
                          int recall_points) {
  if (recall_points < 2) {
    throw Error(ErrorCode::invalid_argument, "need at least 2 recall points");
  }
  struct Scored {
    double score;
    bool tp;
  };
  std::vector<Scored> scored;
  size_t total_relevant = 0;

  for (const auto& gt_frame : ground_truth) {
    const FrameDetections* det_frame = nullptr;
    for (const auto& df : detections) {
      if (df.frame_id == gt_frame.frame_id) {
        det_frame = &df;
        break;
      }
    }

    std::vector<const LabeledObject*> relevant, ignored;
    for (const auto& obj : gt_frame.objects) {
      if (obj.box3d.label != class_name) continue;
      if (filter.passes(obj.box2d, obj.box3d)) {
        relevant.push_back(&obj);
      } else {
        ignored.push_back(&obj);
      }
    }
    total_relevant += relevant.size();
    if (!det_frame) continue;

    std::vector<const Detection*> dets;
    for (const auto& det : det_frame->detections) {
      if (det.box3d.label == class_name) dets.push_back(&det);
    }
    std::stable_sort(dets.begin(), dets.end(),
                     [](const Detection* a, const Detection* b) {
                       return a->score > b->score;
                     });

    std::vector<bool> matched(relevant.size(), false);
    for (const Detection* det : dets) {
      int best = -1;
      double best_iou = iou_threshold;
      for (size_t g = 0; g < relevant.size(); ++g) {
        if (matched[g]) continue;
        const double iou = iou_fn(det->box3d, relevant[g]->box3d);
        if (iou >= best_iou) {
          best_iou = iou;
          best = static_cast<int>(g);
        }
      }
      if (best >= 0) {
        matched[static_cast<size_t>(best)] = true;
        scored.push_back({det->score, true});
        continue;
      }
      bool ignore = false;
      for (const LabeledObject* obj : ignored) {
        if (iou_fn(det->box3d, obj->box3d) >= iou_threshold) {
          ignore = true;
          break;
        }
      }
      if (!ignore) {
        for (const Box2D& dc : gt_frame.dontcare) {
          if (box2d_ioa(det->box2d, dc) >= 0.5) {
            ignore = true;
            break;
          }
        }
      }
      if (!ignore) scored.push_back({det->score, false});
    }
  }

  PRCurve curve;
  if (total_relevant == 0 || scored.empty()) return curve;

  std::stable_sort(scored.begin(), scored.end(),
                   [](const Scored& a, const Scored& b) {
                     return a.score > b.score;
                   });
  size_t tp = 0, fp = 0;
  std::vector<Vec2> raw;
  raw.reserve(scored.size());
  for (const auto& s : scored) {
    s.tp ? ++tp : ++fp;
    const double recall = static_cast<double>(tp) / total_relevant;
    const double precision = static_cast<double>(tp) / (tp + fp);
    raw.emplace_back(recall, precision);
  }
  // Keep the completed precision at each recall level: the last sample of
  // every equal-recall run.
  for (size_t i = 0; i < raw.size(); ++i) {
    if (i + 1 == raw.size() || raw[i + 1].x() > raw[i].x()) {
      curve.samples.push_back(raw[i]);
    }
  }

  // 11-point style: recall levels include 0; the 40-point variant samples
  // (1/N ... 1] as in the newer benchmark protocol.
  double ap_sum = 0.0;
  for (int i = 0; i < recall_points; ++i) {
    const double r = recall_points == 11
                         ? i / 10.0
                         : (i + 1) / static_cast<double>(recall_points);
    double p = 0.0;
    for (const Vec2& s : curve.samples) {
      if (s.x() >= r - 1e-12) p = std::max(p, s.y());
    }
    ap_sum += p;
  }
  curve.ap = 100.0 * ap_sum / recall_points;
  return curve;
}

DepthErrorStats depth_error_stats(const std::vector<DepthPair>& pairs,
                                  const DifficultyFilter& filter) {
  std::vector<double> errors;
  for (const auto& p : pairs) {
    if (filter.passes(p.gt_box2d, p.gt_box3d)) {
      errors.push_back(std::abs(p.pred_z - p.gt_z));
    }
  }
  if (errors.empty()) {
    throw Error(ErrorCode::empty_set, "no pairs pass the difficulty filter");
  }
  DepthErrorStats stats;
  stats.count = errors.size();
  stats.mean_abs =
      std::accumulate(errors.begin(), errors.end(), 0.0) / errors.size();
  double var = 0.0;
  for (double e : errors) var += (e - stats.mean_abs) * (e - stats.mean_abs);
  stats.stddev = std::sqrt(var / errors.size());
  return stats;
}

std::string pr_curve_to_text(const PRCurve& curve) {
  std::ostringstream out;
  out << "# recall precision\n";
  char buf[64];
  for (const auto& s : curve.samples) {
    std::snprintf(buf, sizeof(buf), "%.6f %.6f\n", s.x(), s.y());
    out << buf;
  }
  std::snprintf(buf, sizeof(buf), "# AP %.2f\n", curve.ap);
  out << buf;
  return out.str();
}

}  // namespace mono3d
