#include "mono3d/viz.hpp"

#include "mono3d/camera.hpp"
#include "mono3d/eval.hpp"

#include <sstream>

namespace mono3d {

namespace {

constexpr int kBevWidth = 360;
constexpr double kBevHalfX = 40.0;  // meters left/right
constexpr double kBevMaxZ = 100.0;  // meters forward

void svg_header(std::ostringstream& out, int width, int height) {
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << ' '
      << height << "\">\n";
}

void draw_polyline(std::ostringstream& out, const std::vector<Vec2>& pts,
                   const char* color, bool close) {
  if (pts.size() < 2) return;
  out << "<polyline fill=\"none\" stroke=\"" << color
      << "\" stroke-width=\"1\" points=\"";
  char buf[48];
  for (const Vec2& p : pts) {
    std::snprintf(buf, sizeof(buf), "%.1f,%.1f ", p.x(), p.y());
    out << buf;
  }
  if (close) {
    std::snprintf(buf, sizeof(buf), "%.1f,%.1f", pts[0].x(), pts[0].y());
    out << buf;
  }
  out << "\"/>\n";
}

// Image-plane wireframe: the four vertical edges plus top and bottom faces.
void draw_box_wireframe(std::ostringstream& out, const CameraModel& camera,
                        const Box3D& box, const char* color, double off_x) {
  const auto corners = box.corners();  // index bit layout: x(4) y(2) z(1)
  const int bottom[4] = {2, 3, 7, 6};  // y = +d_y/2 ring
  const int top[4] = {0, 1, 5, 4};
  std::vector<Vec2> ring;
  const auto px = [&](int idx) {
    Vec2 p = project(camera, corners[static_cast<size_t>(idx)]);
    return Vec2(p.x() + off_x, p.y());
  };
  for (int idx : bottom) ring.push_back(px(idx));
  draw_polyline(out, ring, color, true);
  ring.clear();
  for (int idx : top) ring.push_back(px(idx));
  draw_polyline(out, ring, color, true);
  for (int k = 0; k < 4; ++k) {
    draw_polyline(out, {px(top[k]), px(bottom[k])}, color, false);
  }
}

Vec2 bev_to_px(const Vec2& xz, double off_x, int panel_height) {
  const double px = off_x + (xz.x() + kBevHalfX) / (2.0 * kBevHalfX) * kBevWidth;
  const double py = panel_height - xz.y() / kBevMaxZ * panel_height;
  return {px, py};
}

void draw_bev_box(std::ostringstream& out, const Box3D& box, const char* color,
                  double off_x, int panel_height) {
  std::vector<Vec2> pts;
  for (const Vec2& c : bev_corners(box)) {
    pts.push_back(bev_to_px(c, off_x, panel_height));
  }
  draw_polyline(out, pts, color, true);
}

}  // namespace

std::string render_frame_svg(const CameraModel& camera, const ImageMeta& meta,
                             const std::vector<LabeledObject>& ground_truth,
                             const std::vector<Detection>& detections,
                             const std::vector<InstanceGrid>& grids) {
  const int panel_h = std::max(meta.height, 240);
  const int width = meta.width + kBevWidth + 30;
  std::ostringstream out;
  svg_header(out, width, panel_h + 20);

  out << "<rect x=\"0\" y=\"0\" width=\"" << meta.width << "\" height=\""
      << meta.height << "\" fill=\"#101018\"/>\n";
  const double bev_off = meta.width + 30;
  out << "<rect x=\"" << bev_off << "\" y=\"0\" width=\"" << kBevWidth
      << "\" height=\"" << panel_h << "\" fill=\"#f4f4f4\"/>\n";
  // BEV axes: camera at bottom center
  draw_polyline(out,
                {Vec2(bev_off + kBevWidth / 2.0, panel_h),
                 Vec2(bev_off + kBevWidth / 2.0, 0.0)},
                "#c0c0c0", false);

  for (const auto& gt : ground_truth) {
    draw_box_wireframe(out, camera, gt.box3d, "red", 0.0);
    draw_bev_box(out, gt.box3d, "red", bev_off, panel_h);
  }
  for (const auto& det : detections) {
    draw_box_wireframe(out, camera, det.box3d, "green", 0.0);
    draw_bev_box(out, det.box3d, "green", bev_off, panel_h);
  }
  char buf[96];
  for (const auto& grid : grids) {
    if (grid.frame != GridFrame::camera) continue;
    for (size_t k = 0; k < grid.cell_count(); ++k) {
      if (!grid.mask[k]) continue;
      const Vec2 bp =
          bev_to_px(Vec2(grid.points[k].x(), grid.points[k].z()), bev_off,
                    panel_h);
      std::snprintf(buf, sizeof(buf),
                    "<circle cx=\"%.1f\" cy=\"%.1f\" r=\"0.6\" fill=\"#3070ff\"/>\n",
                    bp.x(), bp.y());
      out << buf;
      std::snprintf(buf, sizeof(buf),
                    "<circle cx=\"%.1f\" cy=\"%.1f\" r=\"0.4\" fill=\"#3070ff\"/>\n",
                    grid.expected_px[k].x(), grid.expected_px[k].y());
      out << buf;
    }
  }
  out << "</svg>\n";
  return out.str();
}

std::string render_pr_svg(const PRCurve& curve, const std::string& title) {
  const int w = 420, h = 320, m = 40;
  std::ostringstream out;
  svg_header(out, w, h);
  out << "<rect x=\"0\" y=\"0\" width=\"" << w << "\" height=\"" << h
      << "\" fill=\"white\"/>\n";
  draw_polyline(out, {Vec2(m, h - m), Vec2(w - m, h - m)}, "black", false);
  draw_polyline(out, {Vec2(m, h - m), Vec2(m, m)}, "black", false);
  out << "<text x=\"" << m << "\" y=\"" << m - 16
      << "\" font-size=\"12\" font-family=\"monospace\">" << title << "</text>\n";
  char buf[96];
  std::snprintf(buf, sizeof(buf),
                "<text x=\"%d\" y=\"%d\" font-size=\"12\" "
                "font-family=\"monospace\">AP %.2f</text>\n",
                m, m, curve.ap);
  out << buf;
  std::vector<Vec2> pts;
  pts.emplace_back(m, h - m);
  for (const Vec2& s : curve.samples) {
    pts.emplace_back(m + s.x() * (w - 2 * m), h - m - s.y() * (h - 2 * m));
  }
  draw_polyline(out, pts, "#2060d0", false);
  out << "</svg>\n";
  return out.str();
}

}  // namespace mono3d
