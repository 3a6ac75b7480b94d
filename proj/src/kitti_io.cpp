#include "mono3d/kitti_io.hpp"

#include <png.h>

#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace mono3d {

namespace {

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream ss(line);
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

bool parse_double(const std::string& tok, double& out) {
  const char* begin = tok.data();
  const char* end = begin + tok.size();
  auto res = std::from_chars(begin, end, out);
  return res.ec == std::errc() && res.ptr == end && std::isfinite(out);
}

double field(const std::vector<std::string>& toks, size_t i, int line_no) {
  double v;
  if (!parse_double(toks[i], v)) {
    throw Error(ErrorCode::malformed_line,
                "line " + std::to_string(line_no) + ": bad number '" +
                    toks[i] + "'");
  }
  return v;
}

std::string format_fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace

CameraModel parse_calib(const std::string& text) {
  std::istringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    auto toks = split_ws(line);
    if (toks.empty() || toks[0] != "P2:") continue;
    if (toks.size() != 13) {
      throw Error(ErrorCode::malformed_number,
                  "P2 line has " + std::to_string(toks.size() - 1) +
                      " tokens, expected 12");
    }
    Mat34 P;
    for (int k = 0; k < 12; ++k) {
      double v;
      if (!parse_double(toks[1 + k], v)) {
        throw Error(ErrorCode::malformed_number,
                    "P2 token '" + toks[1 + k] + "' is not a number");
      }
      P(k / 4, k % 4) = v;
    }
    return CameraModel::from_matrix(P);
  }
  throw Error(ErrorCode::missing_key, "no P2 line in calibration text");
}

std::string write_calib(const CameraModel& camera) {
  std::ostringstream out;
  out << "P2:";
  char buf[64];
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 4; ++c) {
      std::snprintf(buf, sizeof(buf), " %.17g", camera.P()(r, c));
      out << buf;
    }
  }
  out << "\n";
  return out.str();
}

LabelFile parse_labels(const std::string& text, double alpha_warn_tol) {
  LabelFile out;
  std::istringstream ss(text);
  std::string line;
  int line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    auto toks = split_ws(line);
    if (toks.empty()) continue;
    if (toks.size() != 15 && toks.size() != 16) {
      throw Error(ErrorCode::malformed_line,
                  "line " + std::to_string(line_no) + ": " +
                      std::to_string(toks.size()) + " fields, expected 15 or 16");
    }
    Box2D box2d;
    box2d.label = toks[0];
    box2d.u1 = field(toks, 4, line_no);
    box2d.v1 = field(toks, 5, line_no);
    box2d.u2 = field(toks, 6, line_no);
    box2d.v2 = field(toks, 7, line_no);
    box2d.score = toks.size() == 16 ? field(toks, 15, line_no) : 1.0;
    if (!box2d.valid()) {
      throw Error(ErrorCode::malformed_line,
                  "line " + std::to_string(line_no) + ": degenerate 2D box");
    }
    if (box2d.label == "DontCare") {
      out.dontcare.push_back(box2d);
      continue;
    }

    LabeledObject obj;
    obj.box2d = box2d;
    obj.box3d.label = toks[0];
    obj.box3d.truncation = std::max(0.0, field(toks, 1, line_no));
    const double occ = field(toks, 2, line_no);
    obj.box3d.occlusion = occ < 0 ? 3 : static_cast<int>(std::lround(occ));
    const double alpha = field(toks, 3, line_no);
    const double h = field(toks, 8, line_no);
    const double w = field(toks, 9, line_no);
    const double l = field(toks, 10, line_no);
    obj.box3d.dims = Vec3(l, h, w);
    const double x = field(toks, 11, line_no);
    const double y = field(toks, 12, line_no);
    const double z = field(toks, 13, line_no);
    // KITTI stores the bottom-face center; keep the geometric centroid.
    obj.box3d.t = Vec3(x, y - 0.5 * h, z);
    obj.box3d.yaw = normalize_angle(field(toks, 14, line_no));
    if (!obj.box3d.valid() || obj.box3d.truncation > 1.0 ||
        obj.box3d.occlusion > 3) {
      throw Error(ErrorCode::malformed_line,
                  "line " + std::to_string(line_no) + ": invalid 3D box");
    }
    const double expected = obj.box3d.beta();
    const double da = std::abs(normalize_angle(alpha - expected));
    if (da > alpha_warn_tol) {
      char buf[160];
      std::snprintf(buf, sizeof(buf),
                    "line %d: alpha %.4f disagrees with yaw + alpha_h %.4f "
                    "(|diff| %.4f)",
                    line_no, alpha, expected, da);
      out.warnings.emplace_back(buf);
    }
    out.objects.push_back(std::move(obj));
  }
  return out;
}

namespace {

std::string format_object_fields(const Box2D& b2, const Box3D& b3) {
  std::ostringstream out;
  out << b3.label << ' ' << format_fixed2(b3.truncation) << ' '
      << b3.occlusion << ' ' << format_fixed2(b3.beta());
  for (double v : {b2.u1, b2.v1, b2.u2, b2.v2}) out << ' ' << format_fixed2(v);
  // dims as h w l, location as the bottom-face center
  out << ' ' << format_fixed2(b3.dims.y()) << ' ' << format_fixed2(b3.dims.z())
      << ' ' << format_fixed2(b3.dims.x());
  out << ' ' << format_fixed2(b3.t.x()) << ' '
      << format_fixed2(b3.t.y() + 0.5 * b3.dims.y()) << ' '
      << format_fixed2(b3.t.z()) << ' ' << format_fixed2(b3.yaw);
  return out.str();
}

}  // namespace

std::string write_detections(const std::vector<Detection>& detections) {
  std::ostringstream out;
  for (const auto& det : detections) {
    out << format_object_fields(det.box2d, det.box3d) << ' '
        << format_fixed2(det.score) << '\n';
  }
  return out.str();
}

std::string write_labels(const std::vector<LabeledObject>& objects,
                         const std::vector<Box2D>& dontcare) {
  std::ostringstream out;
  for (const auto& obj : objects) {
    out << format_object_fields(obj.box2d, obj.box3d) << '\n';
  }
  for (const auto& dc : dontcare) {
    out << "DontCare -1 -1 -10";
    for (double v : {dc.u1, dc.v1, dc.u2, dc.v2}) out << ' ' << format_fixed2(v);
    out << " -1 -1 -1 -1000 -1000 -1000 -10\n";
  }
  return out.str();
}

namespace {

struct MemReader {
  const uint8_t* data;
  size_t size;
  size_t pos;
};

void png_mem_read(png_structp png, png_bytep out, png_size_t n) {
  auto* r = static_cast<MemReader*>(png_get_io_ptr(png));
  if (r->pos + n > r->size) {
    png_error(png, "read past end of PNG buffer");
  }
  std::memcpy(out, r->data + r->pos, n);
  r->pos += n;
}

void png_mem_write(png_structp png, png_bytep data, png_size_t n) {
  auto* v = static_cast<std::vector<uint8_t>*>(png_get_io_ptr(png));
  v->insert(v->end(), data, data + n);
}

void png_mem_flush(png_structp) {}

}  // namespace

DepthMap read_depth_png(const std::vector<uint8_t>& bytes) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) {
    throw Error(ErrorCode::unsupported_format, "not a PNG stream");
  }
  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorCode::io_error, "libpng initialization failed");
  }

  MemReader reader{bytes.data(), bytes.size(), 0};
  std::vector<uint8_t> rowbuf;
  DepthMap depth;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorCode::unsupported_format, "corrupt PNG stream");
  }
  png_set_read_fn(png, &reader, png_mem_read);
  png_read_info(png, info);

  const png_uint_32 width = png_get_image_width(png, info);
  const png_uint_32 height = png_get_image_height(png, info);
  const int bit_depth = png_get_bit_depth(png, info);
  const int color_type = png_get_color_type(png, info);
  if (bit_depth != 16 || color_type != PNG_COLOR_TYPE_GRAY) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorCode::unsupported_format,
                "depth PNG must be 16-bit single-channel");
  }
  const int passes = png_set_interlace_handling(png);
  png_read_update_info(png, info);

  depth = DepthMap(static_cast<int>(width), static_cast<int>(height));
  rowbuf.resize(static_cast<size_t>(width) * 2);
  for (int pass = 0; pass < passes; ++pass) {
    for (png_uint_32 v = 0; v < height; ++v) {
      png_read_row(png, rowbuf.data(), nullptr);
      for (png_uint_32 u = 0; u < width; ++u) {
        const uint16_t raw = static_cast<uint16_t>(
            (rowbuf[2 * u] << 8) | rowbuf[2 * u + 1]);  // PNG is big-endian
        depth.at(static_cast<int>(u), static_cast<int>(v)) = raw / 256.0;
      }
    }
  }
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return depth;
}

std::vector<uint8_t> write_depth_png(const DepthMap& depth) {
  if (depth.width <= 0 || depth.height <= 0) {
    throw Error(ErrorCode::invalid_argument, "empty depth map");
  }
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorCode::io_error, "libpng initialization failed");
  }

  std::vector<uint8_t> out;
  std::vector<uint8_t> rowbuf(static_cast<size_t>(depth.width) * 2);

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorCode::io_error, "PNG encoding failed");
  }
  png_set_write_fn(png, &out, png_mem_write, png_mem_flush);
  png_set_IHDR(png, info, static_cast<png_uint_32>(depth.width),
               static_cast<png_uint_32>(depth.height), 16,
               PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int v = 0; v < depth.height; ++v) {
    for (int u = 0; u < depth.width; ++u) {
      const double z = depth.at(u, v);
      long raw = z > 0.0 ? std::lround(z * 256.0) : 0;
      raw = std::min(raw, 65535L);
      raw = std::max(raw, 0L);
      rowbuf[2 * u] = static_cast<uint8_t>((raw >> 8) & 0xff);
      rowbuf[2 * u + 1] = static_cast<uint8_t>(raw & 0xff);
    }
    png_write_row(png, rowbuf.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

DepthMap read_depth_png_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_error, "cannot open " + path);
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
  return read_depth_png(bytes);
}

void write_depth_png_file(const DepthMap& depth, const std::string& path) {
  const auto bytes = write_depth_png(depth);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io_error, "cannot open " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::io_error, "short write to " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_error, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io_error, "cannot open " + path);
  out << text;
  if (!out) throw Error(ErrorCode::io_error, "short write to " + path);
}

}  // namespace mono3d
