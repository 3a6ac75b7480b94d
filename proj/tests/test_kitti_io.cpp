#include <doctest.h>

#include "mono3d/kitti_io.hpp"

#include <iterator>
#include <random>
#include <sstream>

using namespace mono3d;

namespace {

const char* kSimpleCalib = "P2: 1000 0 500 0  0 1000 300 0  0 0 1 0\n";

std::string fixture(const std::string& rel) {
  return std::string(TEST_FIXTURES_DIR) + "/" + rel;
}

Detection make_detection(std::mt19937_64& rng) {
  auto uni = [&](double a, double b) {
    return a + (rng() >> 11) * 0x1.0p-53 * (b - a);
  };
  Detection det;
  det.box3d.label = (rng() % 2) ? "Car" : "Pedestrian";
  det.box3d.t = Vec3(uni(-20, 20), uni(-1, 2), uni(5, 80));
  det.box3d.dims = Vec3(uni(0.5, 5), uni(0.5, 2), uni(0.5, 2.5));
  det.box3d.yaw = uni(-M_PI, M_PI);
  det.box3d.truncation = uni(0, 0.5);
  det.box3d.occlusion = static_cast<int>(rng() % 3);
  det.box2d.label = det.box3d.label;
  det.box2d.u1 = uni(0, 600);
  det.box2d.v1 = uni(0, 200);
  det.box2d.u2 = det.box2d.u1 + uni(5, 300);
  det.box2d.v2 = det.box2d.v1 + uni(5, 150);
  det.score = uni(0, 1);
  det.box2d.score = det.score;
  return det;
}

std::vector<std::string> tokens(const std::string& text) {
  std::istringstream ss(text);
  return {std::istream_iterator<std::string>(ss),
          std::istream_iterator<std::string>()};
}

}  // namespace

TEST_CASE("parse_calib maps P2 fields to intrinsics") {
  const CameraModel cam = parse_calib(kSimpleCalib);
  CHECK(cam.fu() == doctest::Approx(1000).epsilon(1e-12));
  CHECK(cam.fv() == doctest::Approx(1000).epsilon(1e-12));
  CHECK(cam.cu() == doctest::Approx(500).epsilon(1e-12));
  CHECK(cam.cv() == doctest::Approx(300).epsilon(1e-12));
  CHECK(cam.bx() == doctest::Approx(0).epsilon(1e-12));
  CHECK(cam.by() == doctest::Approx(0).epsilon(1e-12));
}

TEST_CASE("parse_calib derives the baseline term with the right sign") {
  const CameraModel cam =
      parse_calib("P2: 1000 0 500 -40000  0 1000 300 0  0 0 1 0\n");
  CHECK(cam.bx() == doctest::Approx(40.0).epsilon(1e-12));
}

TEST_CASE("parse_calib error paths") {
  try {
    parse_calib("P0: 1000 0 500 0 0 1000 300 0 0 0 1 0\n");
    FAIL("expected MissingKey");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::missing_key);
  }
  // token count != 12
  CHECK_THROWS_AS(parse_calib("P2: 1000 0 500 0 0 1000 300 0 0 0 1\n"), Error);
  try {
    parse_calib("P2: 1000 0 500 0 0 1000 300 0 0 0 1 0 99\n");
    FAIL("expected MalformedNumber");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::malformed_number);
  }
  CHECK_THROWS_AS(parse_calib("P2: a 0 500 0 0 1000 300 0 0 0 1 0\n"), Error);
}

TEST_CASE("calib write/parse round trip is exact") {
  const CameraModel cam =
      parse_calib(read_text_file(fixture("real_kitti/calib/000000.txt")));
  const std::string once = write_calib(cam);
  const CameraModel cam2 = parse_calib(once);
  CHECK((cam.P() - cam2.P()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(write_calib(cam2) == once);
}

TEST_CASE("parse_labels converts bottom-face center to centroid") {
  const LabelFile file = parse_labels(
      "Car 0.00 0 1.62 0 0 100 50 1.50 1.60 3.90 5.00 1.65 20.00 1.37\n");
  REQUIRE(file.objects.size() == 1);
  const Box3D& box = file.objects[0].box3d;
  CHECK(box.t.y() == doctest::Approx(0.90).epsilon(1e-12));
  CHECK(box.t.y() + 0.5 * box.dims.y() == doctest::Approx(1.65).epsilon(1e-12));
  CHECK(box.dims.x() == doctest::Approx(3.90));  // length
  CHECK(box.dims.y() == doctest::Approx(1.50));  // height
  CHECK(box.dims.z() == doctest::Approx(1.60));  // width
  CHECK(file.objects[0].box2d.score == doctest::Approx(1.0));
}

TEST_CASE("parse_labels separates DontCare regions") {
  const LabelFile file = parse_labels(
      "DontCare -1 -1 -10 10 20 30 40 -1 -1 -1 -1000 -1000 -1000 -10\n"
      "Car 0.00 0 0.00 0 0 100 50 1.50 1.60 3.90 0.00 1.65 20.00 0.00\n");
  CHECK(file.objects.size() == 1);
  REQUIRE(file.dontcare.size() == 1);
  CHECK(file.dontcare[0].u1 == doctest::Approx(10));
  CHECK(file.dontcare[0].v2 == doctest::Approx(40));
}

TEST_CASE("parse_labels rejects malformed lines with the line number") {
  const char* fourteen =
      "Car 0.00 0 0.00 0 0 100 50 1.50 1.60 3.90 0.00 1.65 20.00\n";
  try {
    parse_labels(fourteen);
    FAIL("expected MalformedLine");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::malformed_line);
    CHECK(std::string(e.what()).find("line 1") != std::string::npos);
  }
  try {
    parse_labels(
        "Car 0.00 0 0.00 0 0 100 50 1.50 1.60 3.90 0.00 1.65 20.00 0.00\n"
        "Car 0 0\n");
    FAIL("expected MalformedLine");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("parse_labels flags alpha inconsistent with yaw + alpha_h") {
  // beta = yaw + atan2(t_x, t_z) = 0.00 + atan2(5, 20) = 0.2450
  const LabelFile ok = parse_labels(
      "Car 0.00 0 0.24 0 0 100 50 1.50 1.60 3.90 5.00 1.65 20.00 0.00\n");
  CHECK(ok.warnings.empty());
  const LabelFile off = parse_labels(
      "Car 0.00 0 -0.25 0 0 100 50 1.50 1.60 3.90 5.00 1.65 20.00 0.00\n");
  CHECK(off.warnings.size() == 1);
}

TEST_CASE("write_detections basics") {
  CHECK(write_detections({}) == "");

  Detection det;
  det.box2d = {100, 50, 200, 150, 0.873, "Car"};
  det.box3d.label = "Car";
  det.box3d.t = Vec3(5.0, 0.9, 20.0);
  det.box3d.dims = Vec3(3.9, 1.5, 1.6);
  det.box3d.yaw = 0.5;
  det.score = 0.873;
  const std::string text = write_detections({det});

  const auto tok = tokens(text);
  REQUIRE(tok.size() == 16);
  CHECK(tok[15] == "0.87");
  // alpha field carries the observation angle of the box
  const double beta = normalize_angle(0.5 + std::atan2(5.0, 20.0));
  char expected[16];
  std::snprintf(expected, sizeof(expected), "%.2f", beta);
  CHECK(tok[3] == expected);

  const LabelFile parsed = parse_labels(text);
  REQUIRE(parsed.objects.size() == 1);
  CHECK(parsed.objects[0].box3d.t.x() == doctest::Approx(5.0).epsilon(1e-9));
  CHECK(parsed.objects[0].box3d.t.y() == doctest::Approx(0.9).epsilon(1e-2));
  CHECK(parsed.objects[0].box3d.yaw == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("write/parse round trip is byte-stable after first normalization") {
  std::mt19937_64 rng(42);
  std::vector<Detection> dets;
  for (int i = 0; i < 50; ++i) dets.push_back(make_detection(rng));

  const std::string t1 = write_detections(dets);
  const LabelFile p1 = parse_labels(t1);
  REQUIRE(p1.objects.size() == dets.size());
  std::vector<Detection> round1;
  for (const auto& obj : p1.objects) {
    round1.push_back({obj.box2d, obj.box3d, obj.box2d.score});
  }
  const std::string t2 = write_detections(round1);
  const LabelFile p2 = parse_labels(t2);
  std::vector<Detection> round2;
  for (const auto& obj : p2.objects) {
    round2.push_back({obj.box2d, obj.box3d, obj.box2d.score});
  }
  CHECK(write_detections(round2) == t2);

  // parse of the first write reproduces the inputs to the 1e-2 rounding
  for (size_t i = 0; i < dets.size(); ++i) {
    CHECK(std::abs(p1.objects[i].box3d.t.z() - dets[i].box3d.t.z()) <= 0.0051);
    CHECK(std::abs(p1.objects[i].box3d.dims.y() - dets[i].box3d.dims.y()) <=
          0.0051);
    CHECK(std::abs(p1.objects[i].box2d.u1 - dets[i].box2d.u1) <= 0.0051);
  }
}

TEST_CASE("labels round trip on the real fixture directory") {
  for (const char* frame : {"000000", "000001"}) {
    const std::string text = read_text_file(
        fixture(std::string("real_kitti/label_2/") + frame + ".txt"));
    const LabelFile p1 = parse_labels(text);
    const std::string t1 = write_labels(p1.objects, p1.dontcare);
    const LabelFile p2 = parse_labels(t1);
    CHECK(p2.objects.size() == p1.objects.size());
    CHECK(p2.dontcare.size() == p1.dontcare.size());
    CHECK(write_labels(p2.objects, p2.dontcare) == t1);

    // ingested boxes always store the geometric centroid
    std::istringstream ss(text);
    std::string line;
    size_t idx = 0;
    while (std::getline(ss, line)) {
      const auto tok = tokens(line);
      if (tok.empty() || tok[0] == "DontCare") continue;
      const double file_y = std::stod(tok[12]);
      const Box3D& box = p1.objects[idx++].box3d;
      CHECK(box.t.y() + 0.5 * box.dims.y() ==
            doctest::Approx(file_y).epsilon(1e-9));
    }
  }
}

TEST_CASE("depth PNG encodes raw = meters * 256 with 0 invalid") {
  DepthMap depth(4, 3);
  depth.at(0, 0) = 5120.0 / 256.0;  // raw 5120 -> 20 m
  depth.at(1, 0) = 0.0;             // invalid
  depth.at(2, 1) = 80.0;
  depth.at(3, 2) = 300.0;  // clamps to 65535

  const auto bytes = write_depth_png(depth);
  const DepthMap back = read_depth_png(bytes);
  REQUIRE(back.width == 4);
  REQUIRE(back.height == 3);
  CHECK(back.at(0, 0) == doctest::Approx(20.0).epsilon(1e-12));
  CHECK_FALSE(back.valid(1, 0));
  CHECK(back.at(2, 1) == doctest::Approx(80.0).epsilon(1e-12));
  CHECK(back.at(3, 2) == doctest::Approx(65535.0 / 256.0).epsilon(1e-12));
}

TEST_CASE("depth PNG round trip preserves quantized values exactly") {
  std::mt19937_64 rng(7);
  DepthMap depth(32, 16);
  for (auto& z : depth.z) {
    const double u = (rng() >> 11) * 0x1.0p-53;
    z = u < 0.2 ? 0.0 : 5.0 + 100.0 * u;
  }
  const DepthMap once = read_depth_png(write_depth_png(depth));
  const auto bytes = write_depth_png(once);
  const DepthMap twice = read_depth_png(bytes);
  CHECK(twice.z == once.z);
  CHECK(write_depth_png(twice) == bytes);
}

TEST_CASE("read_depth_png rejects non-16-bit input") {
  // Minimal 8-bit grayscale PNG (1x1), hand-assembled.
  const uint8_t png8[] = {
      0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a, 0x00, 0x00, 0x00, 0x0d,
      0x49, 0x48, 0x44, 0x52, 0x00, 0x00, 0x00, 0x01, 0x00, 0x00, 0x00, 0x01,
      0x08, 0x00, 0x00, 0x00, 0x00, 0x3a, 0x7e, 0x9b, 0x55, 0x00, 0x00, 0x00,
      0x0a, 0x49, 0x44, 0x41, 0x54, 0x78, 0x9c, 0x63, 0x60, 0x00, 0x00, 0x00,
      0x02, 0x00, 0x01, 0x73, 0x75, 0x01, 0x18, 0x00, 0x00, 0x00, 0x00, 0x49,
      0x45, 0x4e, 0x44, 0xae, 0x42, 0x60, 0x82};
  std::vector<uint8_t> bytes(png8, png8 + sizeof(png8));
  try {
    read_depth_png(bytes);
    FAIL("expected UnsupportedFormat");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::unsupported_format);
  }
  CHECK_THROWS_AS(read_depth_png({1, 2, 3}), Error);
}
