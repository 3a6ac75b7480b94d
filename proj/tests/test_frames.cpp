#include <doctest.h>

#include "mono3d/frames.hpp"

#include <random>

using namespace mono3d;

namespace {

InstanceGrid random_local_grid(std::mt19937_64& rng, int size = 8) {
  auto uni = [&](double a, double b) {
    return a + (rng() >> 11) * 0x1.0p-53 * (b - a);
  };
  InstanceGrid grid(size, size, GridFrame::local);
  for (size_t k = 0; k < grid.cell_count(); ++k) {
    if (rng() % 4 == 0) continue;  // leave some cells masked off
    grid.mask[k] = 1;
    grid.points[k] = Vec3(uni(-2, 2), uni(-1, 1), uni(-2, 2));
    grid.expected_px[k] = Vec2(uni(0, 640), uni(0, 192));
  }
  return grid;
}

}  // namespace

TEST_CASE("build_T_CO basics") {
  const FrameTransform id = build_T_CO(Vec3::Zero(), 0.0);
  CHECK((id.matrix() - Mat4::Identity()).cwiseAbs().maxCoeff() <= 1e-15);

  const FrameTransform shift = build_T_CO(Vec3(0, 0, 20), 0.0);
  CHECK((shift.to_camera(Vec3(1, 0, 0)) - Vec3(1, 0, 20)).norm() <= 1e-15);

  // quarter turn about the (downward) y axis
  const FrameTransform quarter = build_T_CO(Vec3(0, 0, 20), M_PI / 2);
  CHECK((quarter.to_camera(Vec3(1, 0, 0)) - Vec3(0, 0, 19)).norm() <= 1e-12);

  CHECK_THROWS_AS(build_T_CO(Vec3(0, 0, std::nan("")), 0.0), Error);
}

TEST_CASE("rotation matrices are orthonormal with unit determinant") {
  for (double a = -3.2; a < 3.2; a += 0.17) {
    const Mat3 R = rotation_about_y(a);
    CHECK((R.transpose() * R - Mat3::Identity()).cwiseAbs().maxCoeff() <=
          1e-12);
    CHECK(R.determinant() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("transform round trip and inverse composition") {
  std::mt19937_64 rng(5);
  auto uni = [&](double a, double b) {
    return a + (rng() >> 11) * 0x1.0p-53 * (b - a);
  };
  for (int trial = 0; trial < 20; ++trial) {
    const FrameTransform t =
        build_T_CO(Vec3(uni(-30, 30), uni(-2, 2), uni(1, 80)),
                   uni(-M_PI, M_PI));
    CHECK((t.matrix() * t.matrix().inverse() - Mat4::Identity())
              .cwiseAbs()
              .maxCoeff() <= 1e-12);
    for (int i = 0; i < 50; ++i) {
      const Vec3 p(uni(-5, 5), uni(-2, 2), uni(-5, 5));
      CHECK((t.to_local(t.to_camera(p)) - p).cwiseAbs().maxCoeff() <= 1e-9);
    }
  }
}

TEST_CASE("the centroid maps to the local origin") {
  const FrameTransform t = build_T_CO(Vec3(4, 1, 25), 0.7);
  CHECK(t.to_local(Vec3(4, 1, 25)).norm() <= 1e-12);
}

TEST_CASE("grid transforms preserve mask, G and pairwise distances") {
  std::mt19937_64 rng(17);
  const InstanceGrid local = random_local_grid(rng, 16);
  const FrameTransform t = build_T_CO(Vec3(3, 0.5, 30), 0.4);

  const InstanceGrid camera = local_to_camera(local, t);
  CHECK(camera.frame == GridFrame::camera);
  CHECK(camera.mask == local.mask);
  for (size_t k = 0; k < local.cell_count(); ++k) {
    CHECK((camera.expected_px[k] - local.expected_px[k]).norm() == 0.0);
  }

  // isometry on valid points
  std::vector<size_t> valid;
  for (size_t k = 0; k < local.cell_count(); ++k) {
    if (local.mask[k]) valid.push_back(k);
  }
  for (size_t a = 0; a < valid.size(); a += 7) {
    for (size_t b = a + 1; b < valid.size(); b += 11) {
      const double d_local =
          (local.points[valid[a]] - local.points[valid[b]]).norm();
      const double d_cam =
          (camera.points[valid[a]] - camera.points[valid[b]]).norm();
      CHECK(std::abs(d_local - d_cam) <= 1e-9);
    }
  }

  const InstanceGrid back = camera_to_local(camera, t);
  CHECK(back.frame == GridFrame::local);
  for (size_t k = 0; k < local.cell_count(); ++k) {
    CHECK((back.points[k] - local.points[k]).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("round trip over 1000 random points and random transforms") {
  std::mt19937_64 rng(23);
  auto uni = [&](double a, double b) {
    return a + (rng() >> 11) * 0x1.0p-53 * (b - a);
  };
  const FrameTransform t =
      build_T_CO(Vec3(uni(-20, 20), uni(-2, 2), uni(5, 60)), uni(-M_PI, M_PI));
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Vec3 p(uni(-10, 10), uni(-3, 3), uni(-10, 10));
    worst = std::max(worst,
                     (t.to_local(t.to_camera(p)) - p).cwiseAbs().maxCoeff());
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("frame tags make double application an error") {
  std::mt19937_64 rng(29);
  const InstanceGrid local = random_local_grid(rng);
  const FrameTransform t = build_T_CO(Vec3(0, 0, 10), 0.0);
  const InstanceGrid camera = local_to_camera(local, t);
  try {
    local_to_camera(camera, t);
    FAIL("expected FrameMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::frame_mismatch);
  }
  CHECK_THROWS_AS(camera_to_local(local, t), Error);
}
