#include <doctest.h>

#include "mono3d/instance_data.hpp"
#include "mono3d/losses.hpp"
#include "mono3d/synth.hpp"

#include <random>

using namespace mono3d;

namespace {

const CameraModel kCam = CameraModel::pinhole(400, 400, 320.5, 96.5);

SceneSpec small_scene_spec(uint64_t seed) {
  SceneSpec spec;
  spec.seed = seed;
  spec.num_objects = 3;
  spec.z_min = 8;
  spec.z_max = 35;
  return spec;
}

}  // namespace

TEST_CASE("densify_depth is a fixpoint on dense input") {
  DepthMap dense(8, 6, 12.5);
  const DepthMap out = densify_depth(dense);
  CHECK(out.z == dense.z);
}

TEST_CASE("densify_depth fills from a single valid pixel") {
  DepthMap sparse(8, 6, 0.0);
  sparse.at(3, 2) = 7.0;
  const DepthMap out = densify_depth(sparse);
  for (double z : out.z) CHECK(z == doctest::Approx(7.0));
}

TEST_CASE("densify_depth on a checkerboard-sparse plane recovers the plane") {
  DepthMap sparse(32, 20, 0.0);
  for (int v = 0; v < 20; ++v) {
    for (int u = 0; u < 32; ++u) {
      if ((u + v) % 2 == 0) sparse.at(u, v) = 10.0;
    }
  }
  const DepthMap out = densify_depth(sparse);
  for (int v = 0; v < 20; ++v) {
    for (int u = 0; u < 32; ++u) {
      CHECK(out.at(u, v) == doctest::Approx(10.0).epsilon(0));
      if ((u + v) % 2 == 0) CHECK(out.at(u, v) == sparse.at(u, v));
    }
  }
}

TEST_CASE("densify_depth rejects an all-invalid map") {
  try {
    densify_depth(DepthMap(4, 4, 0.0));
    FAIL("expected EmptyDepth");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::empty_depth);
  }
}

TEST_CASE("depth_to_scene backprojects pixel centers") {
  DepthMap depth(640, 192, 10.0);
  depth.at(5, 7) = 0.0;  // invalid input cell
  const SceneTensor scene = depth_to_scene(depth, kCam);

  // pixel (320, 96) has center (320.5, 96.5) = principal point
  CHECK((scene.at(320, 96) - Vec3(0, 0, 10)).norm() <= 1e-12);
  CHECK_FALSE(scene.is_valid(5, 7));
  CHECK(scene.is_valid(0, 0));

  double worst = 0.0;
  for (int v = 0; v < depth.height; v += 7) {
    for (int u = 0; u < depth.width; u += 13) {
      if (!scene.is_valid(u, v)) continue;
      CHECK(scene.at(u, v).z() == depth.at(u, v));  // exact
      const Vec2 px = project(kCam, scene.at(u, v));
      worst = std::max(worst, (px - Vec2(u + 0.5, v + 0.5)).norm());
    }
  }
  CHECK(worst <= 1e-6);
}

TEST_CASE("segment_instance recovers rendered pixels exactly") {
  const SynthScene scene = generate_scene(small_scene_spec(99));
  const SceneTensor tensor = depth_to_scene(scene.depth, scene.camera);

  for (const auto& obj : scene.objects) {
    const auto points = segment_instance(tensor, obj.box3d, 0.0);

    // every rendered pixel of this object is recovered and nothing else
    size_t rendered = 0;
    for (int v = 0; v < scene.depth.height; ++v) {
      for (int u = 0; u < scene.depth.width; ++u) {
        const double z = scene.depth.at(u, v);
        if (z >= 119.0) continue;  // background
        const Vec3 p = tensor.at(u, v);
        const Mat3 R = rotation_about_y(obj.box3d.yaw);
        const Vec3 q = R.transpose() * (p - obj.box3d.t);
        const bool inside = (q.cwiseAbs() - 0.5 * obj.box3d.dims).maxCoeff() <=
                            1e-9;
        if (inside) ++rendered;
      }
    }
    CHECK(points.size() == rendered);
    CHECK(points.size() >= 8);
    for (const auto& pp : points) {
      CHECK(scene.depth.at(pp.u, pp.v) < 119.0);  // never background
    }
  }
}

TEST_CASE("segment_instance uses closed containment") {
  SceneTensor scene;
  scene.width = 2;
  scene.height = 1;
  scene.points = {Vec3(1.0, 0.0, 20.0), Vec3(1.0 + 1e-6, 0.0, 20.0)};
  scene.valid = {1, 1};
  Box3D box;
  box.label = "Car";
  box.t = Vec3(0, 0, 20);
  box.dims = Vec3(2, 2, 2);  // face exactly at x = 1
  const auto points = segment_instance(scene, box, 0.0);
  REQUIRE(points.size() == 1);
  CHECK(points[0].u == 0);

  // margin picks up the second point as well
  CHECK(segment_instance(scene, box, 0.1).size() == 2);
}

TEST_CASE("segment_instance reports an empty instance") {
  SceneTensor scene;
  scene.width = 1;
  scene.height = 1;
  scene.points = {Vec3(50, 0, 90)};
  scene.valid = {1};
  Box3D box;
  box.label = "Car";
  box.t = Vec3(0, 0, 20);
  box.dims = Vec3(2, 2, 2);
  try {
    segment_instance(scene, box, 0.0);
    FAIL("expected EmptyInstance");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::empty_instance);
  }
}

TEST_CASE("make_instance_grid at native resolution is the identity") {
  std::vector<PixelPoint> points;
  for (int v = 50; v < 98; ++v) {
    for (int u = 100; u < 148; ++u) {
      points.push_back({u, v, Vec3(u * 0.01, v * 0.01, 10.0)});
    }
  }
  Box2D box{100, 50, 148, 98, 1.0, "Car"};
  const InstanceGrid grid = make_instance_grid(points, box, 48);
  CHECK(grid.valid_count() == 48u * 48u);
  for (int i = 0; i < 48; ++i) {
    for (int j = 0; j < 48; ++j) {
      const size_t k = grid.index(i, j);
      CHECK(grid.expected_px[k].x() ==
            doctest::Approx(100 + j + 0.5).epsilon(1e-12));
      CHECK(grid.expected_px[k].y() ==
            doctest::Approx(50 + i + 0.5).epsilon(1e-12));
      CHECK(grid.points[k].z() == doctest::Approx(10.0));
    }
  }
}

TEST_CASE("make_instance_grid 2:1 decimation matches brute-force nearest") {
  std::vector<PixelPoint> points;
  for (int v = 10; v < 106; ++v) {
    for (int u = 20; u < 116; ++u) {
      points.push_back({u, v, Vec3(u, v, 15.0)});
    }
  }
  Box2D box{20, 10, 116, 106, 1.0, "Car"};
  const InstanceGrid grid = make_instance_grid(points, box, 48);
  CHECK(grid.valid_count() == 48u * 48u);

  const auto brute_nearest = [](double origin, double scale, int cell) {
    const double x = origin + (cell + 0.5) * scale;
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int p = -2000; p < 2000; ++p) {
      const double d = std::abs(x - (p + 0.5));
      if (d < best_d) {  // strict: ties keep the smaller index
        best_d = d;
        best = p;
      }
    }
    return best;
  };
  for (int i = 0; i < 48; ++i) {
    for (int j = 0; j < 48; ++j) {
      const size_t k = grid.index(i, j);
      const int pu = brute_nearest(20, 2.0, j);
      const int pv = brute_nearest(10, 2.0, i);
      CHECK(grid.expected_px[k].x() == doctest::Approx(pu + 0.5));
      CHECK(grid.expected_px[k].y() == doctest::Approx(pv + 0.5));
      CHECK(grid.points[k].x() == doctest::Approx(pu));
      CHECK(grid.points[k].y() == doctest::Approx(pv));
    }
  }
}

TEST_CASE("generated grids project onto their expected pixels") {
  const SynthScene scene = generate_scene(small_scene_spec(4));
  const SceneTensor tensor = depth_to_scene(scene.depth, scene.camera);
  for (const auto& obj : scene.objects) {
    const auto points = segment_instance(tensor, obj.box3d, 0.0);
    const InstanceGrid grid = make_instance_grid(points, obj.box2d, 48);
    REQUIRE(grid.valid_count() > 0);
    double worst = 0.0;
    for (size_t k = 0; k < grid.cell_count(); ++k) {
      if (!grid.mask[k]) continue;
      const Vec2 px = project(scene.camera, grid.points[k]);
      worst = std::max(worst, (px - grid.expected_px[k]).norm());
    }
    CHECK(worst <= 1e-6);

    // zero self-projection: the generated data minimizes the alignment loss
    const double alpha_h = viewing_angles(scene.camera, obj.box2d).alpha_h;
    const InstanceGrid local = grid_to_local(grid, obj.box3d, alpha_h);
    const FrameTransform t = build_T_CO(obj.box3d.t, alpha_h);
    CHECK(projection_loss(local, t, scene.camera, obj.box2d).value <= 1e-12);
    CHECK(z_loss(local, t, grid.depth_channel()).value <= 1e-12);
  }
}

TEST_CASE("local grids satisfy the box-diagonal bound") {
  const SynthScene scene = generate_scene(small_scene_spec(12));
  const SceneTensor tensor = depth_to_scene(scene.depth, scene.camera);
  for (const auto& obj : scene.objects) {
    const auto points = segment_instance(tensor, obj.box3d, 0.0);
    const InstanceGrid grid = make_instance_grid(points, obj.box2d, 48);
    const double alpha_h = viewing_angles(scene.camera, obj.box2d).alpha_h;
    const InstanceGrid local = grid_to_local(grid, obj.box3d, alpha_h);
    const double bound = 0.5 * obj.box3d.dims.norm() + 1e-6;
    for (size_t k = 0; k < local.cell_count(); ++k) {
      if (!local.mask[k]) continue;
      CHECK(local.points[k].cwiseAbs().maxCoeff() <= bound);
    }
  }
}

TEST_CASE("grid generation is deterministic") {
  const SynthScene scene = generate_scene(small_scene_spec(31));
  const SceneTensor tensor = depth_to_scene(scene.depth, scene.camera);
  const auto& obj = scene.objects.front();
  const auto pts1 = segment_instance(tensor, obj.box3d, 0.0);
  const auto pts2 = segment_instance(tensor, obj.box3d, 0.0);
  const InstanceGrid g1 = make_instance_grid(pts1, obj.box2d, 48);
  const InstanceGrid g2 = make_instance_grid(pts2, obj.box2d, 48);
  CHECK(serialize_grid(g1) == serialize_grid(g2));
}

TEST_CASE("grid records round trip through bytes and files") {
  std::mt19937_64 rng(8);
  auto uni = [&](double a, double b) {
    return a + (rng() >> 11) * 0x1.0p-53 * (b - a);
  };
  InstanceGrid grid(48, 48, GridFrame::local);
  for (size_t k = 0; k < grid.cell_count(); ++k) {
    if (rng() % 3 == 0) continue;
    grid.mask[k] = 1;
    grid.points[k] = Vec3(uni(-2, 2), uni(-1, 1), uni(-2, 2));
    grid.expected_px[k] = Vec2(uni(0, 640), uni(0, 192));
  }
  const auto bytes = serialize_grid(grid);
  const InstanceGrid back = deserialize_grid(bytes);
  CHECK(back.rows == grid.rows);
  CHECK(back.frame == grid.frame);
  CHECK(back.mask == grid.mask);
  CHECK(serialize_grid(back) == bytes);  // float32 quantization is idempotent
  for (size_t k = 0; k < grid.cell_count(); ++k) {
    CHECK((back.points[k] - grid.points[k]).cwiseAbs().maxCoeff() <= 1e-6);
  }

  const std::string path = "/tmp/mono3d_test_grid.igrid";
  save_grid(grid, path);
  const InstanceGrid loaded = load_grid(path);
  CHECK(serialize_grid(loaded) == bytes);

  CHECK_THROWS_AS(deserialize_grid({1, 2, 3, 4}), Error);

  const std::string text = grid_to_text(grid);
  CHECK(text.find("48x48") != std::string::npos);
  CHECK(text.find("frame=local") != std::string::npos);
}
