#include <doctest.h>

#include "mono3d/instance_data.hpp"
#include "mono3d/refine.hpp"
#include "mono3d/synth.hpp"

using namespace mono3d;

namespace {

struct RefineFixture {
  CameraModel camera = CameraModel::pinhole(1, 1, 0, 0);
  LabeledObject object;
  InstanceGrid camera_grid{0, 0, GridFrame::camera};
  InstanceGrid local_grid{0, 0, GridFrame::local};
  double alpha_h = 0.0;
};

RefineFixture make_refine_fixture(uint64_t seed, bool on_axis = false) {
  SceneSpec spec;
  spec.seed = seed;
  spec.num_objects = 1;
  spec.z_min = 10;
  spec.z_max = 30;
  spec.on_axis = on_axis;
  spec.classes = {{"Car", Vec3(3.88, 1.53, 1.63), 0.05, 1.0}};
  if (on_axis) {
    spec.yaw_min = spec.yaw_max = 0.0;
  }
  const SynthScene scene = generate_scene(spec);
  RefineFixture f;
  f.camera = scene.camera;
  f.object = scene.objects.front();
  const SceneTensor tensor = depth_to_scene(scene.depth, scene.camera);
  const auto points = segment_instance(tensor, f.object.box3d, 0.0);
  f.camera_grid = make_instance_grid(points, f.object.box2d, 48);
  f.alpha_h = viewing_angles(scene.camera, f.object.box2d).alpha_h;
  f.local_grid = grid_to_local(f.camera_grid, f.object.box3d, f.alpha_h);
  return f;
}

Proposal gt_proposal(const RefineFixture& f) {
  Proposal prop;
  prop.p = f.object.box3d.t;
  prop.box = f.object.box2d;
  prop.beta = f.object.box3d.beta();
  prop.dims = f.object.box3d.dims;
  prop.theta = f.object.box3d.yaw;
  return prop;
}

}  // namespace

TEST_CASE("recover_tx keeps the centroid on the box-center ray") {
  const CameraModel cam = CameraModel::pinhole(1000, 1000, 500, 300);
  Box2D centered{480, 280, 520, 320, 1.0, "Car"};
  CHECK(recover_tx(cam, centered, 7.0) == doctest::Approx(0).epsilon(1e-12));

  Box2D right{1480, 280, 1520, 320, 1.0, "Car"};  // center u = cu + fu
  CHECK(recover_tx(cam, right, 10.0) == doctest::Approx(10.0).epsilon(1e-12));

  for (double t_z : {2.0, 17.3, 60.0}) {
    const double t_x = recover_tx(cam, right, t_z);
    const Vec2 px = project(cam, Vec3(t_x, 0.5, t_z));
    CHECK(px.x() == doctest::Approx(right.center().x()).epsilon(1e-9));
  }
  CHECK_THROWS_AS(recover_tx(cam, right, -1.0), Error);
}

TEST_CASE("refinement at the ground truth returns zero offsets") {
  const RefineFixture f = make_refine_fixture(41, /*on_axis=*/true);
  const RefineResult r =
      refine_pose(gt_proposal(f), f.local_grid, f.camera_grid.depth_channel(),
                  f.camera, LossWeights{}, OptimizerConfig{});
  CHECK(r.converged_at_start);
  CHECK(r.offsets.dt_y == 0.0);
  CHECK(r.offsets.dt_z == 0.0);
  CHECK(r.trace.size() == 1);  // no movement
  CHECK(r.final_loss <= 1e-12);
}

TEST_CASE("refinement recovers a perturbed depth") {
  for (uint64_t seed : {50, 51, 52, 53}) {
    const RefineFixture f = make_refine_fixture(seed);
    const double gt_z = f.object.box3d.t.z();
    for (double rel : {-0.10, -0.05, 0.07, 0.10}) {
      Proposal prop = gt_proposal(f);
      prop.p.z() = gt_z * (1.0 + rel);
      prop.p = backproject(f.camera, prop.box.center(), prop.p.z());
      const RefineResult r =
          refine_pose(prop, f.local_grid, f.camera_grid.depth_channel(),
                      f.camera, LossWeights{}, OptimizerConfig{});
      CHECK(std::abs(r.refined.t.z() - gt_z) <= 0.05);
      CHECK(r.refined.t.z() > 0.0);
      // the loss trace never increases over accepted steps
      for (size_t i = 1; i < r.trace.size(); ++i) {
        CHECK(r.trace[i].loss <= r.trace[i - 1].loss + 1e-15);
      }
    }
  }
}

TEST_CASE("projection-only mode refines without depth grids") {
  const RefineFixture f = make_refine_fixture(60);
  Proposal prop = gt_proposal(f);
  prop.p.z() *= 1.06;
  prop.p = backproject(f.camera, prop.box.center(), prop.p.z());
  const double initial_err = std::abs(prop.p.z() - f.object.box3d.t.z());

  LossWeights weights;
  weights.w_z = 0.0;
  const RefineResult r = refine_pose(prop, f.local_grid, {}, f.camera,
                                     weights, OptimizerConfig{});
  CHECK(std::abs(r.refined.t.z() - f.object.box3d.t.z()) < initial_err);
}

TEST_CASE("offsets are clamped to max_offset and depth stays positive") {
  const RefineFixture f = make_refine_fixture(61);
  Proposal prop = gt_proposal(f);
  prop.p.z() += 25.0;  // far outside the basin
  prop.p = backproject(f.camera, prop.box.center(), prop.p.z());
  OptimizerConfig cfg;
  cfg.max_offset = 3.0;
  const RefineResult r =
      refine_pose(prop, f.local_grid, f.camera_grid.depth_channel(), f.camera,
                  LossWeights{}, cfg);
  CHECK(std::abs(r.offsets.dt_y) <= 3.0 + 1e-12);
  CHECK(std::abs(r.offsets.dt_z) <= 3.0 + 1e-12);
  CHECK(r.refined.t.z() > 0.0);
  CHECK(std::isfinite(r.final_loss));
}

TEST_CASE("max_iters = 0 evaluates without moving") {
  const RefineFixture f = make_refine_fixture(62);
  Proposal prop = gt_proposal(f);
  prop.p.z() += 1.0;
  OptimizerConfig cfg;
  cfg.max_iters = 0;
  const RefineResult r =
      refine_pose(prop, f.local_grid, f.camera_grid.depth_channel(), f.camera,
                  LossWeights{}, cfg);
  CHECK(r.offsets.dt_y == 0.0);
  CHECK(r.offsets.dt_z == 0.0);
}

TEST_CASE("refinement validates inputs") {
  const RefineFixture f = make_refine_fixture(63);
  Proposal bad = gt_proposal(f);
  bad.p.z() = -2.0;
  CHECK_THROWS_AS(refine_pose(bad, f.local_grid, {}, f.camera, LossWeights{},
                              OptimizerConfig{}),
                  Error);
  // camera-frame grid where a local one is required
  CHECK_THROWS_AS(refine_pose(gt_proposal(f), f.camera_grid, {}, f.camera,
                              LossWeights{}, OptimizerConfig{}),
                  Error);
  OptimizerConfig bad_cfg;
  bad_cfg.backtrack = 1.5;
  CHECK_THROWS_AS(refine_pose(gt_proposal(f), f.local_grid, {}, f.camera,
                              LossWeights{}, bad_cfg),
                  Error);
  LossWeights no_terms;
  no_terms.w_z = 0.0;
  no_terms.w_proj = 0.0;
  CHECK_THROWS_AS(refine_pose(gt_proposal(f), f.local_grid, {}, f.camera,
                              no_terms, OptimizerConfig{}),
                  Error);
}

TEST_CASE("propose_and_refine reproduces ground truth end to end") {
  const RefineFixture f = make_refine_fixture(70, /*on_axis=*/true);
  const RefineResult r = propose_and_refine(
      f.camera, f.object.box2d, f.object.box3d.dims, f.object.box3d.beta(),
      f.local_grid, f.camera_grid.depth_channel(), LossWeights{},
      OptimizerConfig{});
  CHECK((r.refined.t - f.object.box3d.t).cwiseAbs().maxCoeff() <= 1e-3);
  CHECK(std::abs(normalize_angle(r.refined.yaw - f.object.box3d.yaw)) <= 1e-4);
  for (size_t i = 1; i < r.trace.size(); ++i) {
    CHECK(r.trace[i].loss <= r.trace[i - 1].loss + 1e-15);
  }

  Box2D degenerate{100, 100, 150, 100.4, 1.0, "Car"};
  CHECK_THROWS_AS(
      propose_and_refine(f.camera, degenerate, f.object.box3d.dims, 0.0,
                         f.local_grid, f.camera_grid.depth_channel(),
                         LossWeights{}, OptimizerConfig{}),
      Error);
}

TEST_CASE("trace serialization is line per iteration") {
  const RefineFixture f = make_refine_fixture(71);
  Proposal prop = gt_proposal(f);
  prop.p.z() += 1.5;
  const RefineResult r =
      refine_pose(prop, f.local_grid, f.camera_grid.depth_channel(), f.camera,
                  LossWeights{}, OptimizerConfig{});
  const std::string text = trace_to_text(r.trace);
  size_t lines = 0;
  for (char c : text) lines += c == '\n';
  CHECK(lines == r.trace.size() + 1);  // header line
}
