#include "mono3d/synth.hpp"

#include "mono3d/eval.hpp"
#include "mono3d/frames.hpp"

namespace mono3d {

std::vector<ClassSpec> default_class_specs() {
  return {
      {"Car", Vec3(3.88, 1.53, 1.63), 0.1, 3.0},
      {"Pedestrian", Vec3(0.84, 1.76, 0.66), 0.1, 1.0},
      {"Cyclist", Vec3(1.76, 1.74, 0.60), 0.1, 1.0},
  };
}

void SceneSpec::validate() const {
  if (num_objects < 0 || classes.empty() || !(z_min > 0.0) ||
      !(z_max >= z_min) || !(yaw_max >= yaw_min) || image_width <= 0 ||
      image_height <= 0 || !(background_depth > z_max)) {
    throw Error(ErrorCode::invalid_argument, "invalid scene spec");
  }
}

namespace {

// Deterministic uniform double in [a, b) from the raw 64-bit stream; avoids
// distribution implementation differences.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}
  double uniform(double a, double b) {
    const double u = (gen_() >> 11) * 0x1.0p-53;
    return a + u * (b - a);
  }
  size_t index(size_t n) { return static_cast<size_t>(gen_() % n); }

 private:
  std::mt19937_64 gen_;
};

Box2D project_box_corners(const CameraModel& camera, const Box3D& box) {
  Box2D out;
  out.label = box.label;
  bool first = true;
  for (const Vec3& corner : box.corners()) {
    const Vec2 px = project(camera, corner);
    if (first) {
      out.u1 = out.u2 = px.x();
      out.v1 = out.v2 = px.y();
      first = false;
    } else {
      out.u1 = std::min(out.u1, px.x());
      out.u2 = std::max(out.u2, px.x());
      out.v1 = std::min(out.v1, px.y());
      out.v2 = std::max(out.v2, px.y());
    }
  }
  return out;
}

// Nearest positive ray parameter hitting the box, or a negative value. The
// ray is p(z) = p0 + z * dir with dir.z = 1, so the parameter is camera z.
double ray_box_entry(const Vec3& q0, const Vec3& e, const Vec3& half) {
  double lo = 0.0, hi = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 3; ++k) {
    if (std::abs(e[k]) < 1e-15) {
      if (std::abs(q0[k]) > half[k]) return -1.0;
      continue;
    }
    double t0 = (-half[k] - q0[k]) / e[k];
    double t1 = (half[k] - q0[k]) / e[k];
    if (t0 > t1) std::swap(t0, t1);
    lo = std::max(lo, t0);
    hi = std::min(hi, t1);
  }
  return lo <= hi ? lo : -1.0;
}

}  // namespace

SynthScene generate_scene(const SceneSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);

  SynthScene scene;
  scene.camera = spec.camera;
  scene.meta = {spec.image_width, spec.image_height, ""};

  double weight_sum = 0.0;
  for (const auto& c : spec.classes) weight_sum += c.weight;

  for (int obj_idx = 0; obj_idx < spec.num_objects; ++obj_idx) {
    bool placed = false;
    for (int attempt = 0; attempt < spec.max_retries && !placed; ++attempt) {
      double pick = rng.uniform(0.0, weight_sum);
      const ClassSpec* cls = &spec.classes.back();
      for (const auto& c : spec.classes) {
        if (pick < c.weight) {
          cls = &c;
          break;
        }
        pick -= c.weight;
      }

      Box3D box;
      box.label = cls->label;
      for (int k = 0; k < 3; ++k) {
        box.dims[k] =
            cls->mean_dims[k] * (1.0 + cls->dim_jitter * rng.uniform(-1.0, 1.0));
      }
      const double z = rng.uniform(spec.z_min, spec.z_max);
      box.yaw = rng.uniform(spec.yaw_min, spec.yaw_max);
      if (spec.on_axis) {
        box.t = Vec3(0.0, 0.0, z);
      } else {
        const double u = rng.uniform(0.15 * spec.image_width,
                                     0.85 * spec.image_width);
        const double x = backproject(spec.camera, Vec2(u, spec.camera.cv()), z).x();
        box.t = Vec3(x, spec.camera_height - 0.5 * box.dims.y(), z);
      }

      bool overlap = false;
      for (const auto& other : scene.objects) {
        if (bev_iou(box, other.box3d) > 0.0) {
          overlap = true;
          break;
        }
      }
      if (overlap) continue;

      const Box2D box2d = project_box_corners(spec.camera, box);
      if (box2d.u1 < spec.margin_px ||
          box2d.u2 > spec.image_width - spec.margin_px ||
          box2d.v1 < spec.margin_px ||
          box2d.v2 > spec.image_height - spec.margin_px) {
        continue;
      }

      scene.objects.push_back({box2d, box});
      placed = true;
    }
    if (!placed) {
      throw Error(ErrorCode::placement_failure,
                  "could not place object " + std::to_string(obj_idx));
    }
  }

  scene.depth =
      DepthMap(spec.image_width, spec.image_height, spec.background_depth);
  for (const auto& obj : scene.objects) {
    const Box3D& box = obj.box3d;
    const Mat3 R = rotation_about_y(box.yaw);
    const Vec3 half = 0.5 * box.dims;
    const int u_lo = std::max(0, static_cast<int>(std::floor(obj.box2d.u1)));
    const int u_hi = std::min(spec.image_width - 1,
                              static_cast<int>(std::ceil(obj.box2d.u2)));
    const int v_lo = std::max(0, static_cast<int>(std::floor(obj.box2d.v1)));
    const int v_hi = std::min(spec.image_height - 1,
                              static_cast<int>(std::ceil(obj.box2d.v2)));
    for (int v = v_lo; v <= v_hi; ++v) {
      for (int u = u_lo; u <= u_hi; ++u) {
        const Vec2 center(u + 0.5, v + 0.5);
        const Vec3 p1 = backproject(spec.camera, center, 1.0);
        const Vec3 p2 = backproject(spec.camera, center, 2.0);
        const Vec3 dir = p2 - p1;
        const Vec3 p0 = p1 - dir;
        const Vec3 q0 = R.transpose() * (p0 - box.t);
        const Vec3 e = R.transpose() * dir;
        const double z_hit = ray_box_entry(q0, e, half);
        if (z_hit > 0.0 && z_hit < scene.depth.at(u, v)) {
          scene.depth.at(u, v) = z_hit;
        }
      }
    }
  }

  scene.labels_text = write_labels(scene.objects);
  scene.calib_text = write_calib(spec.camera);
  return scene;
}

MonteCarloIoU oracle_monte_carlo_iou(const Box3D& a, const Box3D& b,
                                     size_t n_samples, uint64_t seed) {
  if (n_samples < 10000) {
    throw Error(ErrorCode::invalid_argument,
                "Monte Carlo IoU needs at least 1e4 samples");
  }
  Rng rng(seed);
  const Mat3 Ra = rotation_about_y(a.yaw);
  const Mat3 Rb = rotation_about_y(b.yaw);
  const Vec3 half_a = 0.5 * a.dims;
  const Vec3 half_b = 0.5 * b.dims;
  size_t hits = 0;
  for (size_t i = 0; i < n_samples; ++i) {
    const Vec3 local(rng.uniform(-half_a.x(), half_a.x()),
                     rng.uniform(-half_a.y(), half_a.y()),
                     rng.uniform(-half_a.z(), half_a.z()));
    const Vec3 p = Ra * local + a.t;
    const Vec3 q = Rb.transpose() * (p - b.t);
    if (std::abs(q.x()) <= half_b.x() && std::abs(q.y()) <= half_b.y() &&
        std::abs(q.z()) <= half_b.z()) {
      ++hits;
    }
  }
  const double frac = static_cast<double>(hits) / n_samples;
  const double vol_a = a.volume();
  const double vol_b = b.volume();
  const double inter = vol_a * frac;
  const double uni = vol_a + vol_b - inter;

  MonteCarloIoU result;
  result.samples = n_samples;
  result.iou = inter / uni;
  const double se_inter =
      vol_a * std::sqrt(std::max(frac * (1.0 - frac), 1e-12) / n_samples);
  result.standard_error = se_inter * (vol_a + vol_b) / (uni * uni);
  return result;
}

Eigen::VectorXd oracle_numeric_gradient(
    const std::function<double(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x, double h) {
  if (!(h > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "step must be positive");
  }
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd xp = x, xm = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    xp[i] = x[i] + h;
    xm[i] = x[i] - h;
    g[i] = (f(xp) - f(xm)) / (2.0 * h);
    xp[i] = x[i];
    xm[i] = x[i];
  }
  return g;
}

std::vector<DepthResidualSample> empirical_depth_residual_sweep(
    const CameraModel& camera, const Vec3& dims, double t_z,
    const std::vector<double>& t_ys, const std::vector<double>& yaws) {
  std::vector<DepthResidualSample> out;
  for (double t_y : t_ys) {
    for (double yaw : yaws) {
      Box3D box;
      box.label = "Car";
      box.t = Vec3(0.0, t_y, t_z);
      box.dims = dims;
      box.yaw = yaw;
      const Box2D box2d = project_box_corners(camera, box);
      DepthResidualSample s;
      s.alpha_v = viewing_angles(camera, box2d).alpha_v;
      s.theta = yaw;
      s.residual = t_z - proposal_depth(camera.fv(), dims.y(), box2d.height());
      out.push_back(s);
    }
  }
  return out;
}

}  // namespace mono3d
