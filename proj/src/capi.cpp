#include "mono3d/mono3d.h"

#include "mono3d/camera.hpp"
#include "mono3d/eval.hpp"
#include "mono3d/instance_grid.hpp"
#include "mono3d/kitti_io.hpp"
#include "mono3d/pipeline.hpp"
#include "mono3d/refine.hpp"
#include "mono3d/types.hpp"

#include <cstring>
#include <sstream>

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& message) { g_last_error = message; }

mono3d_status to_status(const mono3d::Error& e) {
  return static_cast<mono3d_status>(static_cast<int>(e.code()));
}

template <typename Fn>
mono3d_status guarded(Fn&& fn) {
  try {
    fn();
    return MONO3D_OK;
  } catch (const mono3d::Error& e) {
    set_error(e.what());
    return to_status(e);
  } catch (const std::exception& e) {
    set_error(e.what());
    return MONO3D_ERR_INTERNAL;
  }
}

void copy_label(char (&dst)[32], const std::string& src) {
  std::snprintf(dst, sizeof(dst), "%s", src.c_str());
}

mono3d::Box2D to_box2d(const mono3d_box2d& b) {
  return {b.u1, b.v1, b.u2, b.v2, b.score, b.label};
}

mono3d_box2d from_box2d(const mono3d::Box2D& b) {
  mono3d_box2d out{};
  out.u1 = b.u1;
  out.v1 = b.v1;
  out.u2 = b.u2;
  out.v2 = b.v2;
  out.score = b.score;
  copy_label(out.label, b.label);
  return out;
}

mono3d::Box3D to_box3d(const mono3d_box3d& b) {
  mono3d::Box3D out;
  out.label = b.label;
  out.t = mono3d::Vec3(b.t[0], b.t[1], b.t[2]);
  out.dims = mono3d::Vec3(b.dims[0], b.dims[1], b.dims[2]);
  out.yaw = b.yaw;
  out.truncation = b.truncation;
  out.occlusion = b.occlusion;
  return out;
}

mono3d_box3d from_box3d(const mono3d::Box3D& b) {
  mono3d_box3d out{};
  for (int i = 0; i < 3; ++i) {
    out.t[i] = b.t[i];
    out.dims[i] = b.dims[i];
  }
  out.yaw = b.yaw;
  out.truncation = b.truncation;
  out.occlusion = b.occlusion;
  copy_label(out.label, b.label);
  return out;
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void fill_report(const mono3d::CommandReport& cmd, char** report,
                 char** warnings) {
  if (report) *report = dup_string(cmd.text);
  if (warnings) {
    std::ostringstream joined;
    for (size_t i = 0; i < cmd.warnings.size(); ++i) {
      if (i) joined << '\n';
      joined << cmd.warnings[i];
    }
    *warnings = dup_string(joined.str());
  }
}

const char* or_default(const char* value, const char* fallback) {
  return value ? value : fallback;
}

}  // namespace

struct mono3d_camera {
  mono3d::CameraModel model;
};

struct mono3d_labels {
  mono3d::LabelFile file;
};

struct mono3d_grid {
  mono3d::InstanceGrid grid;
};

extern "C" {

const char* mono3d_status_name(mono3d_status status) {
  if (status == MONO3D_ERR_INTERNAL) return "Internal";
  return mono3d::error_code_name(static_cast<mono3d::ErrorCode>(status));
}

const char* mono3d_last_error(void) { return g_last_error.c_str(); }

void mono3d_string_free(char* text) { std::free(text); }

mono3d_status mono3d_camera_create(const double P[12], mono3d_camera** out) {
  return guarded([&] {
    mono3d::Mat34 mat;
    for (int k = 0; k < 12; ++k) mat(k / 4, k % 4) = P[k];
    *out = new mono3d_camera{mono3d::CameraModel::from_matrix(mat)};
  });
}

mono3d_status mono3d_camera_from_calib_text(const char* text,
                                            mono3d_camera** out) {
  return guarded(
      [&] { *out = new mono3d_camera{mono3d::parse_calib(text)}; });
}

mono3d_status mono3d_camera_from_calib_file(const char* path,
                                            mono3d_camera** out) {
  return guarded([&] {
    *out = new mono3d_camera{
        mono3d::parse_calib(mono3d::read_text_file(path))};
  });
}

void mono3d_camera_free(mono3d_camera* camera) { delete camera; }

mono3d_status mono3d_camera_intrinsics(const mono3d_camera* camera,
                                       double intrinsics[6]) {
  return guarded([&] {
    intrinsics[0] = camera->model.fu();
    intrinsics[1] = camera->model.fv();
    intrinsics[2] = camera->model.cu();
    intrinsics[3] = camera->model.cv();
    intrinsics[4] = camera->model.bx();
    intrinsics[5] = camera->model.by();
  });
}

mono3d_status mono3d_camera_project(const mono3d_camera* camera,
                                    const double point[3], double pixel[2]) {
  return guarded([&] {
    const mono3d::Vec2 px = mono3d::project(
        camera->model, mono3d::Vec3(point[0], point[1], point[2]));
    pixel[0] = px.x();
    pixel[1] = px.y();
  });
}

mono3d_status mono3d_camera_backproject(const mono3d_camera* camera,
                                        const double pixel[2], double depth,
                                        double point[3]) {
  return guarded([&] {
    const mono3d::Vec3 p = mono3d::backproject(
        camera->model, mono3d::Vec2(pixel[0], pixel[1]), depth);
    point[0] = p.x();
    point[1] = p.y();
    point[2] = p.z();
  });
}

mono3d_status mono3d_viewing_angles(const mono3d_camera* camera,
                                    const mono3d_box2d* box, double* alpha_h,
                                    double* alpha_v) {
  return guarded([&] {
    const mono3d::ViewingAngles angles =
        mono3d::viewing_angles(camera->model, to_box2d(*box));
    if (alpha_h) *alpha_h = angles.alpha_h;
    if (alpha_v) *alpha_v = angles.alpha_v;
  });
}

mono3d_status mono3d_proposal_depth(double f, double h, double h_hat,
                                    double* depth) {
  return guarded([&] { *depth = mono3d::proposal_depth(f, h, h_hat); });
}

mono3d_status mono3d_make_proposal(const mono3d_camera* camera,
                                   const mono3d_box2d* box,
                                   const double dims[3], double beta,
                                   double proposal[3], double* theta) {
  return guarded([&] {
    const mono3d::Proposal prop = mono3d::make_proposal(
        camera->model, to_box2d(*box),
        mono3d::Vec3(dims[0], dims[1], dims[2]), beta);
    proposal[0] = prop.p.x();
    proposal[1] = prop.p.y();
    proposal[2] = prop.p.z();
    if (theta) *theta = prop.theta;
  });
}

mono3d_status mono3d_labels_parse(const char* text, mono3d_labels** out) {
  return guarded(
      [&] { *out = new mono3d_labels{mono3d::parse_labels(text)}; });
}

mono3d_status mono3d_labels_load(const char* path, mono3d_labels** out) {
  return guarded([&] {
    *out = new mono3d_labels{
        mono3d::parse_labels(mono3d::read_text_file(path))};
  });
}

void mono3d_labels_free(mono3d_labels* labels) { delete labels; }

size_t mono3d_labels_count(const mono3d_labels* labels) {
  return labels->file.objects.size();
}

size_t mono3d_labels_dontcare_count(const mono3d_labels* labels) {
  return labels->file.dontcare.size();
}

size_t mono3d_labels_warning_count(const mono3d_labels* labels) {
  return labels->file.warnings.size();
}

mono3d_status mono3d_labels_get(const mono3d_labels* labels, size_t index,
                                mono3d_box2d* box2d, mono3d_box3d* box3d) {
  return guarded([&] {
    if (index >= labels->file.objects.size()) {
      throw mono3d::Error(mono3d::ErrorCode::invalid_argument,
                          "label index out of range");
    }
    const auto& obj = labels->file.objects[index];
    if (box2d) *box2d = from_box2d(obj.box2d);
    if (box3d) *box3d = from_box3d(obj.box3d);
  });
}

mono3d_status mono3d_labels_get_dontcare(const mono3d_labels* labels,
                                         size_t index, mono3d_box2d* box2d) {
  return guarded([&] {
    if (index >= labels->file.dontcare.size()) {
      throw mono3d::Error(mono3d::ErrorCode::invalid_argument,
                          "DontCare index out of range");
    }
    if (box2d) *box2d = from_box2d(labels->file.dontcare[index]);
  });
}

const char* mono3d_labels_warning(const mono3d_labels* labels, size_t index) {
  if (index >= labels->file.warnings.size()) return nullptr;
  return labels->file.warnings[index].c_str();
}

mono3d_status mono3d_format_detections(const mono3d_box2d* boxes2d,
                                       const mono3d_box3d* boxes3d,
                                       const double* scores, size_t count,
                                       char** out_text) {
  return guarded([&] {
    std::vector<mono3d::Detection> dets;
    dets.reserve(count);
    for (size_t i = 0; i < count; ++i) {
      dets.push_back({to_box2d(boxes2d[i]), to_box3d(boxes3d[i]),
                      scores ? scores[i] : boxes2d[i].score});
    }
    *out_text = dup_string(mono3d::write_detections(dets));
  });
}

double mono3d_bev_iou(const mono3d_box3d* a, const mono3d_box3d* b) {
  try {
    return mono3d::bev_iou(to_box3d(*a), to_box3d(*b));
  } catch (const std::exception& e) {
    set_error(e.what());
    return -1.0;
  }
}

double mono3d_iou_3d(const mono3d_box3d* a, const mono3d_box3d* b) {
  try {
    return mono3d::iou_3d(to_box3d(*a), to_box3d(*b));
  } catch (const std::exception& e) {
    set_error(e.what());
    return -1.0;
  }
}

mono3d_status mono3d_grid_load(const char* path, mono3d_grid** out) {
  return guarded([&] { *out = new mono3d_grid{mono3d::load_grid(path)}; });
}

mono3d_status mono3d_grid_save(const mono3d_grid* grid, const char* path) {
  return guarded([&] { mono3d::save_grid(grid->grid, path); });
}

void mono3d_grid_free(mono3d_grid* grid) { delete grid; }

mono3d_status mono3d_grid_shape(const mono3d_grid* grid, int* rows, int* cols,
                                int* frame, size_t* valid_count) {
  return guarded([&] {
    if (rows) *rows = grid->grid.rows;
    if (cols) *cols = grid->grid.cols;
    if (frame) *frame = static_cast<int>(grid->grid.frame);
    if (valid_count) *valid_count = grid->grid.valid_count();
  });
}

mono3d_loss_weights mono3d_default_loss_weights(void) {
  return {1.0, 1.0, 1.0, 1.0, 1.0, 1.0};
}

mono3d_optimizer_config mono3d_default_optimizer_config(void) {
  const mono3d::OptimizerConfig cfg;
  return {cfg.max_iters, cfg.step_init, cfg.backtrack,
          cfg.grad_tol,  cfg.loss_tol,  cfg.max_offset};
}

mono3d_status mono3d_refine_pose(const mono3d_camera* camera,
                                 const mono3d_box2d* box,
                                 const double proposal[3],
                                 const double dims[3], double beta,
                                 const mono3d_grid* local_grid,
                                 const mono3d_grid* camera_grid,
                                 const mono3d_loss_weights* weights,
                                 const mono3d_optimizer_config* config,
                                 mono3d_refine_result* result) {
  return guarded([&] {
    mono3d::Proposal prop;
    prop.p = mono3d::Vec3(proposal[0], proposal[1], proposal[2]);
    prop.box = to_box2d(*box);
    prop.beta = beta;
    prop.dims = mono3d::Vec3(dims[0], dims[1], dims[2]);

    mono3d::LossWeights lw;
    if (weights) {
      lw.w_t = weights->w_t;
      lw.w_theta = weights->w_theta;
      lw.w_dim = weights->w_dim;
      lw.w_local = weights->w_local;
      lw.w_z = weights->w_z;
      lw.w_proj = weights->w_proj;
    }
    mono3d::OptimizerConfig cfg;
    if (config) {
      cfg.max_iters = config->max_iters;
      cfg.step_init = config->step_init;
      cfg.backtrack = config->backtrack;
      cfg.grad_tol = config->grad_tol;
      cfg.loss_tol = config->loss_tol;
      cfg.max_offset = config->max_offset;
    }
    std::vector<double> gt_depth;
    if (camera_grid) gt_depth = camera_grid->grid.depth_channel();
    if (!camera_grid) lw.w_z = 0.0;

    const mono3d::RefineResult r = mono3d::refine_pose(
        prop, local_grid->grid, gt_depth, camera->model, lw, cfg);
    result->dt_y = r.offsets.dt_y;
    result->dt_z = r.offsets.dt_z;
    result->refined = from_box3d(r.refined);
    result->final_loss = r.final_loss;
    result->iterations = static_cast<int>(r.trace.size()) - 1;
    result->converged_at_start = r.converged_at_start ? 1 : 0;
  });
}

mono3d_synth_params mono3d_default_synth_params(void) {
  const mono3d::SceneSpec spec;
  mono3d_synth_params params{};
  params.out_root = nullptr;
  params.scenes = 10;
  params.seed = 1;
  params.objects_per_scene = spec.num_objects;
  params.z_min = spec.z_min;
  params.z_max = spec.z_max;
  params.image_width = spec.image_width;
  params.image_height = spec.image_height;
  params.background_depth = spec.background_depth;
  params.on_axis = 0;
  return params;
}

mono3d_status mono3d_cmd_synth(const mono3d_synth_params* params,
                               char** report, char** warnings) {
  return guarded([&] {
    if (!params || !params->out_root) {
      throw mono3d::Error(mono3d::ErrorCode::invalid_argument,
                          "out_root is required");
    }
    mono3d::SynthParams p;
    p.out_root = params->out_root;
    p.scenes = params->scenes;
    p.seed = params->seed;
    p.scene.num_objects = params->objects_per_scene;
    p.scene.z_min = params->z_min;
    p.scene.z_max = params->z_max;
    p.scene.image_width = params->image_width;
    p.scene.image_height = params->image_height;
    p.scene.background_depth = params->background_depth;
    p.scene.on_axis = params->on_axis != 0;
    fill_report(mono3d::cmd_synth(p), report, warnings);
  });
}

mono3d_gen_instances_params mono3d_default_gen_instances_params(void) {
  const mono3d::InstanceGridParams grid;
  mono3d_gen_instances_params params{};
  params.grid_size = grid.grid_size;
  params.eps_seg = grid.eps_seg;
  params.k_min = grid.k_min;
  params.jobs = 1;
  return params;
}

mono3d_status mono3d_cmd_gen_instances(
    const mono3d_gen_instances_params* params, char** report,
    char** warnings) {
  return guarded([&] {
    if (!params || !params->dataset_root) {
      throw mono3d::Error(mono3d::ErrorCode::invalid_argument,
                          "dataset_root is required");
    }
    mono3d::GenInstancesParams p;
    p.dataset_root = params->dataset_root;
    p.out_dir = or_default(params->out_dir, "");
    p.grid.grid_size = params->grid_size;
    p.grid.eps_seg = params->eps_seg;
    p.grid.k_min = params->k_min;
    p.jobs = params->jobs;
    fill_report(mono3d::cmd_gen_instances(p), report, warnings);
  });
}

mono3d_propose_params mono3d_default_propose_params(void) {
  mono3d_propose_params params{};
  params.jitter_seed = 1;
  return params;
}

mono3d_status mono3d_cmd_propose(const mono3d_propose_params* params,
                                 char** report, char** warnings) {
  return guarded([&] {
    if (!params || !params->dataset_root) {
      throw mono3d::Error(mono3d::ErrorCode::invalid_argument,
                          "dataset_root is required");
    }
    mono3d::ProposeParams p;
    p.dataset_root = params->dataset_root;
    p.detections_dir = or_default(params->detections_dir, "");
    p.out_dir = or_default(params->out_dir, "");
    p.use_mean_dims = params->use_mean_dims != 0;
    if (params->means_file) {
      p.means = mono3d::parse_class_means(
          mono3d::read_text_file(params->means_file));
    }
    p.box_jitter = params->box_jitter;
    p.jitter_seed = params->jitter_seed;
    fill_report(mono3d::cmd_propose(p), report, warnings);
  });
}

mono3d_refine_params mono3d_default_refine_params(void) {
  mono3d_refine_params params{};
  params.weights = mono3d_default_loss_weights();
  params.optimizer = mono3d_default_optimizer_config();
  params.jobs = 1;
  return params;
}

mono3d_status mono3d_cmd_refine(const mono3d_refine_params* params,
                                char** report, char** warnings) {
  return guarded([&] {
    if (!params || !params->dataset_root) {
      throw mono3d::Error(mono3d::ErrorCode::invalid_argument,
                          "dataset_root is required");
    }
    mono3d::RefineParams p;
    p.dataset_root = params->dataset_root;
    p.proposals_dir = or_default(params->proposals_dir, "");
    p.instances_dir = or_default(params->instances_dir, "");
    p.out_dir = or_default(params->out_dir, "");
    p.traces_dir = or_default(params->traces_dir, "");
    p.weights.w_t = params->weights.w_t;
    p.weights.w_theta = params->weights.w_theta;
    p.weights.w_dim = params->weights.w_dim;
    p.weights.w_local = params->weights.w_local;
    p.weights.w_z = params->weights.w_z;
    p.weights.w_proj = params->weights.w_proj;
    p.optimizer.max_iters = params->optimizer.max_iters;
    p.optimizer.step_init = params->optimizer.step_init;
    p.optimizer.backtrack = params->optimizer.backtrack;
    p.optimizer.grad_tol = params->optimizer.grad_tol;
    p.optimizer.loss_tol = params->optimizer.loss_tol;
    p.optimizer.max_offset = params->optimizer.max_offset;
    p.projection_only = params->projection_only != 0;
    p.jobs = params->jobs;
    fill_report(mono3d::cmd_refine(p), report, warnings);
  });
}

mono3d_eval_params mono3d_default_eval_params(void) {
  mono3d_eval_params params{};
  params.recall_points = 11;
  return params;
}

mono3d_status mono3d_cmd_eval(const mono3d_eval_params* params, char** report,
                              char** warnings) {
  return guarded([&] {
    if (!params || !params->dataset_root || !params->detections_dir) {
      throw mono3d::Error(mono3d::ErrorCode::invalid_argument,
                          "dataset_root and detections_dir are required");
    }
    mono3d::EvalParams p;
    p.dataset_root = params->dataset_root;
    p.detections_dir = params->detections_dir;
    p.out_dir = or_default(params->out_dir, "");
    if (params->classes) {
      p.classes.clear();
      std::istringstream ss(params->classes);
      std::string tok;
      while (std::getline(ss, tok, ',')) {
        if (!tok.empty()) p.classes.push_back(tok);
      }
    }
    if (params->thresholds) {
      p.thresholds.clear();
      std::istringstream ss(params->thresholds);
      std::string tok;
      while (std::getline(ss, tok, ',')) {
        if (!tok.empty()) p.thresholds.push_back(std::stod(tok));
      }
    }
    p.recall_points = params->recall_points;
    fill_report(mono3d::cmd_eval(p), report, warnings);
  });
}

mono3d_status mono3d_cmd_viz(const mono3d_viz_params* params, char** report,
                             char** warnings) {
  return guarded([&] {
    if (!params || !params->dataset_root || !params->frame ||
        !params->out_svg) {
      throw mono3d::Error(mono3d::ErrorCode::invalid_argument,
                          "dataset_root, frame and out_svg are required");
    }
    mono3d::VizParams p;
    p.dataset_root = params->dataset_root;
    p.frame = params->frame;
    p.detections_dir = or_default(params->detections_dir, "");
    p.instances_dir = or_default(params->instances_dir, "");
    p.out_svg = params->out_svg;
    fill_report(mono3d::cmd_viz(p), report, warnings);
  });
}

}  // extern "C"
