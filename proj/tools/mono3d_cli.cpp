// Command-line front end for the mono3d shared library. All functionality
// lives behind the C API in mono3d/mono3d.h; this file only parses flags.

#include <mono3d/mono3d.h>

#include <CLI11.hpp>

#include <cstdio>
#include <string>

namespace {

void print_outputs(char* report, char* warnings) {
  if (warnings && warnings[0] != '\0') {
    std::fprintf(stderr, "%s\n", warnings);
  }
  if (report && report[0] != '\0') {
    std::fputs(report, stdout);
  }
  mono3d_string_free(report);
  mono3d_string_free(warnings);
}

int finish(mono3d_status status, char* report, char* warnings) {
  print_outputs(report, warnings);
  if (status != MONO3D_OK) {
    std::fprintf(stderr, "error: %s: %s\n", mono3d_status_name(status),
                 mono3d_last_error());
    return static_cast<int>(status);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monocular 3D detection geometry pipeline"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read options from a key=value file");

  // synth ------------------------------------------------------------------
  mono3d_synth_params synth = mono3d_default_synth_params();
  std::string synth_out;
  auto* synth_cmd =
      app.add_subcommand("synth", "Generate a synthetic KITTI-layout dataset");
  synth_cmd->add_option("--out", synth_out, "Dataset root to create")
      ->required();
  synth_cmd->add_option("--scenes", synth.scenes, "Number of frames");
  synth_cmd->add_option("--seed", synth.seed, "Master seed");
  synth_cmd->add_option("--objects", synth.objects_per_scene,
                        "Objects per frame");
  synth_cmd->add_option("--z-min", synth.z_min, "Nearest centroid depth [m]");
  synth_cmd->add_option("--z-max", synth.z_max, "Farthest centroid depth [m]");
  synth_cmd->add_option("--image-width", synth.image_width, "Image width [px]");
  synth_cmd->add_option("--image-height", synth.image_height,
                        "Image height [px]");
  synth_cmd->add_option("--background-depth", synth.background_depth,
                        "Background plane depth [m]");
  synth_cmd->add_flag("--on-axis", synth.on_axis,
                      "Place centroids on the principal axis");

  // gen-instances ------------------------------------------------------------
  mono3d_gen_instances_params gen = mono3d_default_gen_instances_params();
  std::string gen_root, gen_out;
  auto* gen_cmd = app.add_subcommand(
      "gen-instances", "Generate instance grid records from depth maps");
  gen_cmd->add_option("--dataset", gen_root, "Dataset root")->required();
  gen_cmd->add_option("--out", gen_out, "Output directory (default <root>/instances)");
  gen_cmd->add_option("--grid", gen.grid_size, "Grid resolution (default 48)");
  gen_cmd->add_option("--eps-seg", gen.eps_seg,
                      "Segmentation margin in meters (default 0)");
  gen_cmd->add_option("--kmin", gen.k_min, "Minimum points per instance");
  gen_cmd->add_option("--jobs", gen.jobs, "Worker threads");

  // propose -------------------------------------------------------------------
  mono3d_propose_params propose = mono3d_default_propose_params();
  std::string prop_root, prop_dets, prop_out, prop_means;
  auto* prop_cmd = app.add_subcommand(
      "propose", "3D centroid proposals from 2D boxes, with depth-error table");
  prop_cmd->add_option("--dataset", prop_root, "Dataset root")->required();
  prop_cmd->add_option("--detections", prop_dets,
                       "Detections directory (default: ground-truth labels)");
  prop_cmd->add_option("--out", prop_out,
                       "Output directory (default <root>/proposals)");
  prop_cmd->add_option("--means", prop_means,
                       "Class mean dimensions file (label d_x d_y d_z)");
  prop_cmd->add_flag("--use-mean-dims", propose.use_mean_dims,
                     "Use class mean dims instead of labeled dims");
  prop_cmd->add_option("--box-jitter", propose.box_jitter,
                       "Gaussian 2D box jitter, relative (keeps IoU >= 0.7)");
  prop_cmd->add_option("--jitter-seed", propose.jitter_seed, "Jitter seed");

  // refine ----------------------------------------------------------------------
  mono3d_refine_params refine = mono3d_default_refine_params();
  std::string ref_root, ref_props, ref_insts, ref_out, ref_traces;
  auto* ref_cmd = app.add_subcommand(
      "refine", "Optimize proposal offsets against reconstruction losses");
  ref_cmd->add_option("--dataset", ref_root, "Dataset root")->required();
  ref_cmd->add_option("--proposals", ref_props,
                      "Proposals directory (default <root>/proposals)");
  ref_cmd->add_option("--instances", ref_insts,
                      "Instance records directory (default <root>/instances)");
  ref_cmd->add_option("--out", ref_out,
                      "Output directory (default <root>/refined)");
  ref_cmd->add_option("--traces", ref_traces, "Per-object loss trace directory");
  ref_cmd->add_option("--w-z", refine.weights.w_z, "Z-channel loss weight");
  ref_cmd->add_option("--w-proj", refine.weights.w_proj,
                      "Projection loss weight");
  ref_cmd->add_option("--max-iters", refine.optimizer.max_iters,
                      "Optimizer iteration cap");
  ref_cmd->add_option("--step-init", refine.optimizer.step_init,
                      "Initial line-search step");
  ref_cmd->add_option("--grad-tol", refine.optimizer.grad_tol,
                      "Gradient stopping tolerance");
  ref_cmd->add_option("--max-offset", refine.optimizer.max_offset,
                      "Offset bound [m]");
  ref_cmd->add_flag("--projection-only", refine.projection_only,
                    "Inference mode: no depth grids, projection loss only");
  ref_cmd->add_option("--jobs", refine.jobs, "Worker threads");

  // eval ---------------------------------------------------------------------
  mono3d_eval_params eval = mono3d_default_eval_params();
  std::string eval_root, eval_dets, eval_out, eval_classes, eval_thresholds;
  auto* eval_cmd =
      app.add_subcommand("eval", "AP_BEV / AP_3D tables and PR curves");
  eval_cmd->add_option("--dataset", eval_root, "Dataset root (ground truth)")
      ->required();
  eval_cmd->add_option("--detections", eval_dets, "Detections directory")
      ->required();
  eval_cmd->add_option("--out", eval_out, "PR curve output directory");
  eval_cmd->add_option("--classes", eval_classes,
                       "Comma-separated classes (default Car,Pedestrian,Cyclist)");
  eval_cmd->add_option("--thresholds", eval_thresholds,
                       "Comma-separated IoU thresholds (default 0.5,0.7)");
  eval_cmd->add_option("--ap-points", eval.recall_points,
                       "Recall sample count: 11 or 40");

  // viz -----------------------------------------------------------------------
  std::string viz_root, viz_frame, viz_dets, viz_insts, viz_out;
  auto* viz_cmd =
      app.add_subcommand("viz", "Static SVG with image-plane and BEV views");
  viz_cmd->add_option("--dataset", viz_root, "Dataset root")->required();
  viz_cmd->add_option("--frame", viz_frame, "Frame id, e.g. 000000")
      ->required();
  viz_cmd->add_option("--detections", viz_dets, "Detections directory");
  viz_cmd->add_option("--instances", viz_insts, "Instance records directory");
  viz_cmd->add_option("--out", viz_out, "Output SVG path")->required();

  CLI11_PARSE(app, argc, argv);

  char* report = nullptr;
  char* warnings = nullptr;
  mono3d_status status = MONO3D_ERR_INVALID_ARGUMENT;

  if (synth_cmd->parsed()) {
    synth.out_root = synth_out.c_str();
    status = mono3d_cmd_synth(&synth, &report, &warnings);
  } else if (gen_cmd->parsed()) {
    gen.dataset_root = gen_root.c_str();
    gen.out_dir = gen_out.empty() ? nullptr : gen_out.c_str();
    status = mono3d_cmd_gen_instances(&gen, &report, &warnings);
  } else if (prop_cmd->parsed()) {
    propose.dataset_root = prop_root.c_str();
    propose.detections_dir = prop_dets.empty() ? nullptr : prop_dets.c_str();
    propose.out_dir = prop_out.empty() ? nullptr : prop_out.c_str();
    propose.means_file = prop_means.empty() ? nullptr : prop_means.c_str();
    status = mono3d_cmd_propose(&propose, &report, &warnings);
  } else if (ref_cmd->parsed()) {
    refine.dataset_root = ref_root.c_str();
    refine.proposals_dir = ref_props.empty() ? nullptr : ref_props.c_str();
    refine.instances_dir = ref_insts.empty() ? nullptr : ref_insts.c_str();
    refine.out_dir = ref_out.empty() ? nullptr : ref_out.c_str();
    refine.traces_dir = ref_traces.empty() ? nullptr : ref_traces.c_str();
    status = mono3d_cmd_refine(&refine, &report, &warnings);
  } else if (eval_cmd->parsed()) {
    eval.dataset_root = eval_root.c_str();
    eval.detections_dir = eval_dets.c_str();
    eval.out_dir = eval_out.empty() ? nullptr : eval_out.c_str();
    eval.classes = eval_classes.empty() ? nullptr : eval_classes.c_str();
    eval.thresholds =
        eval_thresholds.empty() ? nullptr : eval_thresholds.c_str();
    status = mono3d_cmd_eval(&eval, &report, &warnings);
  } else if (viz_cmd->parsed()) {
    mono3d_viz_params viz{};
    viz.dataset_root = viz_root.c_str();
    viz.frame = viz_frame.c_str();
    viz.detections_dir = viz_dets.empty() ? nullptr : viz_dets.c_str();
    viz.instances_dir = viz_insts.empty() ? nullptr : viz_insts.c_str();
    viz.out_svg = viz_out.c_str();
    status = mono3d_cmd_viz(&viz, &report, &warnings);
  }
  return finish(status, report, warnings);
}
