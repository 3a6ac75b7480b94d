#pragma once

#include "mono3d/eval.hpp"
#include "mono3d/instance_data.hpp"
#include "mono3d/kitti_io.hpp"
#include "mono3d/losses.hpp"
#include "mono3d/refine.hpp"
#include "mono3d/synth.hpp"
#include "mono3d/types.hpp"

#include <map>

namespace mono3d {

// Dataset layout: root/{calib,label_2,depth}/<frame>.{txt,png} with 6-digit
// zero-padded frame ids; instance records, proposals and refined detections
// live in sibling directories.
struct DatasetPaths {
  std::string root;
  std::string calib_dir() const { return root + "/calib"; }
  std::string label_dir() const { return root + "/label_2"; }
  std::string depth_dir() const { return root + "/depth"; }
  std::string calib_file(const std::string& frame) const {
    return calib_dir() + "/" + frame + ".txt";
  }
  std::string label_file(const std::string& frame) const {
    return label_dir() + "/" + frame + ".txt";
  }
  std::string depth_file(const std::string& frame) const {
    return depth_dir() + "/" + frame + ".png";
  }
};

std::vector<std::string> list_frames(const std::string& dir,
                                     const std::string& extension = ".txt");

// Per-class mean dimensions (d_x, d_y, d_z).
using ClassMeans = std::map<std::string, Vec3>;
ClassMeans default_class_means();
ClassMeans compute_class_mean_dims(const std::vector<LabeledObject>& objects);
// "label d_x d_y d_z" per line; '#' starts a comment.
ClassMeans parse_class_means(const std::string& text);

struct CommandReport {
  std::string text;                   // human-readable summary
  std::vector<std::string> warnings;  // non-fatal, for stderr
};

// Deterministic frame-parallel map: results are produced for indices
// 0..count-1 and reduced in index order regardless of the job count.
void parallel_for(size_t count, int jobs,
                  const std::function<void(size_t)>& fn);

struct SynthParams {
  std::string out_root;
  int scenes = 10;
  uint64_t seed = 1;
  SceneSpec scene;  // seed is re-derived per scene from `seed`
};
CommandReport cmd_synth(const SynthParams& params);

struct GenInstancesParams {
  std::string dataset_root;
  std::string out_dir;  // default <root>/instances
  InstanceGridParams grid;
  int jobs = 1;
};
CommandReport cmd_gen_instances(const GenInstancesParams& params);

struct ProposeParams {
  std::string dataset_root;
  std::string detections_dir;  // empty: propose from ground-truth labels
  std::string out_dir;         // default <root>/proposals
  bool use_mean_dims = false;  // substitute class means for the true dims
  ClassMeans means = default_class_means();
  double box_jitter = 0.0;     // Gaussian 2D box jitter, relative to box size
  uint64_t jitter_seed = 1;
  double min_jitter_iou = 0.7; // resample until IoU with the original is kept
};
CommandReport cmd_propose(const ProposeParams& params);

struct RefineParams {
  std::string dataset_root;
  std::string proposals_dir;  // default <root>/proposals
  std::string instances_dir;  // default <root>/instances
  std::string out_dir;        // default <root>/refined
  std::string traces_dir;     // empty: no traces written
  LossWeights weights;
  OptimizerConfig optimizer;
  bool projection_only = false;  // inference mode: no depth grids used
  int jobs = 1;
};
CommandReport cmd_refine(const RefineParams& params);

struct EvalParams {
  std::string dataset_root;
  std::string detections_dir;
  std::string out_dir;  // PR curves (text + SVG); empty: no files
  std::vector<std::string> classes = {"Car", "Pedestrian", "Cyclist"};
  std::vector<double> thresholds = {0.5, 0.7};
  std::vector<DifficultyFilter> difficulties = DifficultyFilter::all();
  int recall_points = 11;
};
CommandReport cmd_eval(const EvalParams& params);

struct VizParams {
  std::string dataset_root;
  std::string frame;
  std::string detections_dir;  // optional
  std::string instances_dir;   // optional
  std::string out_svg;
};
CommandReport cmd_viz(const VizParams& params);

}  // namespace mono3d
