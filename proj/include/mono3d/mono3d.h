/* C API for the mono3d library: monocular 3D detection geometry, instance
 * reconstruction losses, optimization-based proposal refinement, and the
 * KITTI-protocol evaluation pipeline.
 *
 * Conventions:
 *   - Functions return MONO3D_OK (0) on success or a nonzero status; the
 *     message for the most recent failure on the calling thread is available
 *     via mono3d_last_error().
 *   - Objects created through mono3d_*_create/load/parse are opaque handles
 *     released with the matching mono3d_*_free().
 *   - Strings returned through char** out-params are heap-allocated and
 *     released with mono3d_string_free().
 */
#ifndef MONO3D_H
#define MONO3D_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mono3d_status {
  MONO3D_OK = 0,
  MONO3D_ERR_MISSING_KEY = 1,
  MONO3D_ERR_MALFORMED_NUMBER = 2,
  MONO3D_ERR_MALFORMED_LINE = 3,
  MONO3D_ERR_UNSUPPORTED_FORMAT = 4,
  MONO3D_ERR_BEHIND_CAMERA = 5,
  MONO3D_ERR_NON_POSITIVE_DEPTH = 6,
  MONO3D_ERR_DEGENERATE_BOX = 7,
  MONO3D_ERR_FRAME_MISMATCH = 8,
  MONO3D_ERR_MASK_MISMATCH = 9,
  MONO3D_ERR_DIMENSION_MISMATCH = 10,
  MONO3D_ERR_EMPTY_DEPTH = 11,
  MONO3D_ERR_EMPTY_INSTANCE = 12,
  MONO3D_ERR_POINT_BEHIND_CAMERA = 13,
  MONO3D_ERR_NON_FINITE_TERM = 14,
  MONO3D_ERR_DIVERGED_NON_FINITE = 15,
  MONO3D_ERR_PLACEMENT_FAILURE = 16,
  MONO3D_ERR_EMPTY_SET = 17,
  MONO3D_ERR_ID_MISMATCH = 18,
  MONO3D_ERR_IO = 19,
  MONO3D_ERR_INVALID_ARGUMENT = 20,
  MONO3D_ERR_INTERNAL = 100
} mono3d_status;

const char* mono3d_status_name(mono3d_status status);

/* Message for the most recent failure on the calling thread. */
const char* mono3d_last_error(void);

void mono3d_string_free(char* text);

/* ---- value types ------------------------------------------------------ */

typedef struct mono3d_box2d {
  double u1, v1, u2, v2;
  double score;
  char label[32];
} mono3d_box2d;

/* Camera frame: x right, y down, z forward. t is the geometric centroid,
 * dims = (d_x, d_y, d_z) with d_y the height, yaw about the camera y axis. */
typedef struct mono3d_box3d {
  double t[3];
  double dims[3];
  double yaw;
  double truncation;
  int occlusion;
  char label[32];
} mono3d_box3d;

/* ---- camera ------------------------------------------------------------ */

typedef struct mono3d_camera mono3d_camera;

/* P is the 3x4 projection matrix, row-major. */
mono3d_status mono3d_camera_create(const double P[12], mono3d_camera** out);
mono3d_status mono3d_camera_from_calib_text(const char* text,
                                            mono3d_camera** out);
mono3d_status mono3d_camera_from_calib_file(const char* path,
                                            mono3d_camera** out);
void mono3d_camera_free(mono3d_camera* camera);

/* intrinsics = (fu, fv, cu, cv, bx, by). */
mono3d_status mono3d_camera_intrinsics(const mono3d_camera* camera,
                                       double intrinsics[6]);
mono3d_status mono3d_camera_project(const mono3d_camera* camera,
                                    const double point[3], double pixel[2]);
mono3d_status mono3d_camera_backproject(const mono3d_camera* camera,
                                        const double pixel[2], double depth,
                                        double point[3]);
mono3d_status mono3d_viewing_angles(const mono3d_camera* camera,
                                    const mono3d_box2d* box, double* alpha_h,
                                    double* alpha_v);

/* Similar-triangles depth f * h / h_hat. */
mono3d_status mono3d_proposal_depth(double f, double h, double h_hat,
                                    double* depth);

/* Full proposal: centroid (p_x, p_y, p_z) and yaw theta = beta - alpha_h. */
mono3d_status mono3d_make_proposal(const mono3d_camera* camera,
                                   const mono3d_box2d* box,
                                   const double dims[3], double beta,
                                   double proposal[3], double* theta);

/* ---- KITTI label / detection text -------------------------------------- */

typedef struct mono3d_labels mono3d_labels;

mono3d_status mono3d_labels_parse(const char* text, mono3d_labels** out);
mono3d_status mono3d_labels_load(const char* path, mono3d_labels** out);
void mono3d_labels_free(mono3d_labels* labels);

size_t mono3d_labels_count(const mono3d_labels* labels);
size_t mono3d_labels_dontcare_count(const mono3d_labels* labels);
size_t mono3d_labels_warning_count(const mono3d_labels* labels);
mono3d_status mono3d_labels_get(const mono3d_labels* labels, size_t index,
                                mono3d_box2d* box2d, mono3d_box3d* box3d);
mono3d_status mono3d_labels_get_dontcare(const mono3d_labels* labels,
                                         size_t index, mono3d_box2d* box2d);
/* Returns NULL when index is out of range. */
const char* mono3d_labels_warning(const mono3d_labels* labels, size_t index);

/* KITTI 16-field detection lines (2-decimal fixed point). */
mono3d_status mono3d_format_detections(const mono3d_box2d* boxes2d,
                                       const mono3d_box3d* boxes3d,
                                       const double* scores, size_t count,
                                       char** out_text);

/* ---- metrics ------------------------------------------------------------ */

/* Rotated bird's-eye-view IoU in the x-z plane. Returns -1 on bad input. */
double mono3d_bev_iou(const mono3d_box3d* a, const mono3d_box3d* b);
/* Full 3D IoU (BEV intersection times vertical overlap). */
double mono3d_iou_3d(const mono3d_box3d* a, const mono3d_box3d* b);

/* ---- instance grid records ---------------------------------------------- */

typedef struct mono3d_grid mono3d_grid;

mono3d_status mono3d_grid_load(const char* path, mono3d_grid** out);
mono3d_status mono3d_grid_save(const mono3d_grid* grid, const char* path);
void mono3d_grid_free(mono3d_grid* grid);
/* frame: 0 = local, 1 = camera. */
mono3d_status mono3d_grid_shape(const mono3d_grid* grid, int* rows, int* cols,
                                int* frame, size_t* valid_count);

/* ---- refinement ---------------------------------------------------------- */

typedef struct mono3d_loss_weights {
  double w_t, w_theta, w_dim, w_local, w_z, w_proj;
} mono3d_loss_weights;
mono3d_loss_weights mono3d_default_loss_weights(void);

typedef struct mono3d_optimizer_config {
  int max_iters;
  double step_init;
  double backtrack;
  double grad_tol;
  double loss_tol;
  double max_offset;
} mono3d_optimizer_config;
mono3d_optimizer_config mono3d_default_optimizer_config(void);

typedef struct mono3d_refine_result {
  double dt_y, dt_z;
  mono3d_box3d refined;
  double final_loss;
  int iterations;
  int converged_at_start;
} mono3d_refine_result;

/* Minimizes the z-channel and projection-alignment losses over (dt_y, dt_z)
 * for one object. camera_grid supplies the observed depth at the instance;
 * pass NULL to refine with the projection loss alone. */
mono3d_status mono3d_refine_pose(const mono3d_camera* camera,
                                 const mono3d_box2d* box,
                                 const double proposal[3],
                                 const double dims[3], double beta,
                                 const mono3d_grid* local_grid,
                                 const mono3d_grid* camera_grid,
                                 const mono3d_loss_weights* weights,
                                 const mono3d_optimizer_config* config,
                                 mono3d_refine_result* result);

/* ---- dataset pipeline ----------------------------------------------------
 * Every command writes its outputs under the dataset directory layout
 * root/{calib,label_2,depth,instances,proposals,refined}/<frame>.* and
 * returns a human-readable summary through `report` plus newline-joined
 * non-fatal warnings through `warnings` (both optional, both released with
 * mono3d_string_free). */

typedef struct mono3d_synth_params {
  const char* out_root;
  int scenes;
  uint64_t seed;
  int objects_per_scene;
  double z_min, z_max;
  int image_width, image_height;
  double background_depth;
  int on_axis; /* centroids on the principal axis instead of the ground */
} mono3d_synth_params;
mono3d_synth_params mono3d_default_synth_params(void);
mono3d_status mono3d_cmd_synth(const mono3d_synth_params* params,
                               char** report, char** warnings);

typedef struct mono3d_gen_instances_params {
  const char* dataset_root;
  const char* out_dir; /* NULL: <root>/instances */
  int grid_size;
  double eps_seg;
  int k_min;
  int jobs;
} mono3d_gen_instances_params;
mono3d_gen_instances_params mono3d_default_gen_instances_params(void);
mono3d_status mono3d_cmd_gen_instances(
    const mono3d_gen_instances_params* params, char** report, char** warnings);

typedef struct mono3d_propose_params {
  const char* dataset_root;
  const char* detections_dir; /* NULL: propose from ground-truth labels */
  const char* out_dir;        /* NULL: <root>/proposals */
  const char* means_file;     /* "label d_x d_y d_z" lines; NULL: defaults */
  int use_mean_dims;
  double box_jitter;
  uint64_t jitter_seed;
} mono3d_propose_params;
mono3d_propose_params mono3d_default_propose_params(void);
mono3d_status mono3d_cmd_propose(const mono3d_propose_params* params,
                                 char** report, char** warnings);

typedef struct mono3d_refine_params {
  const char* dataset_root;
  const char* proposals_dir; /* NULL: <root>/proposals */
  const char* instances_dir; /* NULL: <root>/instances */
  const char* out_dir;       /* NULL: <root>/refined */
  const char* traces_dir;    /* NULL: no per-object loss traces */
  mono3d_loss_weights weights;
  mono3d_optimizer_config optimizer;
  int projection_only;
  int jobs;
} mono3d_refine_params;
mono3d_refine_params mono3d_default_refine_params(void);
mono3d_status mono3d_cmd_refine(const mono3d_refine_params* params,
                                char** report, char** warnings);

typedef struct mono3d_eval_params {
  const char* dataset_root;
  const char* detections_dir;
  const char* out_dir;    /* PR curve text/SVG files; NULL: none */
  const char* classes;    /* comma-separated; NULL: Car,Pedestrian,Cyclist */
  const char* thresholds; /* comma-separated; NULL: 0.5,0.7 */
  int recall_points;      /* 11 or 40 */
} mono3d_eval_params;
mono3d_eval_params mono3d_default_eval_params(void);
mono3d_status mono3d_cmd_eval(const mono3d_eval_params* params, char** report,
                              char** warnings);

typedef struct mono3d_viz_params {
  const char* dataset_root;
  const char* frame;
  const char* detections_dir; /* optional */
  const char* instances_dir;  /* optional */
  const char* out_svg;
} mono3d_viz_params;
mono3d_status mono3d_cmd_viz(const mono3d_viz_params* params, char** report,
                             char** warnings);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* MONO3D_H */
