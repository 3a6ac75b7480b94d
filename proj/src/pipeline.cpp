#include "mono3d/pipeline.hpp"

#include "mono3d/viz.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <mutex>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;

namespace mono3d {

namespace {

uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d649bb133111ebULL;
  return x ^ (x >> 31);
}

std::string frame_name(int index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%06d", index);
  return buf;
}

void ensure_dir(const std::string& path) {
  std::error_code ec;
  fs::create_directories(path, ec);
  if (ec) {
    throw Error(ErrorCode::io_error, "cannot create directory " + path);
  }
}

std::string record_path(const std::string& dir, const std::string& frame,
                        size_t idx, const char* tag) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "_%03zu_%s.igrid", idx, tag);
  return dir + "/" + frame + buf;
}

double iou_2d(const Box2D& a, const Box2D& b) {
  const double iw = std::min(a.u2, b.u2) - std::max(a.u1, b.u1);
  const double ih = std::min(a.v2, b.v2) - std::max(a.v1, b.v1);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  return inter / (a.width() * a.height() + b.width() * b.height() - inter);
}

std::string depth_error_table(const std::vector<DepthPair>& pairs) {
  std::vector<std::string> classes;
  for (const auto& p : pairs) {
    if (std::find(classes.begin(), classes.end(), p.gt_box3d.label) ==
        classes.end()) {
      classes.push_back(p.gt_box3d.label);
    }
  }
  std::sort(classes.begin(), classes.end());

  std::ostringstream out;
  out << "Depth error (mean / std) [m]\n";
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-12s %-14s %-14s %-14s\n", "class", "easy",
                "moderate", "hard");
  out << buf;
  for (const auto& cls : classes) {
    std::vector<DepthPair> cls_pairs;
    for (const auto& p : pairs) {
      if (p.gt_box3d.label == cls) cls_pairs.push_back(p);
    }
    out << cls;
    for (int pad = static_cast<int>(cls.size()); pad < 12; ++pad) out << ' ';
    for (const auto& filter : DifficultyFilter::all()) {
      std::string cell = "-";
      try {
        const DepthErrorStats stats = depth_error_stats(cls_pairs, filter);
        std::snprintf(buf, sizeof(buf), "%.2f / %.2f", stats.mean_abs,
                      stats.stddev);
        cell = buf;
      } catch (const Error&) {
      }
      std::snprintf(buf, sizeof(buf), " %-14s", cell.c_str());
      out << buf;
    }
    out << '\n';
  }
  return out.str();
}

class GaussianRng {
 public:
  explicit GaussianRng(uint64_t seed) : gen_(seed) {}
  double uniform() { return ((gen_() >> 11) + 1.0) * 0x1.0p-53; }  // (0, 1]
  double gaussian() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

 private:
  std::mt19937_64 gen_;
};

Box2D jitter_box(const Box2D& box, double sigma, double min_iou,
                 GaussianRng& rng) {
  for (int attempt = 0; attempt < 100; ++attempt) {
    Box2D out = box;
    const double w = box.width() * (1.0 + sigma * rng.gaussian());
    const double h = box.height() * (1.0 + sigma * rng.gaussian());
    const Vec2 c = box.center();
    const double cu = c.x() + sigma * box.width() * rng.gaussian();
    const double cv = c.y() + sigma * box.height() * rng.gaussian();
    out.u1 = cu - 0.5 * w;
    out.u2 = cu + 0.5 * w;
    out.v1 = cv - 0.5 * h;
    out.v2 = cv + 0.5 * h;
    if (out.valid() && iou_2d(out, box) >= min_iou) return out;
  }
  return box;
}

}  // namespace

std::vector<std::string> list_frames(const std::string& dir,
                                     const std::string& extension) {
  if (!fs::is_directory(dir)) {
    throw Error(ErrorCode::io_error, "not a directory: " + dir);
  }
  std::vector<std::string> frames;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == extension) {
      frames.push_back(entry.path().stem().string());
    }
  }
  std::sort(frames.begin(), frames.end());
  return frames;
}

ClassMeans default_class_means() {
  ClassMeans means;
  for (const auto& c : default_class_specs()) means[c.label] = c.mean_dims;
  return means;
}

ClassMeans parse_class_means(const std::string& text) {
  ClassMeans means;
  std::istringstream ss(text);
  std::string line;
  int line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::istringstream ls(line);
    std::string label;
    if (!(ls >> label)) continue;
    Vec3 dims;
    if (!(ls >> dims.x() >> dims.y() >> dims.z()) || !(dims.minCoeff() > 0)) {
      throw Error(ErrorCode::malformed_line,
                  "class means line " + std::to_string(line_no) +
                      ": expected 'label d_x d_y d_z' with positive dims");
    }
    means[label] = dims;
  }
  return means;
}

ClassMeans compute_class_mean_dims(const std::vector<LabeledObject>& objects) {
  ClassMeans sums;
  std::map<std::string, size_t> counts;
  for (const auto& obj : objects) {
    auto [it, fresh] = sums.try_emplace(obj.box3d.label, Vec3::Zero());
    it->second += obj.box3d.dims;
    ++counts[obj.box3d.label];
  }
  for (auto& [label, sum] : sums) sum /= static_cast<double>(counts[label]);
  return sums;
}

void parallel_for(size_t count, int jobs, const std::function<void(size_t)>& fn) {
  const int workers =
      std::max(1, std::min<int>(jobs, static_cast<int>(count)));
  if (workers == 1) {
    for (size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

CommandReport cmd_synth(const SynthParams& params) {
  DatasetPaths paths{params.out_root};
  ensure_dir(paths.calib_dir());
  ensure_dir(paths.label_dir());
  ensure_dir(paths.depth_dir());

  size_t total_objects = 0;
  for (int i = 0; i < params.scenes; ++i) {
    SceneSpec spec = params.scene;
    spec.seed = splitmix64(params.seed + static_cast<uint64_t>(i));
    const SynthScene scene = generate_scene(spec);
    const std::string frame = frame_name(i);
    write_text_file(paths.calib_file(frame), scene.calib_text);
    write_text_file(paths.label_file(frame), scene.labels_text);
    write_depth_png_file(scene.depth, paths.depth_file(frame));
    total_objects += scene.objects.size();
  }

  CommandReport report;
  std::ostringstream out;
  out << "wrote " << params.scenes << " frames, " << total_objects
      << " objects under " << params.out_root << "\n";
  report.text = out.str();
  return report;
}

CommandReport cmd_gen_instances(const GenInstancesParams& params) {
  DatasetPaths paths{params.dataset_root};
  const std::string out_dir =
      params.out_dir.empty() ? params.dataset_root + "/instances"
                             : params.out_dir;
  ensure_dir(out_dir);
  const auto frames = list_frames(paths.label_dir());

  struct FrameResult {
    size_t records = 0;
    size_t skipped = 0;
    double max_eproj = 0.0;
    double max_zloss = 0.0;
    std::vector<std::string> warnings;
    std::string error;
  };
  std::vector<FrameResult> results(frames.size());

  parallel_for(frames.size(), params.jobs, [&](size_t fi) {
    FrameResult& res = results[fi];
    const std::string& frame = frames[fi];
    try {
      const CameraModel camera =
          parse_calib(read_text_file(paths.calib_file(frame)));
      const LabelFile labels =
          parse_labels(read_text_file(paths.label_file(frame)));
      for (const auto& w : labels.warnings) {
        res.warnings.push_back(frame + ": " + w);
      }
      const DepthMap raw_depth = read_depth_png_file(paths.depth_file(frame));
      DepthMap dense;
      try {
        dense = densify_depth(raw_depth);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::empty_depth) throw;
        res.skipped = labels.objects.size();
        res.warnings.push_back(frame + ": empty depth map, all " +
                               std::to_string(res.skipped) +
                               " instances skipped");
        return;
      }
      const SceneTensor scene = depth_to_scene(dense, camera);

      for (size_t k = 0; k < labels.objects.size(); ++k) {
        const auto& obj = labels.objects[k];
        std::vector<PixelPoint> points;
        try {
          points = segment_instance(scene, obj.box3d, params.grid.eps_seg);
        } catch (const Error& e) {
          if (e.code() != ErrorCode::empty_instance) throw;
          ++res.skipped;
          continue;
        }
        InstanceGrid grid =
            make_instance_grid(points, obj.box2d, params.grid.grid_size);
        if (grid.valid_count() < static_cast<size_t>(params.grid.k_min)) {
          ++res.skipped;
          continue;
        }
        const double alpha_h = viewing_angles(camera, obj.box2d).alpha_h;
        const InstanceGrid local = grid_to_local(grid, obj.box3d, alpha_h);
        save_grid(grid, record_path(out_dir, frame, k, "camera"));
        save_grid(local, record_path(out_dir, frame, k, "local"));
        res.records += 1;

        const FrameTransform t = build_T_CO(obj.box3d.t, alpha_h);
        const LossTerm proj = projection_loss(local, t, camera, obj.box2d);
        const LossTerm z = z_loss(local, t, grid.depth_channel());
        res.max_eproj = std::max(res.max_eproj, proj.value);
        res.max_zloss = std::max(res.max_zloss, z.value);
      }
    } catch (const Error& e) {
      res.error = frame + ": " + e.what();
    }
  });

  CommandReport report;
  size_t records = 0, skipped = 0;
  double max_eproj = 0.0, max_zloss = 0.0;
  std::vector<std::string> errors;
  for (const auto& res : results) {
    records += res.records;
    skipped += res.skipped;
    max_eproj = std::max(max_eproj, res.max_eproj);
    max_zloss = std::max(max_zloss, res.max_zloss);
    report.warnings.insert(report.warnings.end(), res.warnings.begin(),
                           res.warnings.end());
    if (!res.error.empty()) errors.push_back(res.error);
  }
  if (!errors.empty()) {
    std::string joined = std::to_string(errors.size()) + " frame error(s):";
    for (const auto& e : errors) joined += "\n  " + e;
    throw Error(ErrorCode::io_error, joined);
  }
  std::ostringstream out;
  char buf[128];
  out << "instances: " << records << " records (" << skipped
      << " skipped) under " << out_dir << "\n";
  std::snprintf(buf, sizeof(buf),
                "E_proj at ground truth: %.3f (max), z-loss %.3g (max)\n",
                max_eproj, max_zloss);
  out << buf;
  report.text = out.str();
  return report;
}

CommandReport cmd_propose(const ProposeParams& params) {
  DatasetPaths paths{params.dataset_root};
  const std::string out_dir =
      params.out_dir.empty() ? params.dataset_root + "/proposals"
                             : params.out_dir;
  ensure_dir(out_dir);
  const bool from_gt = params.detections_dir.empty();
  const auto frames =
      list_frames(from_gt ? paths.label_dir() : params.detections_dir);

  CommandReport report;
  std::vector<DepthPair> depth_pairs;
  size_t proposed = 0, skipped = 0;

  for (size_t fi = 0; fi < frames.size(); ++fi) {
    const std::string& frame = frames[fi];
    const CameraModel camera =
        parse_calib(read_text_file(paths.calib_file(frame)));
    const std::string source_file =
        from_gt ? paths.label_file(frame)
                : params.detections_dir + "/" + frame + ".txt";
    const LabelFile labels = parse_labels(read_text_file(source_file));
    GaussianRng rng(splitmix64(params.jitter_seed + fi));

    std::vector<Detection> proposals;
    for (const auto& obj : labels.objects) {
      Box2D box = obj.box2d;
      if (params.box_jitter > 0.0) {
        box = jitter_box(box, params.box_jitter, params.min_jitter_iou, rng);
      }
      Vec3 dims = obj.box3d.dims;
      if (params.use_mean_dims) {
        auto it = params.means.find(obj.box3d.label);
        if (it == params.means.end()) {
          report.warnings.push_back(frame + ": no mean dims for class " +
                                    obj.box3d.label + ", using labeled dims");
        } else {
          dims = it->second;
        }
      }
      Proposal prop;
      try {
        prop = make_proposal(camera, box, dims, obj.box3d.beta());
      } catch (const Error& e) {
        if (e.code() != ErrorCode::degenerate_box) throw;
        report.warnings.push_back(frame + ": degenerate 2D box, skipped");
        ++skipped;
        continue;
      }
      Detection det;
      det.box2d = box;
      det.box3d.label = obj.box3d.label;
      det.box3d.t = prop.p;
      det.box3d.dims = dims;
      det.box3d.yaw = prop.theta;
      det.score = obj.box2d.score;
      proposals.push_back(det);
      ++proposed;
      if (from_gt) {
        depth_pairs.push_back(
            {prop.p.z(), obj.box3d.t.z(), obj.box2d, obj.box3d});
      }
    }
    write_text_file(out_dir + "/" + frame + ".txt",
                    write_detections(proposals));
  }

  std::ostringstream out;
  out << "proposals: " << proposed << " written (" << skipped
      << " skipped) under " << out_dir << "\n";
  if (from_gt && !depth_pairs.empty()) {
    out << depth_error_table(depth_pairs);
  } else if (!from_gt) {
    out << "depth error table skipped (external detections)\n";
  }
  report.text = out.str();
  return report;
}

CommandReport cmd_refine(const RefineParams& params) {
  DatasetPaths paths{params.dataset_root};
  const std::string proposals_dir =
      params.proposals_dir.empty() ? params.dataset_root + "/proposals"
                                   : params.proposals_dir;
  const std::string instances_dir =
      params.instances_dir.empty() ? params.dataset_root + "/instances"
                                   : params.instances_dir;
  const std::string out_dir = params.out_dir.empty()
                                  ? params.dataset_root + "/refined"
                                  : params.out_dir;
  ensure_dir(out_dir);
  if (!params.traces_dir.empty()) ensure_dir(params.traces_dir);
  params.weights.validate();
  params.optimizer.validate();

  const auto frames = list_frames(proposals_dir);
  {
    std::vector<std::string> missing;
    for (const auto& frame : frames) {
      if (!fs::exists(paths.calib_file(frame))) missing.push_back(frame);
    }
    if (!missing.empty()) {
      std::string msg = "frames missing calibration:";
      for (const auto& f : missing) msg += " " + f;
      throw Error(ErrorCode::id_mismatch, msg);
    }
  }

  struct FrameResult {
    std::vector<Detection> refined;
    std::vector<DepthPair> before;
    std::vector<DepthPair> after;
    std::vector<std::string> warnings;
    size_t unrefined = 0;
  };
  std::vector<FrameResult> results(frames.size());

  parallel_for(frames.size(), params.jobs, [&](size_t fi) {
    FrameResult& res = results[fi];
    const std::string& frame = frames[fi];
    const CameraModel camera =
        parse_calib(read_text_file(paths.calib_file(frame)));
    const LabelFile props =
        parse_labels(read_text_file(proposals_dir + "/" + frame + ".txt"));
    LabelFile gt;
    const std::string gt_file = paths.label_file(frame);
    if (fs::exists(gt_file)) gt = parse_labels(read_text_file(gt_file));

    for (size_t k = 0; k < props.objects.size(); ++k) {
      const auto& pobj = props.objects[k];
      const std::string local_path =
          record_path(instances_dir, frame, k, "local");
      const std::string camera_path =
          record_path(instances_dir, frame, k, "camera");
      Detection det{pobj.box2d, pobj.box3d, pobj.box2d.score};
      if (!fs::exists(local_path) || !fs::exists(camera_path)) {
        ++res.unrefined;
        res.refined.push_back(det);
        continue;
      }
      const InstanceGrid local = load_grid(local_path);
      std::vector<double> gt_depth;
      if (!params.projection_only) {
        gt_depth = load_grid(camera_path).depth_channel();
      }
      Proposal prop;
      prop.p = pobj.box3d.t;
      prop.box = pobj.box2d;
      prop.beta = pobj.box3d.beta();
      prop.dims = pobj.box3d.dims;
      prop.theta = pobj.box3d.yaw;

      LossWeights weights = params.weights;
      if (params.projection_only) weights.w_z = 0.0;
      try {
        const RefineResult r =
            refine_pose(prop, local, gt_depth, camera, weights,
                        params.optimizer);
        det.box3d = r.refined;
        det.box3d.truncation = pobj.box3d.truncation;
        det.box3d.occlusion = pobj.box3d.occlusion;
        if (!params.traces_dir.empty()) {
          char buf[32];
          std::snprintf(buf, sizeof(buf), "_%03zu.txt", k);
          write_text_file(params.traces_dir + "/" + frame + buf,
                          trace_to_text(r.trace));
        }
      } catch (const Error& e) {
        res.warnings.push_back(frame + " object " + std::to_string(k) + ": " +
                               e.what() + " (kept proposal)");
        ++res.unrefined;
      }
      res.refined.push_back(det);

      if (k < gt.objects.size()) {
        const auto& g = gt.objects[k];
        res.before.push_back(
            {pobj.box3d.t.z(), g.box3d.t.z(), g.box2d, g.box3d});
        res.after.push_back(
            {det.box3d.t.z(), g.box3d.t.z(), g.box2d, g.box3d});
      }
    }
  });

  CommandReport report;
  std::vector<DepthPair> before, after;
  size_t refined = 0, unrefined = 0;
  for (size_t fi = 0; fi < frames.size(); ++fi) {
    const auto& res = results[fi];
    write_text_file(out_dir + "/" + frames[fi] + ".txt",
                    write_detections(res.refined));
    refined += res.refined.size();
    unrefined += res.unrefined;
    before.insert(before.end(), res.before.begin(), res.before.end());
    after.insert(after.end(), res.after.begin(), res.after.end());
    report.warnings.insert(report.warnings.end(), res.warnings.begin(),
                           res.warnings.end());
  }

  std::ostringstream out;
  out << "refined: " << refined << " detections (" << unrefined
      << " kept as proposals) under " << out_dir << "\n";
  if (!before.empty()) {
    out << "before refinement:\n" << depth_error_table(before);
    out << "after refinement:\n" << depth_error_table(after);
  }
  report.text = out.str();
  return report;
}

CommandReport cmd_eval(const EvalParams& params) {
  DatasetPaths paths{params.dataset_root};
  const auto gt_frames = list_frames(paths.label_dir());
  if (gt_frames.empty()) {
    throw Error(ErrorCode::empty_set, "no ground-truth label files");
  }

  std::vector<FrameGroundTruth> gts;
  std::vector<FrameDetections> dets;
  size_t total_gt = 0;
  for (const auto& frame : gt_frames) {
    const LabelFile labels = parse_labels(read_text_file(paths.label_file(frame)));
    gts.push_back({frame, labels.objects, labels.dontcare});
    total_gt += labels.objects.size();

    const std::string det_file = params.detections_dir + "/" + frame + ".txt";
    if (fs::exists(det_file)) {
      const LabelFile parsed = parse_labels(read_text_file(det_file));
      FrameDetections fd{frame, {}};
      for (const auto& obj : parsed.objects) {
        fd.detections.push_back({obj.box2d, obj.box3d, obj.box2d.score});
      }
      dets.push_back(std::move(fd));
    }
  }
  if (total_gt == 0) {
    throw Error(ErrorCode::empty_set, "ground truth has no objects");
  }

  CommandReport report;
  if (!params.out_dir.empty()) ensure_dir(params.out_dir);
  std::ostringstream out;
  char buf[256];

  struct Metric {
    const char* name;
    IoUFn fn;
  };
  const Metric metrics[] = {{"AP_BEV", bev_iou}, {"AP_3D", iou_3d}};
  for (const auto& metric : metrics) {
    out << metric.name << " (x100, " << params.recall_points << "-point)\n";
    std::snprintf(buf, sizeof(buf), "%-12s", "class");
    out << buf << " |";
    for (double thr : params.thresholds) {
      std::snprintf(buf, sizeof(buf), " %.2f IoU:", thr);
      out << buf;
      for (const auto& d : params.difficulties) {
        std::snprintf(buf, sizeof(buf), " %-9s", d.name.c_str());
        out << buf;
      }
      out << " |";
    }
    out << '\n';
    for (const auto& cls : params.classes) {
      std::snprintf(buf, sizeof(buf), "%-12s", cls.c_str());
      out << buf << " |";
      for (double thr : params.thresholds) {
        out << "          ";
        for (const auto& d : params.difficulties) {
          const PRCurve curve =
              average_precision(dets, gts, cls, metric.fn, thr, d,
                                params.recall_points);
          std::snprintf(buf, sizeof(buf), " %-9.2f", curve.ap);
          out << buf;
          if (!params.out_dir.empty()) {
            std::ostringstream stem;
            stem << params.out_dir << "/pr_" << metric.name << '_' << cls
                 << '_' << d.name << '_' << thr;
            write_text_file(stem.str() + ".txt", pr_curve_to_text(curve));
            std::ostringstream title;
            title << metric.name << ' ' << cls << ' ' << d.name << " @"
                  << thr;
            write_text_file(stem.str() + ".svg",
                            render_pr_svg(curve, title.str()));
          }
        }
        out << " |";
      }
      out << '\n';
    }
    out << '\n';
  }
  report.text = out.str();
  return report;
}

CommandReport cmd_viz(const VizParams& params) {
  DatasetPaths paths{params.dataset_root};
  const CameraModel camera =
      parse_calib(read_text_file(paths.calib_file(params.frame)));
  LabelFile gt;
  if (fs::exists(paths.label_file(params.frame))) {
    gt = parse_labels(read_text_file(paths.label_file(params.frame)));
  }
  std::vector<Detection> dets;
  if (!params.detections_dir.empty()) {
    const std::string file = params.detections_dir + "/" + params.frame + ".txt";
    const LabelFile parsed = parse_labels(read_text_file(file));
    for (const auto& obj : parsed.objects) {
      dets.push_back({obj.box2d, obj.box3d, obj.box2d.score});
    }
  }
  std::vector<InstanceGrid> grids;
  if (!params.instances_dir.empty()) {
    for (size_t k = 0; k < gt.objects.size(); ++k) {
      const std::string path =
          record_path(params.instances_dir, params.frame, k, "camera");
      if (fs::exists(path)) grids.push_back(load_grid(path));
    }
  }

  ImageMeta meta;
  meta.frame_id = params.frame;
  // Infer extents from the depth map when present, else from the boxes.
  if (fs::exists(paths.depth_file(params.frame))) {
    const DepthMap depth = read_depth_png_file(paths.depth_file(params.frame));
    meta.width = depth.width;
    meta.height = depth.height;
  } else {
    meta.width = static_cast<int>(2.0 * camera.cu());
    meta.height = static_cast<int>(2.0 * camera.cv());
  }

  write_text_file(params.out_svg,
                  render_frame_svg(camera, meta, gt.objects, dets, grids));
  CommandReport report;
  report.text = "wrote " + params.out_svg + "\n";
  return report;
}

}  // namespace mono3d
