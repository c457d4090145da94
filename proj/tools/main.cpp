// cu3d command line: generate synthetic scene bundles, run the instance
// consolidation pipeline, evaluate corrected maps, export labeled clouds.
//
// Exit codes: 0 ok, 1 data error (unreadable/inconsistent inputs),
// 2 usage error (bad flags or option values).

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "cu3d/bundle.hpp"
#include "cu3d/pipeline.hpp"
#include "cu3d/ply.hpp"
#include "cu3d/synthetic.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitData = 1;
constexpr int kExitUsage = 2;

const char* kClassNames[16] = {"chair", "table",   "lamp",    "sofa",   "shelf",  "plant",
                               "monitor", "cabinet", "pillow", "rug",    "mug",    "book",
                               "bottle",  "frame",   "basket", "bin"};

struct GenerateOptions {
  std::string out_dir;
  std::string spec_path;
  int objects = 10;
  int views = 20;
  int width = 128;
  int height = 96;
  int classes = 8;
  std::uint64_t seed = 0;
  double alias_rate = 0.0;
  double fragmentation_rate = 0.0;
  int boundary_noise = 0;
  double semantic_noise = 0.0;
  int workers = 1;
};

int run_generate(const GenerateOptions& opt) {
  cu3d::SceneSpec spec;
  if (!opt.spec_path.empty()) {
    spec = cu3d::load_scene_spec(opt.spec_path);
  } else {
    spec = cu3d::make_ring_scene(opt.objects, opt.views, opt.width, opt.height, opt.seed,
                                 opt.classes);
  }

  cu3d::CorruptionSpec corruption;
  corruption.alias_rate = opt.alias_rate;
  corruption.fragmentation_rate = opt.fragmentation_rate;
  corruption.boundary_noise_px = opt.boundary_noise;
  corruption.semantic_noise_rate = opt.semantic_noise;
  corruption.validate();

  const cu3d::RenderedViews gt = cu3d::render_views(spec, opt.workers);
  const cu3d::CorruptedScene corrupted = cu3d::corrupt(gt, corruption, spec.seed);

  cu3d::SceneData data;
  data.intrinsics = spec.intrinsics;
  data.poses = spec.cameras;
  data.depths = gt.depths;
  data.labels = corrupted.labels;
  data.rendered = corrupted.rendered;
  data.semantics = corrupted.semantics;
  data.gt_instances = gt.instances;
  std::int32_t num_classes = 0;
  for (const cu3d::SceneObject& o : spec.objects) num_classes = std::max(num_classes, o.class_id);
  for (std::int32_t c = 1; c <= num_classes; ++c) {
    if (c <= 16)
      data.class_names.push_back(kClassNames[c - 1]);
    else
      data.class_names.push_back("class_" + std::to_string(c));
  }

  cu3d::save_bundle(data, opt.out_dir);
  cu3d::save_scene_spec(spec, std::filesystem::path(opt.out_dir) / "scene.json");
  std::cout << "bundle written to " << opt.out_dir << " (" << data.num_views() << " views, "
            << spec.objects.size() << " objects)\n";
  return kExitOk;
}

struct RunOptions {
  std::string bundle_dir;
  std::string out_dir;
  cu3d::PipelineConfig config;
  std::string order = "timestamp";
};

int run_run(const RunOptions& opt) {
  cu3d::PipelineConfig config = opt.config;
  config.order = opt.order == "shuffled" ? cu3d::MergeOrder::shuffled : cu3d::MergeOrder::timestamp;

  const cu3d::SceneData scene = cu3d::load_bundle(opt.bundle_dir);
  const auto t0 = std::chrono::steady_clock::now();
  const cu3d::PipelineResult result = cu3d::run_pipeline(scene, config);
  const auto t1 = std::chrono::steady_clock::now();
  cu3d::write_artifacts(result, scene, opt.out_dir);

  const double secs = std::chrono::duration<double>(t1 - t0).count();
  std::cout << result.metrics.text();
  std::fprintf(stdout, "pipeline time: %.3f s\n", secs);
  std::cout << "artifacts written to " << opt.out_dir << "\n";
  return kExitOk;
}

struct EvalOptions {
  std::string bundle_dir;
  std::string pred_dir;
  std::string out_path;
};

int run_eval(const EvalOptions& opt) {
  const cu3d::SceneData scene = cu3d::load_bundle(opt.bundle_dir);
  if (scene.gt_instances.empty())
    throw cu3d::InputError("eval: bundle has no gt_instance maps");

  std::vector<cu3d::InstanceMap> pred;
  for (std::size_t n = 0; n < scene.num_views(); ++n) {
    char name[32];
    std::snprintf(name, sizeof(name), "corrected_%04zu.bin", n);
    pred.push_back(cu3d::read_id_map_file(std::filesystem::path(opt.pred_dir) / name));
  }

  const cu3d::MapMetrics mm = cu3d::evaluate_maps(pred, scene.gt_instances);
  cu3d::Metrics metrics;
  metrics.put("ap", mm.ap.ap);
  metrics.put("ap50", mm.ap.ap50);
  metrics.put("ap25", mm.ap.ap25);
  metrics.put("ari_pixel", mm.ari);
  metrics.put("nmi_pixel", mm.nmi);

  if (opt.out_path.empty()) {
    std::cout << metrics.text();
  } else {
    std::ofstream out(opt.out_path);
    if (!out) throw cu3d::IoError("cannot write " + opt.out_path);
    out << metrics.text();
    std::cout << "metrics written to " << opt.out_path << "\n";
  }
  return kExitOk;
}

struct ExportOptions {
  std::string bundle_dir;
  std::string out_path;
  std::string maps = "instance";
  std::string pred_dir;
  double voxel_size = 0.0;  // 0 = no downsampling
};

int run_export(const ExportOptions& opt) {
  const cu3d::SceneData scene = cu3d::load_bundle(opt.bundle_dir);

  const std::vector<cu3d::InstanceMap>* source = nullptr;
  std::vector<cu3d::InstanceMap> corrected;
  if (!opt.pred_dir.empty()) {
    for (std::size_t n = 0; n < scene.num_views(); ++n) {
      char name[32];
      std::snprintf(name, sizeof(name), "corrected_%04zu.bin", n);
      corrected.push_back(cu3d::read_id_map_file(std::filesystem::path(opt.pred_dir) / name));
    }
    source = &corrected;
  } else if (opt.maps == "instance") {
    source = &scene.labels;
  } else if (opt.maps == "rendered") {
    source = &scene.rendered;
  } else if (opt.maps == "gt") {
    source = &scene.gt_instances;
  }
  if (source == nullptr || source->empty())
    throw cu3d::InputError("export: requested map set is not present in the bundle");

  cu3d::LabeledPointCloud cloud;
  for (std::size_t n = 0; n < scene.num_views(); ++n) {
    cu3d::LabeledPointCloud view =
        cu3d::backproject(scene.depths[n], scene.intrinsics, scene.poses[n], (*source)[n]);
    cloud.points.insert(cloud.points.end(), view.points.begin(), view.points.end());
  }
  if (opt.voxel_size > 0) cloud = cu3d::voxel_downsample(cloud, opt.voxel_size);

  cu3d::export_cloud(cloud, opt.out_path);
  std::cout << "wrote " << cloud.size() << " points to " << opt.out_path << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-view 3D instance consolidation toolkit"};
  app.require_subcommand(1);

  GenerateOptions gen;
  CLI::App* cmd_gen = app.add_subcommand("generate", "render a synthetic scene into a bundle");
  cmd_gen->add_option("--out", gen.out_dir, "output bundle directory")->required();
  cmd_gen->add_option("--spec", gen.spec_path, "scene spec JSON (overrides procedural options)");
  cmd_gen->add_option("--objects", gen.objects, "object count")->check(CLI::PositiveNumber);
  cmd_gen->add_option("--views", gen.views, "camera count")->check(CLI::PositiveNumber);
  cmd_gen->add_option("--width", gen.width, "image width")->check(CLI::PositiveNumber);
  cmd_gen->add_option("--height", gen.height, "image height")->check(CLI::PositiveNumber);
  cmd_gen->add_option("--classes", gen.classes, "semantic class count")
      ->check(CLI::Range(1, 16));
  cmd_gen->add_option("--seed", gen.seed, "rng seed");
  cmd_gen->add_option("--alias-rate", gen.alias_rate, "fraction of objects sharing a rendered id")
      ->check(CLI::Range(0.0, 1.0));
  cmd_gen->add_option("--fragmentation-rate", gen.fragmentation_rate,
                      "fraction of objects split across label ids")
      ->check(CLI::Range(0.0, 1.0));
  cmd_gen->add_option("--boundary-noise", gen.boundary_noise,
                      "max dilation/erosion radius for rendered masks, px")
      ->check(CLI::NonNegativeNumber);
  cmd_gen->add_option("--semantic-noise", gen.semantic_noise, "per-view class flip rate")
      ->check(CLI::Range(0.0, 1.0));
  cmd_gen->add_option("--workers", gen.workers, "render worker threads")->check(CLI::PositiveNumber);

  RunOptions run;
  CLI::App* cmd_run = app.add_subcommand("run", "run the full pipeline on a bundle");
  cmd_run->add_option("--bundle", run.bundle_dir, "input bundle directory")->required();
  cmd_run->add_option("--out", run.out_dir, "output artifact directory")->required();
  cmd_run->add_option("--tau-d", run.config.tau_d, "match radius, meters")
      ->check(CLI::PositiveNumber);
  cmd_run->add_option("--tau-n", run.config.tau_n, "absolute matched-point merge floor")
      ->check(CLI::NonNegativeNumber);
  cmd_run->add_option("--voxel-size", run.config.voxel_size, "downsampling voxel edge, meters")
      ->check(CLI::PositiveNumber);
  cmd_run->add_option("--max-instances", run.config.max_instances, "instance slot cap")
      ->check(CLI::PositiveNumber);
  cmd_run->add_option("--order", run.order, "mask order inside a group")
      ->check(CLI::IsMember({"timestamp", "shuffled"}));
  cmd_run->add_option("--seed", run.config.seed, "seed for shuffled order");
  cmd_run->add_option("--workers", run.config.workers, "worker threads")
      ->check(CLI::PositiveNumber);

  EvalOptions eval;
  CLI::App* cmd_eval = app.add_subcommand("eval", "score corrected maps against ground truth");
  cmd_eval->add_option("--bundle", eval.bundle_dir, "bundle with gt_instance maps")->required();
  cmd_eval->add_option("--pred", eval.pred_dir, "directory with corrected_%04d.bin")->required();
  cmd_eval->add_option("--out", eval.out_path, "metrics file (default: stdout)");

  ExportOptions exp;
  CLI::App* cmd_export = app.add_subcommand("export", "back-project maps into a labeled PLY");
  cmd_export->add_option("--bundle", exp.bundle_dir, "input bundle directory")->required();
  cmd_export->add_option("--out", exp.out_path, "output PLY path")->required();
  cmd_export->add_option("--maps", exp.maps, "which maps to label points with")
      ->check(CLI::IsMember({"instance", "rendered", "gt"}));
  cmd_export->add_option("--pred", exp.pred_dir, "directory with corrected_%04d.bin (overrides --maps)");
  cmd_export->add_option("--voxel-size", exp.voxel_size, "optional downsampling voxel edge")
      ->check(CLI::NonNegativeNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);  // prints help/message
    return e.get_exit_code() == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (cmd_gen->parsed()) return run_generate(gen);
    if (cmd_run->parsed()) return run_run(run);
    if (cmd_eval->parsed()) return run_eval(eval);
    if (cmd_export->parsed()) return run_export(exp);
  } catch (const cu3d::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
