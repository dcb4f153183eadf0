// wsp: weakly-supervised 3D pose pipeline driver.
//
// Subcommands: synth, labelgen, train, eval, ablation_matrix. Every command is
// deterministic per seed and writes a manifest.json next to its artifacts
// (timestamps live only there). Exit codes: 0 success, 2 I/O failure,
// 3 invalid configuration, 4 numerical divergence.

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <thread>

#include <CLI11.hpp>

#include "wsp/io.hpp"
#include "wsp/metrics.hpp"
#include "wsp/pointnet.hpp"
#include "wsp/synth.hpp"

namespace fs = std::filesystem;
using wsp::json;

namespace {

constexpr const char* kVersion = "wsp 1.0.0";

int worker_count() {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  if (const char* env = std::getenv("WEAKSUP_POSE_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1 && static_cast<unsigned>(v) < hw) hw = static_cast<unsigned>(v);
  }
  return static_cast<int>(hw);
}

/// Index-parallel map with deterministic per-slot writes inside `fn`.
template <typename F>
void parallel_for(std::size_t n, F&& fn) {
  const std::size_t workers = std::min<std::size_t>(worker_count(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::string index_suffix(int i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%06d", i);
  return buf;
}

std::vector<fs::path> sorted_files(const fs::path& dir, const std::string& prefix) {
  if (!fs::is_directory(dir)) throw wsp::IoError("not a directory: " + dir.string());
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind(prefix, 0) == 0 && name.size() > 5 &&
        name.compare(name.size() - 5, 5, ".json") == 0) {
      out.push_back(entry.path());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

// ------------------------------------------------------------- config loading

struct PipelineConfig {
  wsp::SynthConfig synth;
  wsp::LabelGenConfig labelgen;
  wsp::HeatmapOracleConfig oracle;
  wsp::LossConfig loss;
  wsp::TrainConfig train;
};

json config_to_json(const PipelineConfig& c) {
  json j;
  j["labelgen"] = {{"temperature", c.labelgen.temperature},
                   {"reliability_temperature", c.labelgen.reliability_temperature},
                   {"positive_radius", c.labelgen.positive_radius},
                   {"min_neighbor_px", c.labelgen.min_neighbor_px}};
  j["oracle"] = {{"sigma_render", c.oracle.sigma_render},
                 {"smooth_kernel_size", c.oracle.smooth_kernel_size},
                 {"smooth_sigma", c.oracle.smooth_sigma}};
  if (c.oracle.corruption) {
    j["oracle"]["corruption"] = {{"dropout_prob", c.oracle.corruption->dropout_prob},
                                 {"jitter_sigma", c.oracle.corruption->jitter_sigma},
                                 {"rng_seed", c.oracle.corruption->rng_seed}};
  }
  j["loss"] = {{"huber_delta", c.loss.huber_delta},
               {"scale_factors", c.loss.scale_factors},
               {"w_pos", c.loss.w_pos},
               {"w_neg", c.loss.w_neg},
               {"lambda", c.loss.lambda}};
  j["train"] = {{"n_points", c.train.n_points},
                {"batch_size", c.train.batch_size},
                {"learning_rate", c.train.learning_rate},
                {"total_steps", c.train.total_steps},
                {"rng_seed", c.train.rng_seed},
                {"augment", c.train.augment},
                {"lambda", c.train.lambda},
                {"center_clouds", c.train.center_clouds},
                {"ablation", wsp::to_string(c.train.ablation)},
                {"encoder_widths", c.train.shape.encoder_widths},
                {"regression_hidden", c.train.shape.regression_hidden},
                {"segmentation_hidden", c.train.shape.segmentation_hidden}};
  return j;
}

template <typename T>
void maybe(const json& j, const char* key, T& field) {
  if (j.contains(key)) field = j.at(key).get<T>();
}

void apply_config_json(const json& j, PipelineConfig& c) {
  if (j.contains("labelgen")) {
    const auto& g = j.at("labelgen");
    maybe(g, "temperature", c.labelgen.temperature);
    maybe(g, "reliability_temperature", c.labelgen.reliability_temperature);
    maybe(g, "positive_radius", c.labelgen.positive_radius);
    maybe(g, "min_neighbor_px", c.labelgen.min_neighbor_px);
  }
  if (j.contains("oracle")) {
    const auto& g = j.at("oracle");
    maybe(g, "sigma_render", c.oracle.sigma_render);
    maybe(g, "smooth_kernel_size", c.oracle.smooth_kernel_size);
    maybe(g, "smooth_sigma", c.oracle.smooth_sigma);
    if (g.contains("corruption")) {
      wsp::HeatmapCorruption corruption;
      const auto& cc = g.at("corruption");
      maybe(cc, "dropout_prob", corruption.dropout_prob);
      maybe(cc, "jitter_sigma", corruption.jitter_sigma);
      maybe(cc, "rng_seed", corruption.rng_seed);
      c.oracle.corruption = corruption;
    }
  }
  if (j.contains("loss")) {
    const auto& g = j.at("loss");
    maybe(g, "huber_delta", c.loss.huber_delta);
    maybe(g, "scale_factors", c.loss.scale_factors);
    maybe(g, "w_pos", c.loss.w_pos);
    maybe(g, "w_neg", c.loss.w_neg);
    maybe(g, "lambda", c.loss.lambda);
  }
  if (j.contains("train")) {
    const auto& g = j.at("train");
    maybe(g, "n_points", c.train.n_points);
    maybe(g, "batch_size", c.train.batch_size);
    maybe(g, "learning_rate", c.train.learning_rate);
    maybe(g, "total_steps", c.train.total_steps);
    maybe(g, "rng_seed", c.train.rng_seed);
    maybe(g, "augment", c.train.augment);
    maybe(g, "lambda", c.train.lambda);
    maybe(g, "center_clouds", c.train.center_clouds);
    if (g.contains("ablation"))
      c.train.ablation = wsp::ablation_from_string(g.at("ablation").get<std::string>());
    maybe(g, "encoder_widths", c.train.shape.encoder_widths);
    maybe(g, "regression_hidden", c.train.shape.regression_hidden);
    maybe(g, "segmentation_hidden", c.train.shape.segmentation_hidden);
  }
  c.train.lambda = c.loss.lambda;
}

void load_config_file(const std::string& path, PipelineConfig& c) {
  if (path.empty()) return;
  json j;
  try {
    j = wsp::read_json_file(path);
  } catch (const json::parse_error& e) {
    throw wsp::ConfigError(std::string("config file is not valid JSON: ") + e.what());
  }
  try {
    apply_config_json(j, c);
  } catch (const json::exception& e) {
    throw wsp::ConfigError(std::string("bad config value: ") + e.what());
  }
}

// ------------------------------------------------------------------ cmd_synth

struct SynthArgs {
  int n_scenes = 10;
  std::uint64_t seed = 0;
  std::string pose_family = "mixed";
  double occlusion_rate = 0.0;
  double noise_sigma = 0.005;
  int n_surface_points = 2048;
  std::string out;
};

int cmd_synth(const SynthArgs& args) {
  Timer timer;
  if (args.n_scenes < 0) throw wsp::ConfigError("--n-scenes must be >= 0");
  if (args.occlusion_rate < 0.0 || args.occlusion_rate > 1.0)
    throw wsp::ConfigError("--occlusion-rate must be in [0, 1]");
  const std::vector<wsp::PoseFamily> cycle =
      args.pose_family == "mixed"
          ? std::vector<wsp::PoseFamily>{wsp::PoseFamily::kStanding, wsp::PoseFamily::kWalking,
                                         wsp::PoseFamily::kCycling,
                                         wsp::PoseFamily::kRandomArticulation}
          : std::vector<wsp::PoseFamily>{wsp::pose_family_from_string(args.pose_family)};

  std::error_code ec;
  fs::create_directories(args.out, ec);
  if (ec) throw wsp::IoError("cannot create output directory: " + args.out);

  json scene_paths = json::array();
  int emitted = 0;
  int rejected = 0;
  for (std::uint64_t attempt = 0; emitted < args.n_scenes; ++attempt) {
    if (attempt > static_cast<std::uint64_t>(args.n_scenes) * 200 + 1000)
      throw wsp::ConfigError("synth: too many degenerate scenes; relax the configuration");

    wsp::SynthConfig config;
    config.noise_sigma = args.noise_sigma;
    config.n_surface_points = args.n_surface_points;
    config.rng_seed = wsp::Rng::stream(args.seed, attempt).next_u64();
    const wsp::PoseFamily family = cycle[attempt % cycle.size()];

    wsp::Rng occ_rng = wsp::Rng::stream(config.rng_seed, 0x4f63636cULL);
    const bool want_occluder = occ_rng.uniform() < args.occlusion_rate;
    if (want_occluder) {
      const auto skeleton = wsp::generate_skeleton(config, family);
      config.occluder = wsp::random_occluder(skeleton, config.camera, occ_rng);
    }

    wsp::Scene scene;
    try {
      scene = wsp::make_scene(config, family);
    } catch (const wsp::DegenerateScene&) {
      ++rejected;
      continue;
    }
    if (want_occluder) {
      int invisible = 0;
      for (const auto& kp : scene.keypoints_2d) invisible += kp.visibility ? 0 : 1;
      if (invisible == 0) {  // occluder missed the body entirely
        ++rejected;
        continue;
      }
    }
    const fs::path path = fs::path(args.out) / ("scene_" + index_suffix(emitted) + ".json");
    wsp::write_json_file(path.string(), wsp::scene_to_json(scene));
    scene_paths.push_back(path.string());
    ++emitted;
  }

  json manifest = {{"command", "synth"},
                   {"version", kVersion},
                   {"seed", args.seed},
                   {"n_scenes", args.n_scenes},
                   {"pose_family", args.pose_family},
                   {"occlusion_rate", args.occlusion_rate},
                   {"noise_sigma", args.noise_sigma},
                   {"n_surface_points", args.n_surface_points},
                   {"scenes", scene_paths},
                   {"rejected_scenes", rejected},
                   {"elapsed_seconds", timer.seconds()}};
  wsp::write_json_file((fs::path(args.out) / "manifest.json").string(), manifest);
  if (rejected > 0) std::cerr << "synth: rejected " << rejected << " degenerate scene(s)\n";
  return 0;
}

// ---------------------------------------------------------------- cmd_labelgen

struct LabelGenArgs {
  std::string scenes;
  std::string out;
  double temperature = 0.05;
  double reliability_temperature = 0.01;
  double radius = 5.0;
  std::string config_file;
};

int cmd_labelgen(const LabelGenArgs& args) {
  Timer timer;
  PipelineConfig config;
  load_config_file(args.config_file, config);
  config.labelgen.temperature = args.temperature;
  config.labelgen.reliability_temperature = args.reliability_temperature;
  config.labelgen.positive_radius = args.radius;
  config.labelgen.validate();

  const auto scene_files = sorted_files(args.scenes, "scene_");
  std::error_code ec;
  fs::create_directories(args.out, ec);
  if (ec) throw wsp::IoError("cannot create output directory: " + args.out);

  struct PerScene {
    bool skipped = false;
    bool has_gt = false;
    std::string label_path;
    wsp::QualityReport report;
  };
  std::vector<PerScene> results(scene_files.size());

  parallel_for(scene_files.size(), [&](std::size_t i) {
    const wsp::Scene scene = wsp::scene_from_json(wsp::read_json_file(scene_files[i].string()));
    auto& r = results[i];
    wsp::PseudoLabels labels;
    try {
      labels = wsp::pseudo_3d_labels(scene, config.labelgen);
    } catch (const wsp::EmptyCloud&) {
      r.skipped = true;
      return;
    } catch (const wsp::AllInvisible&) {
      r.skipped = true;
      return;
    }
    std::string name = scene_files[i].filename().string();
    name.replace(0, std::string("scene_").size(), "labels_");
    r.label_path = (fs::path(args.out) / name).string();
    wsp::write_json_file(r.label_path, wsp::labels_to_json(labels));
    if (scene.keypoints_3d_gt) {
      r.has_gt = true;
      r.report = wsp::label_quality_report(scene, labels, config.labelgen);
    }
  });

  json label_paths = json::array();
  json per_scene = json::array();
  int skipped = 0;
  double pooled_error = 0.0, max_error = 0.0;
  long pooled_visible = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    if (r.skipped) {
      ++skipped;
      continue;
    }
    label_paths.push_back(r.label_path);
    if (r.has_gt) {
      pooled_error += r.report.mean_error_m * r.report.visible_count;
      pooled_visible += r.report.visible_count;
      max_error = std::max(max_error, r.report.max_error_m);
      per_scene.push_back({{"scene", scene_files[i].string()},
                           {"mean_error_m", r.report.mean_error_m},
                           {"max_error_m", r.report.max_error_m},
                           {"visible_count", r.report.visible_count}});
    }
  }

  json report = {{"scenes", scene_files.size()},
                 {"skipped", skipped},
                 {"mean_error_m", pooled_visible > 0 ? pooled_error / pooled_visible : 0.0},
                 {"max_error_m", max_error},
                 {"visible_keypoints", pooled_visible},
                 {"per_scene", per_scene}};
  wsp::write_json_file((fs::path(args.out) / "quality_report.json").string(), report);

  json manifest = {{"command", "labelgen"},
                   {"version", kVersion},
                   {"config", config_to_json(config)["labelgen"]},
                   {"scenes_dir", args.scenes},
                   {"labels", label_paths},
                   {"skipped", skipped},
                   {"elapsed_seconds", timer.seconds()}};
  wsp::write_json_file((fs::path(args.out) / "manifest.json").string(), manifest);
  if (skipped > 0) std::cerr << "labelgen: skipped " << skipped << " scene(s)\n";
  return 0;
}

// ------------------------------------------------------------------ cmd_train

struct TrainArgs {
  std::string scenes;
  std::string labels;
  std::string config_file;
  std::string ablation = "fusion_seg";
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string out;
  std::string dump_sample;
};

std::vector<wsp::Scene> load_scenes(const std::string& dir) {
  const auto files = sorted_files(dir, "scene_");
  std::vector<wsp::Scene> scenes(files.size());
  parallel_for(files.size(), [&](std::size_t i) {
    scenes[i] = wsp::scene_from_json(wsp::read_json_file(files[i].string()));
  });
  return scenes;
}

int cmd_train(const TrainArgs& args) {
  Timer timer;
  PipelineConfig config;
  load_config_file(args.config_file, config);
  config.train.ablation = wsp::ablation_from_string(args.ablation);
  if (args.seed_given) config.train.rng_seed = args.seed;
  config.train.validate();
  config.loss.validate();

  const auto scene_files = sorted_files(args.scenes, "scene_");
  if (scene_files.empty()) throw wsp::ConfigError("train: no scenes in " + args.scenes);
  for (const auto& f : scene_files) {
    std::string name = f.filename().string();
    name.replace(0, std::string("scene_").size(), "labels_");
    if (!fs::exists(fs::path(args.labels) / name))
      throw wsp::ConfigError("train: missing label file for " + f.filename().string());
  }
  const auto dataset = load_scenes(args.scenes);

  std::error_code ec;
  fs::create_directories(args.out, ec);
  if (ec) throw wsp::IoError("cannot create output directory: " + args.out);

  if (!args.dump_sample.empty()) {
    const auto prepared =
        wsp::prepare_scene(dataset.front(), config.labelgen, config.oracle);
    wsp::Rng rng = wsp::Rng::stream(config.train.rng_seed, 0x44756d70ULL);
    const auto sample = wsp::make_train_sample(prepared, config.train, rng, false);
    json rows = json::array();
    for (Eigen::Index i = 0; i < sample.input.rows(); ++i) {
      json row = json::array();
      for (Eigen::Index c = 0; c < sample.input.cols(); ++c) row.push_back(sample.input(i, c));
      rows.push_back(row);
    }
    wsp::write_json_file(args.dump_sample, json{{"input", rows}});
  }

  const auto result =
      wsp::train(dataset, config.train, config.loss, config.labelgen, config.oracle);

  const std::string params_path = (fs::path(args.out) / "params.bin").string();
  const std::string runlog_path = (fs::path(args.out) / "runlog.csv").string();
  wsp::save_params(params_path, result.params);
  wsp::write_text_file(runlog_path, wsp::runlog_to_csv(result.log));

  json manifest = {{"command", "train"},
                   {"version", kVersion},
                   {"config", config_to_json(config)},
                   {"scenes_dir", args.scenes},
                   {"labels_dir", args.labels},
                   {"ablation", args.ablation},
                   {"seed", config.train.rng_seed},
                   {"params", params_path},
                   {"runlog", runlog_path},
                   {"final_loss", result.log.empty() ? 0.0 : result.log.back().l},
                   {"elapsed_seconds", timer.seconds()}};
  wsp::write_json_file((fs::path(args.out) / "manifest.json").string(), manifest);
  return 0;
}

// ------------------------------------------------------------------- cmd_eval

struct EvalArgs {
  std::string scenes;
  std::string params;
  std::string report;
  std::string plot;
  std::string config_file;
  std::string ablation = "fusion_seg";
  std::uint64_t seed = 0;
};

struct EvalOutcome {
  json report;
  std::array<double, wsp::kNumKeypoints> per_keypoint_oks{};
};

EvalOutcome evaluate(const std::vector<wsp::Scene>& scenes, const wsp::PointNetParams& params,
                     PipelineConfig config, wsp::Ablation ablation, std::uint64_t seed) {
  config.train.shape = params.shape;
  config.train.ablation = ablation;
  config.train.rng_seed = seed;

  std::vector<wsp::EvalSample> samples;
  std::vector<const wsp::Scene*> sample_scenes;
  int skipped = 0;
  std::vector<std::optional<wsp::EvalSample>> slots(scenes.size());
  parallel_for(scenes.size(), [&](std::size_t i) {
    const auto& scene = scenes[i];
    if (!scene.keypoints_3d_gt) return;
    wsp::PreparedScene prepared;
    try {
      prepared = wsp::prepare_scene(scene, config.labelgen, config.oracle);
    } catch (const wsp::AllInvisible&) {
      return;
    }
    wsp::EvalSample s;
    s.pred = wsp::predict(params, prepared, config.train);
    s.gt = scene.keypoints_3d_gt->joints;
    for (int k = 0; k < wsp::kNumKeypoints; ++k)
      s.visibility[k] = scene.keypoints_2d[k].visibility;
    try {
      s.object_scale = wsp::object_scale_3d(s.gt, s.visibility);
    } catch (const wsp::NoVisibleKeypoints&) {
      return;
    }
    slots[i] = s;
  });
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (slots[i]) {
      samples.push_back(*slots[i]);
      sample_scenes.push_back(&scenes[i]);
    } else {
      ++skipped;
    }
  }
  if (samples.empty()) throw wsp::EmptyEvalSet("eval: no usable scenes");

  const wsp::OksConfig oks_config;
  const auto acc3d = wsp::oks_acc(samples, oks_config);
  const double mpjpe_m = wsp::mpjpe(samples);

  std::vector<wsp::EvalSample> samples_2d;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    try {
      samples_2d.push_back(wsp::project_predictions(samples[i], sample_scenes[i]->camera));
    } catch (const wsp::NonPositiveDepth&) {
      // prediction behind the camera: worst-case 2D miss, drop from the 2D set
    }
  }
  json overall = {{"oks_acc", acc3d.acc},
                  {"per_threshold", acc3d.per_threshold},
                  {"mpjpe_m", mpjpe_m},
                  {"samples", samples.size()},
                  {"skipped", skipped}};
  if (!samples_2d.empty()) {
    const auto acc2d = wsp::oks_acc(samples_2d, oks_config);
    overall["oks2d_acc"] = acc2d.acc;
  }

  EvalOutcome outcome;
  json per_keypoint = json::array();
  for (int k = 0; k < wsp::kNumKeypoints; ++k) {
    double sum = 0.0;
    int count = 0;
    for (const auto& s : samples) {
      if (!s.visibility[k]) continue;
      sum += wsp::per_keypoint_oks(s, k, oks_config);
      ++count;
    }
    const double mean = count > 0 ? sum / count : 0.0;
    outcome.per_keypoint_oks[k] = mean;
    per_keypoint.push_back({{"keypoint", wsp::keypoint_names()[k]},
                            {"mean_oks", mean},
                            {"visible_samples", count}});
  }
  outcome.report = {{"overall", overall}, {"per_keypoint", per_keypoint}};
  return outcome;
}

int cmd_eval(const EvalArgs& args) {
  Timer timer;
  PipelineConfig config;
  load_config_file(args.config_file, config);
  const auto params = wsp::load_params(args.params);
  const auto scenes = load_scenes(args.scenes);
  if (scenes.empty()) throw wsp::ConfigError("eval: no scenes in " + args.scenes);

  auto outcome =
      evaluate(scenes, params, config, wsp::ablation_from_string(args.ablation), args.seed);
  outcome.report["manifest"] = {{"command", "eval"},
                                {"version", kVersion},
                                {"params", args.params},
                                {"scenes_dir", args.scenes},
                                {"ablation", args.ablation},
                                {"seed", args.seed},
                                {"elapsed_seconds", timer.seconds()}};
  wsp::write_json_file(args.report, outcome.report);
  if (!args.plot.empty()) {
    wsp::write_text_file(
        args.plot, wsp::per_keypoint_bar_chart_svg(outcome.per_keypoint_oks, "per-keypoint OKS"));
  }
  return 0;
}

// -------------------------------------------------------- cmd_ablation_matrix

struct AblationArgs {
  std::string scenes;
  std::string eval_scenes;
  std::string out;
  std::string config_file;
  std::uint64_t seed = 0;
  int steps = 0;  // 0: keep the config default
};

int cmd_ablation_matrix(const AblationArgs& args) {
  Timer timer;
  PipelineConfig base;
  load_config_file(args.config_file, base);
  base.train.rng_seed = args.seed;
  if (args.steps > 0) base.train.total_steps = args.steps;
  base.train.validate();

  const auto dataset = load_scenes(args.scenes);
  if (dataset.empty()) throw wsp::ConfigError("ablation_matrix: no scenes in " + args.scenes);
  const auto eval_set =
      args.eval_scenes.empty() ? dataset : load_scenes(args.eval_scenes);

  std::error_code ec;
  fs::create_directories(args.out, ec);
  if (ec) throw wsp::IoError("cannot create output directory: " + args.out);

  const std::array<wsp::Ablation, 4> order = {wsp::Ablation::kLidarOnly, wsp::Ablation::kLidarSeg,
                                              wsp::Ablation::kFusion, wsp::Ablation::kFusionSeg};
  json rows = json::array();
  std::ostringstream csv;
  csv << "config,oks_acc,mpjpe_m,oks2d_acc\n" << std::setprecision(17);
  for (const auto ablation : order) {
    PipelineConfig config = base;
    config.train.ablation = ablation;
    json row = {{"config", wsp::to_string(ablation)}};
    try {
      const auto result =
          wsp::train(dataset, config.train, config.loss, config.labelgen, config.oracle);
      const auto outcome = evaluate(eval_set, result.params, config, ablation, args.seed);
      const auto& overall = outcome.report.at("overall");
      row["oks_acc"] = overall.at("oks_acc");
      row["mpjpe_m"] = overall.at("mpjpe_m");
      if (overall.contains("oks2d_acc")) row["oks2d_acc"] = overall.at("oks2d_acc");
      csv << wsp::to_string(ablation) << ',' << overall.at("oks_acc").get<double>() << ','
          << overall.at("mpjpe_m").get<double>() << ','
          << (overall.contains("oks2d_acc") ? overall.at("oks2d_acc").get<double>() : 0.0)
          << '\n';
    } catch (const wsp::DivergenceDetected& e) {
      row["failed"] = e.what();
      csv << wsp::to_string(ablation) << ",failed,failed,failed\n";
    }
    rows.push_back(row);
  }

  json table = {{"rows", rows},
                {"seed", args.seed},
                {"version", kVersion},
                {"scenes_dir", args.scenes},
                {"elapsed_seconds", timer.seconds()}};
  wsp::write_json_file((fs::path(args.out) / "ablation_table.json").string(), table);
  wsp::write_text_file((fs::path(args.out) / "ablation_table.csv").string(), csv.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"weakly-supervised 3D pose pipeline"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth", "generate synthetic scenes");
  synth->add_option("--n-scenes", synth_args.n_scenes);
  synth->add_option("--seed", synth_args.seed);
  synth->add_option("--pose-family", synth_args.pose_family);
  synth->add_option("--occlusion-rate", synth_args.occlusion_rate);
  synth->add_option("--noise-sigma", synth_args.noise_sigma);
  synth->add_option("--points", synth_args.n_surface_points);
  synth->add_option("--out", synth_args.out)->required();

  LabelGenArgs labelgen_args;
  auto* labelgen = app.add_subcommand("labelgen", "generate pseudo 3D labels");
  labelgen->add_option("--scenes", labelgen_args.scenes)->required();
  labelgen->add_option("--T", labelgen_args.temperature);
  labelgen->add_option("--Tr", labelgen_args.reliability_temperature);
  labelgen->add_option("--radius", labelgen_args.radius);
  labelgen->add_option("--config", labelgen_args.config_file);
  labelgen->add_option("--out", labelgen_args.out)->required();

  TrainArgs train_args;
  auto* train = app.add_subcommand("train", "train the point network");
  train->add_option("--scenes", train_args.scenes)->required();
  train->add_option("--labels", train_args.labels)->required();
  train->add_option("--config", train_args.config_file);
  train->add_option("--ablation", train_args.ablation)
      ->check(CLI::IsMember({"lidar_only", "lidar_seg", "fusion", "fusion_seg"}));
  auto* train_seed = train->add_option("--seed", train_args.seed);
  train->add_option("--dump-sample", train_args.dump_sample);
  train->add_option("--out", train_args.out)->required();

  EvalArgs eval_args;
  auto* eval = app.add_subcommand("eval", "evaluate trained parameters");
  eval->add_option("--scenes", eval_args.scenes)->required();
  eval->add_option("--params", eval_args.params)->required();
  eval->add_option("--report", eval_args.report)->required();
  eval->add_option("--plot", eval_args.plot);
  eval->add_option("--config", eval_args.config_file);
  eval->add_option("--ablation", eval_args.ablation)
      ->check(CLI::IsMember({"lidar_only", "lidar_seg", "fusion", "fusion_seg"}));
  eval->add_option("--seed", eval_args.seed);

  AblationArgs ablation_args;
  auto* ablation = app.add_subcommand("ablation_matrix", "train and evaluate all ablations");
  ablation->add_option("--scenes", ablation_args.scenes)->required();
  ablation->add_option("--eval-scenes", ablation_args.eval_scenes);
  ablation->add_option("--config", ablation_args.config_file);
  ablation->add_option("--seed", ablation_args.seed);
  ablation->add_option("--steps", ablation_args.steps);
  ablation->add_option("--out", ablation_args.out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 3;
  }
  train_args.seed_given = train_seed->count() > 0;

  try {
    if (synth->parsed()) return cmd_synth(synth_args);
    if (labelgen->parsed()) return cmd_labelgen(labelgen_args);
    if (train->parsed()) return cmd_train(train_args);
    if (eval->parsed()) return cmd_eval(eval_args);
    if (ablation->parsed()) return cmd_ablation_matrix(ablation_args);
  } catch (const wsp::DivergenceDetected& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const wsp::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const json::exception& e) {
    std::cerr << "error: malformed input: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 3;
}
