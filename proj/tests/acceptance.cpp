// End-to-end acceptance gate. Each test case checks one criterion and prints
// exactly one PASS/FAIL summary line.

#include <catch2/catch_amalgamated.hpp>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <sys/wait.h>

#include "wsp/io.hpp"
#include "wsp/metrics.hpp"
#include "wsp/pointnet.hpp"
#include "wsp/synth.hpp"

using namespace wsp;
namespace fs = std::filesystem;

namespace {

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

void report(const std::string& id, bool ok, const std::string& detail) {
  std::cout << id << ": " << (ok ? "PASS" : "FAIL") << " (" << detail << ")" << std::endl;
  CHECK(ok);
}

std::vector<Scene> make_dataset(std::uint64_t base_seed, int n, double occlusion_rate,
                                const SynthConfig& base) {
  std::vector<Scene> out;
  const std::array<PoseFamily, 4> cycle = {PoseFamily::kStanding, PoseFamily::kWalking,
                                           PoseFamily::kCycling, PoseFamily::kRandomArticulation};
  for (std::uint64_t attempt = 0; static_cast<int>(out.size()) < n; ++attempt) {
    SynthConfig config = base;
    config.rng_seed = Rng::stream(base_seed, attempt).next_u64();
    const PoseFamily family = cycle[attempt % cycle.size()];
    Rng occ_rng = Rng::stream(config.rng_seed, 0x4f63636cULL);
    if (occ_rng.uniform() < occlusion_rate) {
      const auto skeleton = generate_skeleton(config, family);
      config.occluder = random_occluder(skeleton, config.camera, occ_rng);
    }
    try {
      out.push_back(make_scene(config, family));
    } catch (const DegenerateScene&) {
      continue;
    }
  }
  return out;
}

double eval_mpjpe(const std::vector<Scene>& scenes, const PointNetParams& params,
                  const TrainConfig& train_config, const LabelGenConfig& labelgen_config,
                  const HeatmapOracleConfig& oracle_config, double* oks_out = nullptr) {
  std::vector<EvalSample> samples;
  for (const auto& scene : scenes) {
    const auto prepared = prepare_scene(scene, labelgen_config, oracle_config);
    EvalSample s;
    s.pred = predict(params, prepared, train_config);
    s.gt = scene.keypoints_3d_gt->joints;
    for (int k = 0; k < kNumKeypoints; ++k) s.visibility[k] = scene.keypoints_2d[k].visibility;
    s.object_scale = object_scale_3d(s.gt, s.visibility);
    samples.push_back(s);
  }
  if (oks_out) *oks_out = oks_acc(samples, {}).acc;
  return mpjpe(samples);
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(WSP_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("A1 label-generation fidelity") {
  Timer timer;
  SynthConfig base;
  base.noise_sigma = 0.0;
  base.n_surface_points = 2048;
  const LabelGenConfig labelgen;

  double pooled_error = 0.0, max_error = 0.0;
  long visible = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    SynthConfig config = base;
    config.rng_seed = Rng::stream(9000, seed).next_u64();
    const auto scene = make_scene(
        config, static_cast<PoseFamily>(seed % 4));
    const auto labels = pseudo_3d_labels(scene, labelgen);
    const auto quality = label_quality_report(scene, labels, labelgen);
    pooled_error += quality.mean_error_m * quality.visible_count;
    visible += quality.visible_count;
    max_error = std::max(max_error, quality.max_error_m);
  }
  const double mean_error = pooled_error / visible;
  const double elapsed = timer.seconds();
  const bool ok = mean_error <= 0.10 && max_error <= 0.20 && elapsed <= 10.0;
  report("A1 label-generation fidelity", ok,
         "mean " + std::to_string(mean_error) + " m <= 0.10, max " + std::to_string(max_error) +
             " m <= 0.20, " + std::to_string(elapsed) + " s <= 10");
}

TEST_CASE("A2 gradient correctness") {
  Timer timer;
  Rng rng(4242);
  const double step = 1e-5;
  double max_rel = 0.0;

  // losses: regression and segmentation gradients vs central differences
  for (int trial = 0; trial < 100; ++trial) {
    PseudoLabels labels;
    std::array<Point3, kNumKeypoints> pred{};
    LossConfig config;
    for (int k = 0; k < kNumKeypoints; ++k) {
      labels.visibility[k] = rng.uniform() < 0.8 ? 1 : 0;
      labels.y_tilde[k] = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
      labels.reliability[k] = rng.uniform(0.1, 1.0);
      pred[k] = {rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)};
    }
    const auto reg = regression_loss(pred, labels, config);
    for (int k = 0; k < kNumKeypoints; ++k) {
      for (int c = 0; c < 3; ++c) {
        auto shifted = pred;
        double* coord = c == 0 ? &shifted[k].x : (c == 1 ? &shifted[k].y : &shifted[k].z);
        *coord += step;
        const double up = regression_loss(shifted, labels, config).value;
        *coord -= 2 * step;
        const double down = regression_loss(shifted, labels, config).value;
        const double fd = (up - down) / (2 * step);
        const double denom = std::max({std::abs(fd), std::abs(reg.grad_pred[k][c]), 1e-8});
        max_rel = std::max(max_rel, std::abs(fd - reg.grad_pred[k][c]) / denom);
      }
    }

    std::vector<std::array<double, kNumKeypoints>> scores(2);
    std::vector<std::array<std::uint8_t, kNumKeypoints>> seg_labels(2);
    std::array<int, kNumKeypoints> visibility;
    for (int k = 0; k < kNumKeypoints; ++k) visibility[k] = rng.uniform() < 0.8 ? 1 : 0;
    for (auto& row : scores)
      for (auto& v : row) v = rng.uniform(0.05, 0.95);
    for (auto& row : seg_labels)
      for (auto& v : row) v = rng.uniform() < 0.3 ? 1 : 0;
    const auto seg = segmentation_loss(scores, seg_labels, visibility, config);
    for (std::size_t i = 0; i < scores.size(); ++i) {
      for (int k = 0; k < kNumKeypoints; ++k) {
        auto shifted = scores;
        shifted[i][k] += step;
        const double up = segmentation_loss(shifted, seg_labels, visibility, config).value;
        shifted[i][k] -= 2 * step;
        const double down = segmentation_loss(shifted, seg_labels, visibility, config).value;
        const double fd = (up - down) / (2 * step);
        const double denom = std::max({std::abs(fd), std::abs(seg.grad_scores[i][k]), 1e-8});
        max_rel = std::max(max_rel, std::abs(fd - seg.grad_scores[i][k]) / denom);
      }
    }
  }

  // full network composition on small nets (all below 2000 parameters)
  PointNetShape shape;
  shape.encoder_widths = {4, 4};
  shape.regression_hidden = {4};
  shape.segmentation_hidden = {3};
  REQUIRE(PointNetParams::zeros(shape).parameter_count() <= 2000);
  for (int trial = 0; trial < 100; ++trial) {
    auto params = PointNetParams::init(shape, 5000 + trial);
    const int n = 5;
    Eigen::MatrixXd input(n, shape.input_dim);
    for (int i = 0; i < n; ++i)
      for (int c = 0; c < shape.input_dim; ++c) input(i, c) = rng.uniform(-1, 1);
    std::array<std::array<double, 3>, kNumKeypoints> grad_kp{};
    for (auto& g : grad_kp)
      for (double& v : g) v = rng.uniform(-1, 1);
    Eigen::MatrixXd grad_seg(n, kNumKeypoints);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < kNumKeypoints; ++k) grad_seg(i, k) = rng.uniform(-1, 1);

    auto scalar = [&](const ForwardResult& out) {
      double s = 0.0;
      for (int k = 0; k < kNumKeypoints; ++k)
        s += grad_kp[k][0] * out.keypoints[k].x + grad_kp[k][1] * out.keypoints[k].y +
             grad_kp[k][2] * out.keypoints[k].z;
      for (int i = 0; i < n; ++i)
        for (int k = 0; k < kNumKeypoints; ++k) s += grad_seg(i, k) * out.seg_scores(i, k);
      return s;
    };
    // signature of the piecewise-linear region: relu masks + pooling argmax.
    // finite differences are only meaningful when both probes stay inside the
    // same region, so kink-crossing probes are skipped.
    auto signature = [](const ForwardCache& cache) {
      std::vector<int> sig(cache.argmax.begin(), cache.argmax.end());
      auto push = [&sig](const auto& m) {
        for (Eigen::Index i = 0; i < m.size(); ++i) sig.push_back(m(i) > 0.0 ? 1 : 0);
      };
      for (const auto& m : cache.encoder_pre) push(m);
      for (std::size_t l = 0; l + 1 < cache.reg_pre.size(); ++l) push(cache.reg_pre[l]);
      for (std::size_t l = 0; l + 1 < cache.seg_pre.size(); ++l) push(cache.seg_pre[l]);
      return sig;
    };
    const auto fwd = forward(params, input);
    const auto base_sig = signature(fwd.cache);
    const Eigen::VectorXd analytic = backward(params, fwd.cache, grad_kp, grad_seg);
    Eigen::VectorXd flat = params.flatten();
    // probe a deterministic sweep through the parameter vector
    for (Eigen::Index j = trial % 7; j < flat.size(); j += 7) {
      PointNetParams probe = params;
      Eigen::VectorXd v = flat;
      v[j] += step;
      probe.unflatten(v);
      const auto up_out = forward(probe, input);
      v[j] -= 2 * step;
      probe.unflatten(v);
      const auto down_out = forward(probe, input);
      if (signature(up_out.cache) != base_sig || signature(down_out.cache) != base_sig) continue;
      const double fd = (scalar(up_out) - scalar(down_out)) / (2 * step);
      const double denom = std::max({std::abs(fd), std::abs(analytic[j]), 1e-6});
      max_rel = std::max(max_rel, std::abs(fd - analytic[j]) / denom);
    }
  }

  const double elapsed = timer.seconds();
  const bool ok = max_rel <= 1e-4 && elapsed <= 60.0;
  report("A2 gradient correctness", ok,
         "max relative error " + std::to_string(max_rel) + " <= 1e-4, " +
             std::to_string(elapsed) + " s <= 60");
}

TEST_CASE("A3 training efficacy") {
  Timer timer;
  SynthConfig base;
  const auto train_set = make_dataset(1000, 200, 0.0, base);
  const auto held_out = make_dataset(2000, 50, 0.0, base);

  TrainConfig config;  // defaults: 256 points, batch 8, 2000 steps, fusion_seg
  const LossConfig loss;
  const LabelGenConfig labelgen;
  const HeatmapOracleConfig oracle;
  const auto result = train(train_set, config, loss, labelgen, oracle);

  double initial_mean = 0.0, final_mean = 0.0;
  for (int i = 0; i < 50; ++i) {
    initial_mean += result.log[i].l / 50.0;
    final_mean += result.log[result.log.size() - 50 + i].l / 50.0;
  }
  const double held_out_mpjpe = eval_mpjpe(held_out, result.params, config, labelgen, oracle);

  const double elapsed = timer.seconds();
  const bool ok = final_mean <= 0.5 * initial_mean && held_out_mpjpe <= 0.15 && elapsed <= 300.0;
  report("A3 training efficacy", ok,
         "loss " + std::to_string(initial_mean) + " -> " + std::to_string(final_mean) +
             " (need <= 0.5x), held-out MPJPE " + std::to_string(held_out_mpjpe) +
             " m <= 0.15, " + std::to_string(elapsed) + " s <= 300");
}

TEST_CASE("A4 ablation direction") {
  Timer timer;
  const double slack = 0.01;
  int good_seeds = 0;
  std::string detail;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    SynthConfig base;
    const auto train_set = make_dataset(3000 + seed, 60, 0.5, base);
    const auto eval_set = make_dataset(4000 + seed, 40, 0.5, base);

    TrainConfig config;
    config.total_steps = 300;
    config.batch_size = 4;
    config.n_points = 128;
    config.rng_seed = seed;
    const LossConfig loss;
    const LabelGenConfig labelgen;
    HeatmapOracleConfig oracle;
    oracle.corruption = HeatmapCorruption{0.1, 2.0, seed};

    std::map<Ablation, std::pair<double, double>> metrics;  // {mpjpe, oks}
    for (const Ablation ablation :
         {Ablation::kLidarOnly, Ablation::kFusion, Ablation::kFusionSeg}) {
      TrainConfig c = config;
      c.ablation = ablation;
      const auto result = train(train_set, c, loss, labelgen, oracle);
      double oks = 0.0;
      const double m = eval_mpjpe(eval_set, result.params, c, labelgen, oracle, &oks);
      metrics[ablation] = {m, oks};
    }
    const auto& [m_lidar, o_lidar] = metrics[Ablation::kLidarOnly];
    const auto& [m_fusion, o_fusion] = metrics[Ablation::kFusion];
    const auto& [m_full, o_full] = metrics[Ablation::kFusionSeg];
    const bool mpjpe_ok = m_full <= m_fusion + slack && m_fusion <= m_lidar + slack;
    const bool oks_ok = o_full >= o_fusion - slack && o_fusion >= o_lidar - slack;
    if (mpjpe_ok && oks_ok) ++good_seeds;
    detail += "s" + std::to_string(seed) + " MPJPE " + std::to_string(m_lidar) + "/" +
              std::to_string(m_fusion) + "/" + std::to_string(m_full) + "; ";
  }
  const bool ok = good_seeds >= 4;
  report("A4 ablation direction", ok,
         std::to_string(good_seeds) + "/5 seeds ordered (lidar/fusion/fusion_seg): " + detail +
             std::to_string(timer.seconds()) + " s");
}

TEST_CASE("A5 metric oracle equivalence") {
  Rng rng(5151);
  const OksConfig config;
  bool all_exact = true;
  for (int set = 0; set < 10; ++set) {
    std::vector<EvalSample> samples;
    const int n = 5 + static_cast<int>(rng.uniform_index(20));
    for (int i = 0; i < n; ++i) {
      EvalSample s;
      for (int k = 0; k < kNumKeypoints; ++k) {
        s.visibility[k] = rng.uniform() < 0.85 ? 1 : 0;
        s.gt[k] = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
        s.pred[k] = s.gt[k] + Point3{rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3),
                                     rng.uniform(-0.3, 0.3)};
      }
      if (std::none_of(s.visibility.begin(), s.visibility.end(), [](int v) { return v; }))
        s.visibility[0] = 1;
      s.object_scale = rng.uniform(0.5, 2.0);
      samples.push_back(s);
    }

    // brute-force references
    std::vector<double> oks_ref;
    double mpjpe_sum = 0.0;
    long mpjpe_count = 0;
    for (const auto& s : samples) {
      double sum = 0.0;
      int count = 0;
      for (int k = 0; k < kNumKeypoints; ++k) {
        if (!s.visibility[k]) continue;
        const double dx = s.pred[k].x - s.gt[k].x;
        const double dy = s.pred[k].y - s.gt[k].y;
        const double dz = s.pred[k].z - s.gt[k].z;
        const double d2 = dx * dx + dy * dy + dz * dz;
        sum += std::exp(-d2 / (2.0 * s.object_scale * s.object_scale * config.kappas[k] *
                               config.kappas[k]));
        ++count;
        mpjpe_sum += std::sqrt(d2);
        ++mpjpe_count;
      }
      oks_ref.push_back(sum / count);
    }
    double acc_ref = 0.0;
    for (double t : config.thresholds) {
      int pass = 0;
      for (double oks : oks_ref)
        if (oks >= t) ++pass;
      acc_ref += static_cast<double>(pass) / samples.size();
    }
    acc_ref /= config.thresholds.size();

    for (std::size_t i = 0; i < samples.size(); ++i) {
      all_exact = all_exact && std::abs(object_oks(samples[i], config) - oks_ref[i]) <= 1e-12;
    }
    all_exact = all_exact && std::abs(oks_acc(samples, config).acc - acc_ref) <= 1e-12;
    all_exact = all_exact && std::abs(mpjpe(samples) - mpjpe_sum / mpjpe_count) <= 1e-12;
  }

  // single-sample OKS = 0.7 -> ACC = 0.5
  OksConfig unit = config;
  unit.kappas.fill(1.0);
  EvalSample s;
  s.visibility.fill(1);
  const double d = std::sqrt(-2.0 * std::log(0.7));
  for (int k = 0; k < kNumKeypoints; ++k) s.pred[k] = {d, 0, 0};
  const bool acc_half = oks_acc({s}, unit).acc == 0.5;

  report("A5 metric oracle equivalence", all_exact && acc_half,
         std::string("10 random sets exact to 1e-12; OKS 0.7 -> ACC ") +
             std::to_string(oks_acc({s}, unit).acc));
}

TEST_CASE("A6 invariant suite") {
  Timer timer;
  Rng rng(6161);
  bool ok = true;
  std::string failure;

  // permutation invariance / equivariance, 200 cases
  PointNetShape shape;
  shape.encoder_widths = {6, 8};
  shape.regression_hidden = {6};
  shape.segmentation_hidden = {5};
  for (int trial = 0; trial < 200 && ok; ++trial) {
    const auto params = PointNetParams::init(shape, 7000 + trial);
    const int n = 4 + static_cast<int>(rng.uniform_index(12));
    Eigen::MatrixXd input(n, shape.input_dim);
    for (int i = 0; i < n; ++i)
      for (int c = 0; c < shape.input_dim; ++c) input(i, c) = rng.uniform(-1, 1);
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    for (int i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.uniform_index(i + 1)]);
    Eigen::MatrixXd permuted(n, input.cols());
    for (int i = 0; i < n; ++i) permuted.row(i) = input.row(perm[i]);
    const auto a = forward(params, input);
    const auto b = forward(params, permuted);
    for (int k = 0; k < kNumKeypoints; ++k) {
      ok = ok && std::abs(a.keypoints[k].x - b.keypoints[k].x) <= 1e-12 &&
           std::abs(a.keypoints[k].y - b.keypoints[k].y) <= 1e-12 &&
           std::abs(a.keypoints[k].z - b.keypoints[k].z) <= 1e-12;
    }
    for (int i = 0; i < n && ok; ++i)
      for (int k = 0; k < kNumKeypoints; ++k)
        ok = ok && std::abs(b.seg_scores(i, k) - a.seg_scores(perm[i], k)) <= 1e-12;
    if (!ok) failure = "network permutation";
  }

  // similarity scale invariance, 200 cases
  for (int trial = 0; trial < 200 && ok; ++trial) {
    EvalSample s;
    s.visibility.fill(1);
    for (int k = 0; k < kNumKeypoints; ++k) {
      s.gt[k] = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
      s.pred[k] = s.gt[k] + Point3{rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2),
                                   rng.uniform(-0.2, 0.2)};
    }
    s.object_scale = rng.uniform(0.5, 2.0);
    const double base = object_oks(s, {});
    const double c = rng.uniform(0.3, 4.0);
    EvalSample scaled = s;
    for (int k = 0; k < kNumKeypoints; ++k) {
      scaled.gt[k] = c * s.gt[k];
      scaled.pred[k] = c * s.pred[k];
    }
    scaled.object_scale = c * s.object_scale;
    ok = ok && std::abs(object_oks(scaled, {}) - base) <= 1e-9;
    if (!ok) failure = "similarity scale invariance";
  }

  // softmax convexity and temperature limits, 200 cases
  for (int trial = 0; trial < 200 && ok; ++trial) {
    const int n = 3 + static_cast<int>(rng.uniform_index(20));
    std::vector<ScenePoint> points(n);
    for (auto& p : points) {
      p.position = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
      p.projection = {rng.uniform(0, 256), rng.uniform(0, 256)};
    }
    const Point2 kp{rng.uniform(0, 256), rng.uniform(0, 256)};
    const auto w = keypoint_softmax_weights(points, kp, 0.05);
    double sum = 0.0, min_w = 1.0;
    for (double wi : w) {
      sum += wi;
      min_w = std::min(min_w, wi);
    }
    ok = ok && std::abs(sum - 1.0) <= 1e-12 && min_w >= 0.0;
    // T -> 0: uniform
    const auto w0 = keypoint_softmax_weights(points, kp, 1e-12);
    for (double wi : w0) ok = ok && std::abs(wi - 1.0 / n) <= 1e-6;
    // T -> inf: all mass on the nearest point
    const auto winf = keypoint_softmax_weights(points, kp, 1e9);
    std::size_t nearest = 0;
    for (std::size_t i = 1; i < points.size(); ++i) {
      if (squared_pixel_distance(points[i].projection, kp) <
          squared_pixel_distance(points[nearest].projection, kp))
        nearest = i;
    }
    ok = ok && winf[nearest] >= 1.0 - 1e-6;
    if (!ok) failure = "softmax convexity/limits";
  }

  // Huber branch continuity, 200 cases
  for (int trial = 0; trial < 200 && ok; ++trial) {
    const double delta = rng.uniform(0.1, 3.0);
    const double eps = 1e-9;
    ok = ok && std::abs(huber(delta - eps, delta) - huber(delta + eps, delta)) <= 1e-7 &&
         std::abs(huber_derivative(delta - eps, delta) - huber_derivative(delta + eps, delta)) <=
             1e-7;
    if (!ok) failure = "huber continuity";
  }

  // smoothing interior mass preservation, 200 cases
  for (int trial = 0; trial < 200 && ok; ++trial) {
    Heatmap h(32, 32);
    for (int n = 10; n < 22; ++n)
      for (int m = 10; m < 22; ++m) h.at(n, m, trial % kNumKeypoints) = rng.uniform();
    double before = 0.0;
    for (double v : h.data) before += v;
    const auto smoothed = smooth_heatmap(h, 7, 3.0);
    double after = 0.0;
    for (double v : smoothed.data) after += v;
    ok = ok && std::abs(after - before) <= 1e-9 * std::max(before, 1.0);
    if (!ok) failure = "smoothing mass preservation";
  }

  // determinism round-trips, 200 cases
  for (std::uint64_t trial = 0; trial < 200 && ok; ++trial) {
    Rng a(trial), b(trial);
    for (int i = 0; i < 16; ++i) ok = ok && a.next_u64() == b.next_u64();
    SynthConfig config;
    config.rng_seed = trial;
    config.n_surface_points = 64;
    const auto s1 = sample_surface(generate_skeleton(config, PoseFamily::kStanding), config);
    const auto s2 = sample_surface(generate_skeleton(config, PoseFamily::kStanding), config);
    for (std::size_t i = 0; i < s1.size(); ++i)
      ok = ok && s1[i].x == s2[i].x && s1[i].y == s2[i].y && s1[i].z == s2[i].z;
    if (!ok) failure = "determinism";
  }

  const double elapsed = timer.seconds();
  ok = ok && elapsed <= 120.0;
  report("A6 invariant suite", ok,
         (failure.empty() ? "all property families green" : "failed: " + failure) + ", " +
             std::to_string(elapsed) + " s <= 120");
}

TEST_CASE("A7 CLI end-to-end") {
  Timer timer;
  const fs::path root = fs::temp_directory_path() / "wsp_acceptance_a7";
  fs::remove_all(root);

  const json config = {{"train",
                        {{"n_points", 128},
                         {"batch_size", 4},
                         {"total_steps", 120},
                         {"encoder_widths", {16, 32}},
                         {"regression_hidden", {32}},
                         {"segmentation_hidden", {16}}}}};

  bool ok = true;
  std::string failure;
  for (const std::string run_name : {"run_a", "run_b"}) {
    const fs::path run_dir = root / run_name;
    fs::create_directories(run_dir);
    const std::string config_path = (run_dir / "config.json").string();
    write_json_file(config_path, config);
    const std::string scenes = (run_dir / "scenes").string();
    const std::string labels = (run_dir / "labels").string();
    const std::string trained = (run_dir / "trained").string();
    const std::string matrix = (run_dir / "matrix").string();

    if (run_cli("synth --n-scenes 50 --seed 17 --out " + scenes) != 0) {
      ok = false;
      failure = "synth exit";
      break;
    }
    if (run_cli("labelgen --scenes " + scenes + " --out " + labels) != 0) {
      ok = false;
      failure = "labelgen exit";
      break;
    }
    if (run_cli("train --scenes " + scenes + " --labels " + labels + " --config " + config_path +
                " --seed 17 --out " + trained) != 0) {
      ok = false;
      failure = "train exit";
      break;
    }
    if (run_cli("eval --scenes " + scenes + " --params " + trained + "/params.bin --config " +
                config_path + " --report " + (run_dir / "report.json").string()) != 0) {
      ok = false;
      failure = "eval exit";
      break;
    }
    if (run_cli("ablation_matrix --scenes " + scenes + " --config " + config_path +
                " --seed 17 --steps 60 --out " + matrix) != 0) {
      ok = false;
      failure = "ablation_matrix exit";
      break;
    }
  }

  if (ok) {
    // schema validity of every stage
    try {
      for (int i = 0; i < 50; ++i) {
        char scene_name[32], label_name[32];
        std::snprintf(scene_name, sizeof(scene_name), "scene_%06d.json", i);
        std::snprintf(label_name, sizeof(label_name), "labels_%06d.json", i);
        const Scene scene =
            scene_from_json(read_json_file((root / "run_a" / "scenes" / scene_name).string()));
        const PseudoLabels labels =
            labels_from_json(read_json_file((root / "run_a" / "labels" / label_name).string()));
        if (labels.pointwise.size() != scene.points.size()) {
          ok = false;
          failure = "label/scene size mismatch";
          break;
        }
      }
      const json report = read_json_file((root / "run_a" / "report.json").string());
      ok = ok && report.at("overall").contains("oks_acc") &&
           report.at("overall").contains("mpjpe_m");
      const json table = read_json_file((root / "run_a" / "matrix" / "ablation_table.json").string());
      ok = ok && table.at("rows").size() == 4 &&
           table.at("rows")[0].at("config") == "lidar_only" &&
           table.at("rows")[3].at("config") == "fusion_seg";
      load_params((root / "run_a" / "trained" / "params.bin").string());
      if (!ok && failure.empty()) failure = "schema validity";
    } catch (const std::exception& e) {
      ok = false;
      failure = std::string("schema: ") + e.what();
    }
  }

  if (ok) {
    // byte-identical reruns for primary artifacts; timestamps live in manifests
    auto same_file = [&](const std::string& rel) {
      return read_text_file((root / "run_a" / rel).string()) ==
             read_text_file((root / "run_b" / rel).string());
    };
    for (int i = 0; i < 50 && ok; ++i) {
      char scene_name[48], label_name[48];
      std::snprintf(scene_name, sizeof(scene_name), "scenes/scene_%06d.json", i);
      std::snprintf(label_name, sizeof(label_name), "labels/labels_%06d.json", i);
      ok = ok && same_file(scene_name) && same_file(label_name);
    }
    ok = ok && same_file("trained/params.bin") && same_file("trained/runlog.csv") &&
         same_file("matrix/ablation_table.csv");
    json report_a = read_json_file((root / "run_a" / "report.json").string());
    json report_b = read_json_file((root / "run_b" / "report.json").string());
    report_a.erase("manifest");
    report_b.erase("manifest");
    ok = ok && report_a == report_b;
    if (!ok) failure = "rerun not byte-identical";
  }

  report("A7 CLI end-to-end", ok,
         (failure.empty() ? "synth/labelgen/train/eval/ablation_matrix deterministic" : failure) +
             ", " + std::to_string(timer.seconds()) + " s");
}
