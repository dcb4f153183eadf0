#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "wsp/metrics.hpp"
#include "wsp/rng.hpp"

using namespace wsp;

namespace {

EvalSample all_visible_sample() {
  EvalSample s;
  s.visibility.fill(1);
  s.object_scale = 1.0;
  return s;
}

OksConfig unit_kappa_config() {
  OksConfig config;
  config.kappas.fill(1.0);
  return config;
}

}  // namespace

TEST_CASE("per-keypoint similarity: exact prediction scores one") {
  auto s = all_visible_sample();
  const auto config = unit_kappa_config();
  for (int k = 0; k < kNumKeypoints; ++k) {
    CHECK(per_keypoint_oks(s, k, config) == Catch::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("per-keypoint similarity: half-similarity distance") {
  // d^2 = 2 s^2 k^2 ln 2 gives exactly 0.5
  auto s = all_visible_sample();
  s.object_scale = 2.0;
  OksConfig config = unit_kappa_config();
  config.kappas[0] = 0.3;
  const double d = std::sqrt(2.0 * 4.0 * 0.09 * std::log(2.0));
  s.pred[0] = {d, 0, 0};
  // the visibility gate contributes a factor 1/(1 + epsilon)
  CHECK(per_keypoint_oks(s, 0, config) == Catch::Approx(0.5).margin(1e-9));
}

TEST_CASE("per-keypoint similarity: invisible keypoint scores zero") {
  auto s = all_visible_sample();
  s.visibility[3] = 0;
  s.pred[3] = {0, 0, 0};  // perfect position, still gated off
  CHECK(per_keypoint_oks(s, 3, unit_kappa_config()) == 0.0);
}

TEST_CASE("object similarity: visible average, hand value") {
  auto s = all_visible_sample();
  OksConfig config = unit_kappa_config();
  // two keypoints visible: one perfect (1.0), one at half similarity
  s.visibility.fill(0);
  s.visibility[0] = s.visibility[1] = 1;
  const double d = std::sqrt(2.0 * std::log(2.0));
  s.pred[1] = {0, d, 0};
  CHECK(object_oks(s, config) == Catch::Approx(0.75).epsilon(1e-12));

  s.visibility.fill(0);
  CHECK_THROWS_AS(object_oks(s, config), NoVisibleKeypoints);
}

TEST_CASE("object similarity is scale invariant") {
  Rng rng(6);
  const auto config = OksConfig{};
  for (int trial = 0; trial < 50; ++trial) {
    auto s = all_visible_sample();
    for (int k = 0; k < kNumKeypoints; ++k) {
      s.gt[k] = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
      s.pred[k] = s.gt[k] + Point3{rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2),
                                   rng.uniform(-0.2, 0.2)};
    }
    s.object_scale = rng.uniform(0.5, 2.0);
    const double base = object_oks(s, config);

    const double c = rng.uniform(0.5, 3.0);
    EvalSample scaled = s;
    for (int k = 0; k < kNumKeypoints; ++k) {
      scaled.gt[k] = c * s.gt[k];
      scaled.pred[k] = c * s.pred[k];
    }
    scaled.object_scale = c * s.object_scale;
    CHECK(object_oks(scaled, config) == Catch::Approx(base).epsilon(1e-12));
  }
}

TEST_CASE("object similarity decreases as error grows") {
  auto s = all_visible_sample();
  const auto config = OksConfig{};
  double prev = 1.1;
  for (double err : {0.0, 0.05, 0.1, 0.2, 0.5, 1.0}) {
    for (int k = 0; k < kNumKeypoints; ++k) s.pred[k] = s.gt[k] + Point3{err, 0, 0};
    const double oks = object_oks(s, config);
    CHECK(oks < prev);
    prev = oks;
  }
}

TEST_CASE("threshold-averaged accuracy: hand values") {
  const auto config = unit_kappa_config();
  // one sample with object OKS exactly 0.7: passes 0.50..0.70 (5 of 10)
  auto s = all_visible_sample();
  const double d = std::sqrt(-2.0 * std::log(0.7));
  for (int k = 0; k < kNumKeypoints; ++k) s.pred[k] = s.gt[k] + Point3{d, 0, 0};
  CHECK(object_oks(s, config) == Catch::Approx(0.7).epsilon(1e-12));
  const auto result = oks_acc({s}, config);
  CHECK(result.acc == Catch::Approx(0.5).epsilon(1e-12));
  REQUIRE(result.per_threshold.size() == 10);
  for (std::size_t j = 0; j < 10; ++j) {
    CHECK(result.per_threshold[j] == (config.thresholds[j] <= 0.7 ? 1.0 : 0.0));
  }

  // perfect sample passes everything
  auto exact = all_visible_sample();
  CHECK(oks_acc({exact}, config).acc == Catch::Approx(1.0).epsilon(1e-12));

  CHECK_THROWS_AS(oks_acc({}, config), EmptyEvalSet);
}

TEST_CASE("threshold-averaged accuracy: per-threshold fractions are non-increasing") {
  Rng rng(8);
  std::vector<EvalSample> samples;
  for (int i = 0; i < 40; ++i) {
    auto s = all_visible_sample();
    const double err = rng.uniform(0.0, 0.5);
    for (int k = 0; k < kNumKeypoints; ++k) {
      s.gt[k] = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
      s.pred[k] = s.gt[k] + Point3{err, 0, 0};
    }
    samples.push_back(s);
  }
  const auto result = oks_acc(samples, OksConfig{});
  for (std::size_t j = 1; j < result.per_threshold.size(); ++j) {
    CHECK(result.per_threshold[j] <= result.per_threshold[j - 1]);
  }
  // the mean equals the average of the fractions
  double mean = 0.0;
  for (double f : result.per_threshold) mean += f;
  CHECK(result.acc == Catch::Approx(mean / result.per_threshold.size()).epsilon(1e-12));
}

TEST_CASE("threshold-averaged accuracy: brute-force oracle equivalence") {
  Rng rng(9);
  std::vector<EvalSample> samples;
  for (int i = 0; i < 25; ++i) {
    auto s = all_visible_sample();
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
  const OksConfig config;
  const auto fast = oks_acc(samples, config);

  // independent double-loop computation
  double acc = 0.0;
  for (double t : config.thresholds) {
    int pass = 0;
    for (const auto& s : samples) {
      double sum = 0.0;
      int count = 0;
      for (int k = 0; k < kNumKeypoints; ++k) {
        if (!s.visibility[k]) continue;
        const double d = distance(s.pred[k], s.gt[k]);
        sum += std::exp(-d * d /
                        (2.0 * s.object_scale * s.object_scale * config.kappas[k] *
                         config.kappas[k]));
        ++count;
      }
      if (sum / count >= t) ++pass;
    }
    acc += static_cast<double>(pass) / samples.size();
  }
  acc /= config.thresholds.size();
  CHECK(fast.acc == acc);
}

TEST_CASE("mean joint error: hand values and visibility gating") {
  auto s = all_visible_sample();
  for (int k = 0; k < kNumKeypoints; ++k) s.pred[k] = s.gt[k] + Point3{0.3, 0, 0};
  CHECK(mpjpe({s}) == Catch::Approx(0.3).epsilon(1e-12));

  // one visible keypoint at 3-4-0 offset: error 0.5 exactly
  auto t = all_visible_sample();
  t.visibility.fill(0);
  t.visibility[2] = 1;
  t.pred[2] = {0.3, 0.4, 0.0};
  t.pred[5] = {100, 100, 100};  // invisible, must not count
  CHECK(mpjpe({t}) == Catch::Approx(0.5).epsilon(1e-12));

  // pooled across samples: (13 * 0.3 + 1 * 0.5) / 14
  CHECK(mpjpe({s, t}) == Catch::Approx((13 * 0.3 + 0.5) / 14.0).epsilon(1e-12));

  auto none = all_visible_sample();
  none.visibility.fill(0);
  CHECK_THROWS_AS(mpjpe({none}), NoVisibleKeypoints);
}

TEST_CASE("object scale in 3D: two largest box extents") {
  std::array<Point3, kNumKeypoints> gt{};
  std::array<int, kNumKeypoints> vis{};
  vis[0] = vis[1] = vis[2] = 1;
  gt[0] = {0, 0, 0};
  gt[1] = {0.5, 0.2, 1.8};
  gt[2] = {0.1, 0.1, 0.3};
  // extents: x 0.5, y 0.2, z 1.8 -> sqrt(0.5 * 1.8) = sqrt(0.9)
  CHECK(object_scale_3d(gt, vis) == Catch::Approx(std::sqrt(0.9)).epsilon(1e-12));

  std::array<int, kNumKeypoints> none{};
  CHECK_THROWS_AS(object_scale_3d(gt, none), NoVisibleKeypoints);

  // degenerate boxes are floored, never zero
  std::array<Point3, kNumKeypoints> flat{};
  CHECK(object_scale_3d(flat, vis) >= 1e-3);
}

TEST_CASE("object scale in 2D: bounding-box area") {
  std::array<Point3, kNumKeypoints> gt{};
  std::array<int, kNumKeypoints> vis{};
  vis[0] = vis[1] = 1;
  gt[0] = {10, 20, 0};
  gt[1] = {40, 100, 0};
  CHECK(object_scale_2d(gt, vis) == Catch::Approx(std::sqrt(30.0 * 80.0)).epsilon(1e-12));
}

TEST_CASE("projecting predictions for the 2D metric") {
  CameraModel cam;
  cam.fx = cam.fy = 100.0;
  cam.cx = cam.cy = 50.0;
  cam.width = cam.height = 100;

  auto s = all_visible_sample();
  for (int k = 0; k < kNumKeypoints; ++k) {
    s.gt[k] = {0.01 * k, 0.02 * k, 5.0};
    s.pred[k] = s.gt[k] + Point3{0.05, 0.0, 0.0};
  }
  const auto s2d = project_predictions(s, cam);
  for (int k = 0; k < kNumKeypoints; ++k) {
    CHECK(s2d.gt[k].x == Catch::Approx(50.0 + 100.0 * 0.01 * k / 5.0).margin(1e-9));
    CHECK(s2d.gt[k].z == 0.0);
    // 0.05 m lateral offset at 5 m with f=100 -> 1 px
    CHECK(distance(s2d.pred[k], s2d.gt[k]) == Catch::Approx(1.0).margin(1e-9));
  }
  CHECK(s2d.object_scale ==
        Catch::Approx(object_scale_2d(s2d.gt, s2d.visibility)).epsilon(1e-12));

  s.pred[4].z = -1.0;
  CHECK_THROWS_AS(project_predictions(s, cam), NonPositiveDepth);
}

TEST_CASE("config validation") {
  OksConfig config;
  config.thresholds = {0.5, 0.5};
  CHECK_THROWS_AS(config.validate(), ConfigError);
  config.thresholds = {0.5, 0.6};
  config.kappas[0] = 0.0;
  CHECK_THROWS_AS(config.validate(), ConfigError);
  config.kappas[0] = 0.1;
  config.epsilon = 0.0;
  CHECK_THROWS_AS(config.validate(), ConfigError);
}
