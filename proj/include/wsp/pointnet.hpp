#ifndef WSP_POINTNET_HPP_
#define WSP_POINTNET_HPP_

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "wsp/errors.hpp"
#include "wsp/fusion.hpp"
#include "wsp/labelgen.hpp"
#include "wsp/losses.hpp"
#include "wsp/rng.hpp"
#include "wsp/scene.hpp"
#include "wsp/synth.hpp"

namespace wsp {

struct PointNetShape {
  int input_dim = 3 + kNumKeypoints;
  std::vector<int> encoder_widths = {32, 64, 128};
  // Linear by default: a ReLU hidden layer here can die wholesale early in
  // training (the pooled feature is non-negative), freezing the head at a
  // constant output with no gradient path back; a linear map cannot.
  std::vector<int> regression_hidden = {};      // head output is always 3K
  std::vector<int> segmentation_hidden = {64};  // head output is always K

  bool operator==(const PointNetShape&) const = default;
};

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;    // out
};

/// All weights of the two-branch point network. Flat layout: encoder layers,
/// then regression head, then segmentation head; per layer the weight matrix
/// row-major followed by the bias.
struct PointNetParams {
  PointNetShape shape;
  std::vector<DenseLayer> encoder;
  std::vector<DenseLayer> reg_head;
  std::vector<DenseLayer> seg_head;

  static PointNetParams zeros(const PointNetShape& shape) {
    PointNetParams p;
    p.shape = shape;
    auto make = [](std::vector<DenseLayer>& layers, int in, const std::vector<int>& outs) {
      for (int out : outs) {
        layers.push_back({Eigen::MatrixXd::Zero(out, in), Eigen::VectorXd::Zero(out)});
        in = out;
      }
      return in;
    };
    const int feat =
        shape.encoder_widths.empty() ? shape.input_dim : shape.encoder_widths.back();
    make(p.encoder, shape.input_dim, shape.encoder_widths);
    std::vector<int> reg = shape.regression_hidden;
    reg.push_back(3 * kNumKeypoints);
    make(p.reg_head, feat, reg);
    std::vector<int> seg = shape.segmentation_hidden;
    seg.push_back(kNumKeypoints);
    make(p.seg_head, 2 * feat, seg);
    return p;
  }

  /// Glorot-uniform initialization, seed-driven.
  static PointNetParams init(const PointNetShape& shape, std::uint64_t seed) {
    PointNetParams p = zeros(shape);
    Rng rng = Rng::stream(seed, 0x496e6974ULL);
    auto fill = [&rng](std::vector<DenseLayer>& layers) {
      for (auto& layer : layers) {
        const double a = std::sqrt(6.0 / (layer.weight.cols() + layer.weight.rows()));
        for (Eigen::Index r = 0; r < layer.weight.rows(); ++r)
          for (Eigen::Index c = 0; c < layer.weight.cols(); ++c)
            layer.weight(r, c) = rng.uniform(-a, a);
        layer.bias.setZero();
      }
    };
    fill(p.encoder);
    fill(p.reg_head);
    fill(p.seg_head);
    return p;
  }

  int feature_dim() const {
    return shape.encoder_widths.empty() ? shape.input_dim : shape.encoder_widths.back();
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto* group : {&encoder, &reg_head, &seg_head})
      for (const auto& layer : *group)
        n += static_cast<std::size_t>(layer.weight.size()) + layer.bias.size();
    return n;
  }

  Eigen::VectorXd flatten() const {
    Eigen::VectorXd v(parameter_count());
    Eigen::Index pos = 0;
    for (const auto* group : {&encoder, &reg_head, &seg_head}) {
      for (const auto& layer : *group) {
        for (Eigen::Index r = 0; r < layer.weight.rows(); ++r)
          for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) v[pos++] = layer.weight(r, c);
        for (Eigen::Index r = 0; r < layer.bias.size(); ++r) v[pos++] = layer.bias[r];
      }
    }
    return v;
  }

  void unflatten(const Eigen::VectorXd& v) {
    if (static_cast<std::size_t>(v.size()) != parameter_count())
      throw ShapeMismatch("unflatten: parameter vector length mismatch");
    Eigen::Index pos = 0;
    for (auto* group : {&encoder, &reg_head, &seg_head}) {
      for (auto& layer : *group) {
        for (Eigen::Index r = 0; r < layer.weight.rows(); ++r)
          for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) layer.weight(r, c) = v[pos++];
        for (Eigen::Index r = 0; r < layer.bias.size(); ++r) layer.bias[r] = v[pos++];
      }
    }
  }
};

struct ForwardCache {
  Eigen::MatrixXd input;                    // N x input_dim
  std::vector<Eigen::MatrixXd> encoder_pre; // pre-activation per encoder layer
  std::vector<Eigen::MatrixXd> encoder_out; // post-relu per encoder layer
  Eigen::RowVectorXd global;                // 1 x feat
  std::vector<Eigen::Index> argmax;         // pooled row per feature (first on ties)
  std::vector<Eigen::RowVectorXd> reg_pre;
  std::vector<Eigen::RowVectorXd> reg_out;
  Eigen::MatrixXd seg_input;                // N x 2*feat
  std::vector<Eigen::MatrixXd> seg_pre;
  std::vector<Eigen::MatrixXd> seg_out;     // last entry holds sigmoid probabilities
  std::size_t param_count = 0;
};

struct ForwardResult {
  std::array<Point3, kNumKeypoints> keypoints{};
  Eigen::MatrixXd seg_scores;  // N x K, in (0, 1)
  ForwardCache cache;
};

inline Eigen::MatrixXd fused_to_matrix(const FusedCloud& fused, bool use_camera_features = true) {
  Eigen::MatrixXd m(fused.size(), 3 + kNumKeypoints);
  for (std::size_t i = 0; i < fused.size(); ++i) {
    const int cols = use_camera_features ? 3 + kNumKeypoints : 3;
    for (int c = 0; c < 3 + kNumKeypoints; ++c) m(i, c) = c < cols ? fused.rows[i][c] : 0.0;
  }
  return m;
}

/// Permutation-invariant forward pass: row-wise encoder, max pooling over
/// points, a regression head on the global feature and a segmentation head on
/// [per-point feature | global feature].
inline ForwardResult forward(const PointNetParams& params, const Eigen::MatrixXd& input) {
  if (input.rows() < 1) throw EmptyCloud("forward: empty input cloud");
  if (input.cols() != params.shape.input_dim)
    throw ShapeMismatch("forward: input column count does not match the network");

  ForwardResult result;
  ForwardCache& cache = result.cache;
  cache.input = input;
  cache.param_count = params.parameter_count();

  Eigen::MatrixXd h = input;
  for (const auto& layer : params.encoder) {
    Eigen::MatrixXd pre = (h * layer.weight.transpose()).rowwise() + layer.bias.transpose();
    cache.encoder_pre.push_back(pre);
    h = pre.cwiseMax(0.0);
    cache.encoder_out.push_back(h);
  }
  const Eigen::MatrixXd& features = h;
  const Eigen::Index feat = features.cols();

  cache.global.resize(feat);
  cache.argmax.resize(feat);
  for (Eigen::Index j = 0; j < feat; ++j) {
    Eigen::Index row = 0;
    double best = features(0, j);
    for (Eigen::Index i = 1; i < features.rows(); ++i) {
      if (features(i, j) > best) {  // strict: first index wins ties
        best = features(i, j);
        row = i;
      }
    }
    cache.global[j] = best;
    cache.argmax[j] = row;
  }

  Eigen::RowVectorXd a = cache.global;
  for (std::size_t l = 0; l < params.reg_head.size(); ++l) {
    const auto& layer = params.reg_head[l];
    Eigen::RowVectorXd pre = a * layer.weight.transpose() + layer.bias.transpose();
    cache.reg_pre.push_back(pre);
    a = (l + 1 < params.reg_head.size()) ? pre.cwiseMax(0.0).eval() : pre;  // identity output
    cache.reg_out.push_back(a);
  }
  for (int k = 0; k < kNumKeypoints; ++k) {
    result.keypoints[k] = {a[3 * k], a[3 * k + 1], a[3 * k + 2]};
  }

  cache.seg_input.resize(features.rows(), 2 * feat);
  cache.seg_input.leftCols(feat) = features;
  cache.seg_input.rightCols(feat) = cache.global.replicate(features.rows(), 1);
  Eigen::MatrixXd s = cache.seg_input;
  for (std::size_t l = 0; l < params.seg_head.size(); ++l) {
    const auto& layer = params.seg_head[l];
    Eigen::MatrixXd pre = (s * layer.weight.transpose()).rowwise() + layer.bias.transpose();
    cache.seg_pre.push_back(pre);
    if (l + 1 < params.seg_head.size()) {
      s = pre.cwiseMax(0.0);
    } else {
      s = pre.unaryExpr([](double x) { return 1.0 / (1.0 + std::exp(-x)); });  // sigmoid
    }
    cache.seg_out.push_back(s);
  }
  result.seg_scores = s;
  return result;
}

/// Exact reverse-mode gradient of forward. grad_seg is with respect to the
/// sigmoid outputs. Max pooling routes gradient to the first argmax row.
inline Eigen::VectorXd backward(const PointNetParams& params, const ForwardCache& cache,
                                const std::array<std::array<double, 3>, kNumKeypoints>& grad_keypoints,
                                const Eigen::MatrixXd& grad_seg) {
  if (cache.param_count != params.parameter_count())
    throw CacheMismatch("backward: cache does not match the given parameters");
  if (grad_seg.rows() != cache.input.rows() || grad_seg.cols() != kNumKeypoints)
    throw ShapeMismatch("backward: grad_seg dimensions mismatch");

  PointNetParams grads = PointNetParams::zeros(params.shape);
  const Eigen::Index feat = params.feature_dim();
  const Eigen::Index n_points = cache.input.rows();

  // --- segmentation head ---
  const Eigen::MatrixXd& probs = cache.seg_out.back();
  Eigen::MatrixXd d = grad_seg.cwiseProduct(probs.cwiseProduct(
      (Eigen::MatrixXd::Ones(probs.rows(), probs.cols()) - probs)));  // through sigmoid
  for (int l = static_cast<int>(params.seg_head.size()) - 1; l >= 0; --l) {
    if (l + 1 < static_cast<int>(params.seg_head.size())) {
      d = d.cwiseProduct((cache.seg_pre[l].array() > 0.0).cast<double>().matrix());
    }
    const Eigen::MatrixXd& in = (l == 0) ? cache.seg_input : cache.seg_out[l - 1];
    grads.seg_head[l].weight = d.transpose() * in;
    grads.seg_head[l].bias = d.colwise().sum().transpose();
    d = d * params.seg_head[l].weight;
  }
  Eigen::MatrixXd d_features = d.leftCols(feat);
  Eigen::RowVectorXd d_global = d.rightCols(feat).colwise().sum();

  // --- regression head ---
  Eigen::RowVectorXd dr(3 * kNumKeypoints);
  for (int k = 0; k < kNumKeypoints; ++k)
    for (int c = 0; c < 3; ++c) dr[3 * k + c] = grad_keypoints[k][c];
  for (int l = static_cast<int>(params.reg_head.size()) - 1; l >= 0; --l) {
    if (l + 1 < static_cast<int>(params.reg_head.size())) {
      dr = dr.cwiseProduct((cache.reg_pre[l].array() > 0.0).cast<double>().matrix());
    }
    const Eigen::RowVectorXd& in = (l == 0) ? cache.global : cache.reg_out[l - 1];
    grads.reg_head[l].weight = dr.transpose() * in;
    grads.reg_head[l].bias = dr.transpose();
    dr = dr * params.reg_head[l].weight;
  }
  d_global += dr;

  // --- max pool: route to the argmax row per feature ---
  for (Eigen::Index j = 0; j < feat; ++j) d_features(cache.argmax[j], j) += d_global[j];

  // --- encoder ---
  Eigen::MatrixXd de = d_features;
  for (int l = static_cast<int>(params.encoder.size()) - 1; l >= 0; --l) {
    de = de.cwiseProduct((cache.encoder_pre[l].array() > 0.0).cast<double>().matrix());
    const Eigen::MatrixXd& in = (l == 0) ? cache.input : cache.encoder_out[l - 1];
    grads.encoder[l].weight = de.transpose() * in;
    grads.encoder[l].bias = de.colwise().sum().transpose();
    de = de * params.encoder[l].weight;
  }
  (void)n_points;
  return grads.flatten();
}

/// Uniform subsample of [0, n_total) of size n: without replacement when
/// n_total >= n, with replacement otherwise. Deterministic per Rng state.
inline std::vector<std::size_t> subsample_indices(std::size_t n_total, std::size_t n, Rng& rng) {
  if (n_total == 0) throw EmptyCloud("subsample_indices: empty cloud");
  std::vector<std::size_t> out(n);
  if (n_total >= n) {
    std::vector<std::size_t> pool(n_total);
    std::iota(pool.begin(), pool.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {  // partial Fisher-Yates
      const std::size_t j = i + rng.uniform_index(n_total - i);
      std::swap(pool[i], pool[j]);
      out[i] = pool[i];
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) out[i] = rng.uniform_index(n_total);
  }
  return out;
}

inline Scene subsample_cloud(const Scene& scene, int n, std::uint64_t seed) {
  if (scene.points.empty()) throw EmptyCloud("subsample_cloud: empty scene");
  Rng rng = Rng::stream(seed, 0x53756273ULL);
  const auto idx = subsample_indices(scene.points.size(), static_cast<std::size_t>(n), rng);
  Scene out = scene;
  out.points.clear();
  out.points.reserve(idx.size());
  for (std::size_t i : idx) out.points.push_back(scene.points[i]);
  return out;
}

inline Point3 rotate_xy(const Point3& p, const Point3& center, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  const double dx = p.x - center.x, dy = p.y - center.y;
  return {center.x + c * dx - s * dy, center.y + s * dx + c * dy, p.z};
}

/// X-Y-plane rotation of the 3D point coordinates and pseudo labels about the
/// cloud centroid. 2D projections and camera features are left as sampled
/// pre-augmentation; pointwise labels are unchanged.
inline std::pair<Scene, PseudoLabels> augment_rotation(const Scene& scene,
                                                       const PseudoLabels& labels, double angle) {
  Scene out = scene;
  PseudoLabels out_labels = labels;
  const Point3 center = cloud_centroid(scene.points);
  for (auto& p : out.points) p.position = rotate_xy(p.position, center, angle);
  for (int k = 0; k < kNumKeypoints; ++k) {
    if (labels.visibility[k]) out_labels.y_tilde[k] = rotate_xy(labels.y_tilde[k], center, angle);
  }
  if (out.keypoints_3d_gt) {
    for (auto& j : out.keypoints_3d_gt->joints) j = rotate_xy(j, center, angle);
  }
  return {std::move(out), std::move(out_labels)};
}

enum class Ablation : int { kLidarOnly = 0, kLidarSeg, kFusion, kFusionSeg };

inline std::string to_string(Ablation a) {
  switch (a) {
    case Ablation::kLidarOnly: return "lidar_only";
    case Ablation::kLidarSeg: return "lidar_seg";
    case Ablation::kFusion: return "fusion";
    case Ablation::kFusionSeg: return "fusion_seg";
  }
  return "fusion_seg";
}

inline Ablation ablation_from_string(const std::string& s) {
  if (s == "lidar_only") return Ablation::kLidarOnly;
  if (s == "lidar_seg") return Ablation::kLidarSeg;
  if (s == "fusion") return Ablation::kFusion;
  if (s == "fusion_seg") return Ablation::kFusionSeg;
  throw ConfigError("unknown ablation: " + s);
}

inline bool ablation_uses_camera(Ablation a) {
  return a == Ablation::kFusion || a == Ablation::kFusionSeg;
}
inline bool ablation_uses_segmentation(Ablation a) {
  return a == Ablation::kLidarSeg || a == Ablation::kFusionSeg;
}

struct TrainConfig {
  int n_points = 256;
  int batch_size = 8;
  double learning_rate = 0.05;  // initial, cosine-decayed to 0
  int total_steps = 2000;
  std::uint64_t rng_seed = 0;
  bool augment = true;
  double lambda = 0.1;
  bool center_clouds = true;
  // input normalization: centered coordinates (~0.3 m spread) and heatmap
  // features (~0.03 mean) are far below unit scale; rescaling them keeps
  // activation magnitudes near 1 so the heads train at a sane rate
  double input_scale = 3.0;   // multiplies centered xyz columns
  double feature_gain = 5.0;  // multiplies camera-feature columns
  Ablation ablation = Ablation::kFusionSeg;
  PointNetShape shape;

  void validate() const {
    if (n_points < 1) throw ConfigError("TrainConfig: n_points must be >= 1");
    if (batch_size < 1) throw ConfigError("TrainConfig: batch_size must be >= 1");
    if (!(learning_rate > 0.0)) throw ConfigError("TrainConfig: learning_rate must be > 0");
    if (total_steps < 1) throw ConfigError("TrainConfig: total_steps must be >= 1");
    if (lambda < 0.0) throw ConfigError("TrainConfig: lambda must be >= 0");
    if (!(input_scale > 0.0)) throw ConfigError("TrainConfig: input_scale must be > 0");
    if (!(feature_gain > 0.0)) throw ConfigError("TrainConfig: feature_gain must be > 0");
  }
};

struct RunLogEntry {
  int step = 0;
  double lr = 0.0;
  double l_reg = 0.0;
  double l_seg = 0.0;
  double l = 0.0;
};

struct TrainResult {
  PointNetParams params;
  std::vector<RunLogEntry> log;
};

inline double cosine_lr(double initial, int step, int total_steps) {
  return initial * 0.5 * (1.0 + std::cos(M_PI * static_cast<double>(step) / total_steps));
}

/// Per-scene training inputs, precomputed once: pseudo labels and the fused
/// cloud sampled from the smoothed oracle heatmap.
struct PreparedScene {
  PseudoLabels labels;
  FusedCloud fused;
};

inline PreparedScene prepare_scene(const Scene& scene, const LabelGenConfig& labelgen_config,
                                   const HeatmapOracleConfig& oracle_config, int grid_height = 64,
                                   int grid_width = 64) {
  PreparedScene out;
  out.labels = pseudo_3d_labels(scene, labelgen_config);
  Heatmap h = render_gt_heatmap(scene.keypoints_2d, scene.camera, grid_height, grid_width,
                                oracle_config);
  h = smooth_heatmap(h, oracle_config.smooth_kernel_size, oracle_config.smooth_sigma);
  out.fused = sample_camera_features(h, scene);
  return out;
}

/// One training sample after subsample / augment / centering, plus what the
/// loss needs. Exposed for tests.
struct TrainSample {
  Eigen::MatrixXd input;  // n_points x (3+K)
  PseudoLabels labels;    // y_tilde expressed in the network (centered) frame
  std::vector<std::array<std::uint8_t, kNumKeypoints>> pointwise;
  Point3 centroid;        // world offset removed from the inputs
};

inline TrainSample make_train_sample(const PreparedScene& prepared, const TrainConfig& config,
                                     Rng& rng, bool allow_augment) {
  TrainSample sample;
  const auto idx =
      subsample_indices(prepared.fused.size(), static_cast<std::size_t>(config.n_points), rng);

  const bool use_cam = ablation_uses_camera(config.ablation);
  sample.input.resize(static_cast<Eigen::Index>(idx.size()), 3 + kNumKeypoints);
  sample.pointwise.resize(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    for (int c = 0; c < 3 + kNumKeypoints; ++c) {
      const double gain = c < 3 ? 1.0 : config.feature_gain;
      sample.input(i, c) = (c < 3 || use_cam) ? gain * prepared.fused.rows[idx[i]][c] : 0.0;
    }
    sample.pointwise[i] = prepared.labels.pointwise[idx[i]];
  }
  sample.labels = prepared.labels;
  sample.labels.pointwise.clear();  // row set replaced by the subsample

  Point3 centroid{0, 0, 0};
  for (Eigen::Index i = 0; i < sample.input.rows(); ++i) {
    centroid.x += sample.input(i, 0);
    centroid.y += sample.input(i, 1);
    centroid.z += sample.input(i, 2);
  }
  centroid = (1.0 / sample.input.rows()) * centroid;

  double angle = 0.0;
  if (allow_augment && config.augment) angle = rng.uniform(0.0, 2.0 * M_PI);
  const double ca = std::cos(angle), sa = std::sin(angle);
  for (Eigen::Index i = 0; i < sample.input.rows(); ++i) {
    const double dx = sample.input(i, 0) - centroid.x;
    const double dy = sample.input(i, 1) - centroid.y;
    sample.input(i, 0) = ca * dx - sa * dy;
    sample.input(i, 1) = sa * dx + ca * dy;
    if (config.center_clouds) {
      sample.input(i, 2) -= centroid.z;
    } else {
      sample.input(i, 0) += centroid.x;
      sample.input(i, 1) += centroid.y;
    }
    for (int c = 0; c < 3; ++c) sample.input(i, c) *= config.input_scale;
  }
  for (int k = 0; k < kNumKeypoints; ++k) {
    if (!sample.labels.visibility[k]) continue;
    Point3 y = rotate_xy(sample.labels.y_tilde[k], centroid, angle);
    if (config.center_clouds) y = y - centroid;
    sample.labels.y_tilde[k] = y;
  }
  sample.centroid = config.center_clouds ? centroid : Point3{0, 0, 0};
  return sample;
}

/// Plain SGD with cosine learning-rate decay on precomputed scene inputs.
/// Deterministic per (dataset, config).
inline TrainResult train(const std::vector<Scene>& dataset, const TrainConfig& config,
                         const LossConfig& loss_config, const LabelGenConfig& labelgen_config,
                         const HeatmapOracleConfig& oracle_config) {
  config.validate();
  loss_config.validate();
  if (dataset.empty()) throw EmptyCloud("train: empty dataset");

  std::vector<PreparedScene> prepared;
  prepared.reserve(dataset.size());
  for (const auto& scene : dataset)
    prepared.push_back(prepare_scene(scene, labelgen_config, oracle_config));

  TrainResult result;
  result.params = PointNetParams::init(config.shape, config.rng_seed);
  Eigen::VectorXd flat = result.params.flatten();
  Rng rng = Rng::stream(config.rng_seed, 0x547261696eULL);

  const double lambda = ablation_uses_segmentation(config.ablation) ? config.lambda : 0.0;
  LossConfig seg_loss_config = loss_config;
  seg_loss_config.lambda = lambda;

  result.log.reserve(config.total_steps);
  for (int step = 0; step < config.total_steps; ++step) {
    const double lr = cosine_lr(config.learning_rate, step, config.total_steps);
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(flat.size());
    double batch_reg = 0.0, batch_seg = 0.0;

    for (int b = 0; b < config.batch_size; ++b) {
      const std::size_t scene_idx = rng.uniform_index(dataset.size());
      const TrainSample sample = make_train_sample(prepared[scene_idx], config, rng, true);

      const ForwardResult fwd = forward(result.params, sample.input);
      const auto reg = regression_loss(fwd.keypoints, sample.labels, loss_config);
      batch_reg += reg.value;

      Eigen::MatrixXd grad_seg = Eigen::MatrixXd::Zero(sample.input.rows(), kNumKeypoints);
      double seg_value = 0.0;
      if (lambda > 0.0) {
        std::vector<std::array<double, kNumKeypoints>> scores(sample.input.rows());
        for (Eigen::Index i = 0; i < fwd.seg_scores.rows(); ++i)
          for (int k = 0; k < kNumKeypoints; ++k) scores[i][k] = fwd.seg_scores(i, k);
        const auto seg =
            segmentation_loss(scores, sample.pointwise, sample.labels.visibility, loss_config);
        seg_value = seg.value;
        for (Eigen::Index i = 0; i < grad_seg.rows(); ++i)
          for (int k = 0; k < kNumKeypoints; ++k)
            grad_seg(i, k) = lambda * seg.grad_scores[i][k];
      }
      batch_seg += seg_value;

      grad += backward(result.params, fwd.cache, reg.grad_pred, grad_seg);
    }

    grad /= config.batch_size;
    batch_reg /= config.batch_size;
    batch_seg /= config.batch_size;
    const double total = combined_loss(batch_reg, batch_seg, lambda);
    if (!std::isfinite(total)) {
      throw DivergenceDetected("train: non-finite loss at step " + std::to_string(step));
    }
    flat -= lr * grad;
    result.params.unflatten(flat);
    result.log.push_back({step, lr, batch_reg, batch_seg, total});
  }
  return result;
}

/// Inference on a full scene: fuse, deterministically subsample, center,
/// forward, and restore the world frame.
inline std::array<Point3, kNumKeypoints> predict(const PointNetParams& params,
                                                 const PreparedScene& prepared,
                                                 const TrainConfig& config) {
  TrainConfig cfg = config;
  cfg.augment = false;
  Rng rng = Rng::stream(config.rng_seed, 0x50726564ULL);
  const TrainSample sample = make_train_sample(prepared, cfg, rng, false);
  const ForwardResult fwd = forward(params, sample.input);
  std::array<Point3, kNumKeypoints> out;
  for (int k = 0; k < kNumKeypoints; ++k) out[k] = fwd.keypoints[k] + sample.centroid;
  return out;
}

}  // namespace wsp

#endif  // WSP_POINTNET_HPP_
