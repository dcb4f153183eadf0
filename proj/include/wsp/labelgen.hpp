#ifndef WSP_LABELGEN_HPP_
#define WSP_LABELGEN_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "wsp/errors.hpp"
#include "wsp/geometry.hpp"
#include "wsp/scene.hpp"

namespace wsp {

struct LabelGenConfig {
  double temperature = 0.05;             // T, 1/px^2, softmax sharpness
  double reliability_temperature = 0.01; // T_r, 1/px^2
  double positive_radius = 5.0;          // r, px, pointwise-label neighborhood
  double min_neighbor_px = 25.0;         // warning floor for the quality report

  void validate() const {
    if (!(temperature > 0.0)) throw ConfigError("LabelGenConfig: temperature must be > 0");
    if (!(reliability_temperature > 0.0))
      throw ConfigError("LabelGenConfig: reliability_temperature must be > 0");
    if (!(positive_radius > 0.0)) throw ConfigError("LabelGenConfig: positive_radius must be > 0");
  }
};

/// Generated training targets: pseudo 3D keypoints, per-keypoint reliability,
/// and the pointwise assignment matrix. Entries for invisible keypoints are
/// all-zero sentinels.
struct PseudoLabels {
  std::array<Point3, kNumKeypoints> y_tilde{};
  std::array<double, kNumKeypoints> reliability{};
  std::array<int, kNumKeypoints> visibility{};
  std::vector<std::array<std::uint8_t, kNumKeypoints>> pointwise;  // N x 13, {0,1}
};

/// Softmax weights over squared pixel distances for one keypoint, with
/// max-subtraction stabilization. Weights sum to 1.
inline std::vector<double> keypoint_softmax_weights(const std::vector<ScenePoint>& points,
                                                    const Point2& keypoint, double temperature) {
  std::vector<double> logit(points.size());
  double max_logit = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < points.size(); ++i) {
    logit[i] = -temperature * squared_pixel_distance(points[i].projection, keypoint);
    max_logit = std::max(max_logit, logit[i]);
  }
  double sum = 0.0;
  for (auto& l : logit) {
    l = std::exp(l - max_logit);
    sum += l;
  }
  for (auto& l : logit) l /= sum;
  return logit;
}

/// Pointwise labels only: l_ik = 1 iff the point projects within
/// positive_radius of a visible keypoint's 2D label (boundary inclusive).
inline std::vector<std::array<std::uint8_t, kNumKeypoints>> pointwise_labels(
    const Scene& scene, const LabelGenConfig& config) {
  config.validate();
  if (scene.points.empty()) throw EmptyCloud("pointwise_labels: scene has no points");
  std::vector<std::array<std::uint8_t, kNumKeypoints>> out(scene.points.size());
  const double r = config.positive_radius;
  for (std::size_t i = 0; i < scene.points.size(); ++i) {
    for (int k = 0; k < kNumKeypoints; ++k) {
      const bool close =
          distance(scene.points[i].projection, scene.keypoints_2d[k].pixel) <= r;
      out[i][k] = (close && scene.keypoints_2d[k].visibility) ? 1 : 0;
    }
  }
  return out;
}

/// Full label generation: softmax-averaged pseudo 3D keypoints, reliabilities
/// from the nearest projected point, and pointwise labels. Computed on the
/// full (pre-subsampling) cloud of the scene.
inline PseudoLabels pseudo_3d_labels(const Scene& scene, const LabelGenConfig& config) {
  config.validate();
  if (scene.points.empty()) throw EmptyCloud("pseudo_3d_labels: scene has no points");
  bool any_visible = false;
  for (const auto& kp : scene.keypoints_2d) any_visible |= (kp.visibility != 0);
  if (!any_visible) throw AllInvisible("pseudo_3d_labels: every keypoint is invisible");

  PseudoLabels labels;
  for (int k = 0; k < kNumKeypoints; ++k) {
    labels.visibility[k] = scene.keypoints_2d[k].visibility;
    if (!labels.visibility[k]) continue;  // sentinel zeros

    const Point2& y2 = scene.keypoints_2d[k].pixel;
    const auto alpha = keypoint_softmax_weights(scene.points, y2, config.temperature);
    Point3 acc{0, 0, 0};
    double min_sq = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < scene.points.size(); ++i) {
      acc = acc + alpha[i] * scene.points[i].position;
      min_sq = std::min(min_sq, squared_pixel_distance(scene.points[i].projection, y2));
    }
    labels.y_tilde[k] = acc;
    labels.reliability[k] = std::exp(-config.reliability_temperature * min_sq);
  }
  labels.pointwise = pointwise_labels(scene, config);
  return labels;
}

struct KeypointQuality {
  double error_3d_m = 0.0;        // ||y_tilde - y_gt||, meters
  double min_neighbor_px = 0.0;   // nearest projected-point distance
  int positive_points = 0;        // column sum of the pointwise matrix
  double reliability = 0.0;
  int visibility = 0;
  bool low_support = false;       // min_neighbor_px above the warning floor
};

struct QualityReport {
  std::array<KeypointQuality, kNumKeypoints> per_keypoint{};
  double mean_error_m = 0.0;  // over visible keypoints
  double max_error_m = 0.0;
  int visible_count = 0;
};

inline QualityReport label_quality_report(const Scene& scene, const PseudoLabels& labels,
                                          const LabelGenConfig& config = {}) {
  if (!scene.keypoints_3d_gt) {
    throw MissingGroundTruth("label_quality_report: scene has no 3D ground truth");
  }
  QualityReport report;
  double sum = 0.0;
  for (int k = 0; k < kNumKeypoints; ++k) {
    auto& q = report.per_keypoint[k];
    q.visibility = labels.visibility[k];
    q.reliability = labels.reliability[k];
    double min_d = std::numeric_limits<double>::infinity();
    for (const auto& p : scene.points) {
      min_d = std::min(min_d, distance(p.projection, scene.keypoints_2d[k].pixel));
    }
    q.min_neighbor_px = min_d;
    q.low_support = min_d > config.min_neighbor_px;
    for (const auto& row : labels.pointwise) q.positive_points += row[k];
    if (!q.visibility) continue;
    q.error_3d_m = distance(labels.y_tilde[k], scene.keypoints_3d_gt->joints[k]);
    sum += q.error_3d_m;
    report.max_error_m = std::max(report.max_error_m, q.error_3d_m);
    ++report.visible_count;
  }
  report.mean_error_m = report.visible_count > 0 ? sum / report.visible_count : 0.0;
  return report;
}

}  // namespace wsp

#endif  // WSP_LABELGEN_HPP_
