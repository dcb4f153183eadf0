#ifndef WSP_LOSSES_HPP_
#define WSP_LOSSES_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "wsp/errors.hpp"
#include "wsp/fusion.hpp"
#include "wsp/labelgen.hpp"
#include "wsp/scene.hpp"

namespace wsp {

struct LossConfig {
  double huber_delta = 1.0;  // in units of the scaled residual
  std::array<double, kNumKeypoints> scale_factors = {0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1,
                                                     0.1, 0.1, 0.1, 0.1, 0.1, 0.1};  // s_k, meters
  double w_pos = 10.0;
  double w_neg = 1.0;
  double lambda = 0.1;

  void validate() const {
    if (!(huber_delta > 0.0)) throw ConfigError("LossConfig: huber_delta must be > 0");
    for (double s : scale_factors)
      if (!(s > 0.0)) throw ConfigError("LossConfig: scale factors must be > 0");
    if (!(w_pos > 0.0) || !(w_neg > 0.0)) throw ConfigError("LossConfig: class weights must be > 0");
    if (lambda < 0.0) throw ConfigError("LossConfig: lambda must be >= 0");
  }
};

inline double huber(double x, double delta) {
  const double a = std::abs(x);
  return a <= delta ? 0.5 * x * x : delta * (a - 0.5 * delta);
}

inline double huber_derivative(double x, double delta) {
  return std::abs(x) <= delta ? x : (x > 0 ? delta : -delta);
}

struct RegressionLossResult {
  double value = 0.0;
  std::array<std::array<double, 3>, kNumKeypoints> grad_pred{};  // d value / d pred
};

/// Reliability-weighted Huber regression loss, Huber applied per coordinate of
/// the scaled residual (pred - label) / s_k, averaged over all K keypoints.
/// Invisible keypoints contribute nothing.
inline RegressionLossResult regression_loss(const std::array<Point3, kNumKeypoints>& pred,
                                            const PseudoLabels& labels, const LossConfig& config) {
  config.validate();
  RegressionLossResult result;
  for (int k = 0; k < kNumKeypoints; ++k) {
    if (!labels.visibility[k]) continue;
    const double weight = labels.reliability[k] / kNumKeypoints;
    const double s = config.scale_factors[k];
    const double residual[3] = {(pred[k].x - labels.y_tilde[k].x) / s,
                                (pred[k].y - labels.y_tilde[k].y) / s,
                                (pred[k].z - labels.y_tilde[k].z) / s};
    for (int c = 0; c < 3; ++c) {
      result.value += weight * huber(residual[c], config.huber_delta);
      result.grad_pred[k][c] = weight * huber_derivative(residual[c], config.huber_delta) / s;
    }
  }
  return result;
}

struct SegmentationLossResult {
  double value = 0.0;
  std::vector<std::array<double, kNumKeypoints>> grad_scores;  // N x 13
};

inline constexpr double kProbClampEps = 1e-7;

/// Weighted binary cross-entropy over N x K pointwise scores, gated by
/// keypoint visibility, normalized by K. Scores are clamped to
/// [eps, 1 - eps]; the gradient is zero where the clamp is active.
inline SegmentationLossResult segmentation_loss(
    const std::vector<std::array<double, kNumKeypoints>>& scores,
    const std::vector<std::array<std::uint8_t, kNumKeypoints>>& labels,
    const std::array<int, kNumKeypoints>& visibility, const LossConfig& config) {
  config.validate();
  if (scores.size() != labels.size())
    throw ShapeMismatch("segmentation_loss: scores and labels row counts differ");
  SegmentationLossResult result;
  result.grad_scores.assign(scores.size(), {});
  for (std::size_t i = 0; i < scores.size(); ++i) {
    for (int k = 0; k < kNumKeypoints; ++k) {
      if (!visibility[k]) continue;
      const double p = std::clamp(scores[i][k], kProbClampEps, 1.0 - kProbClampEps);
      const bool positive = labels[i][k] != 0;
      if (positive) {
        result.value += -config.w_pos * std::log(p) / kNumKeypoints;
      } else {
        result.value += -config.w_neg * std::log(1.0 - p) / kNumKeypoints;
      }
      const bool clamped = scores[i][k] < kProbClampEps || scores[i][k] > 1.0 - kProbClampEps;
      if (!clamped) {
        result.grad_scores[i][k] =
            (positive ? -config.w_pos / p : config.w_neg / (1.0 - p)) / kNumKeypoints;
      }
    }
  }
  return result;
}

/// L = L_reg + lambda * L_seg.
inline double combined_loss(double reg, double seg, double lambda) { return reg + lambda * seg; }

/// Visibility-gated MSE between two heatmaps, normalized by H'W'K. Scores a
/// corrupted heatmap oracle against the clean one.
inline double heatmap_mse_loss(const Heatmap& pred, const Heatmap& gt,
                               const std::array<int, kNumKeypoints>& visibility) {
  if (pred.height != gt.height || pred.width != gt.width)
    throw ShapeMismatch("heatmap_mse_loss: heatmap dimensions differ");
  double sum = 0.0;
  for (int n = 0; n < pred.height; ++n) {
    for (int m = 0; m < pred.width; ++m) {
      for (int k = 0; k < kNumKeypoints; ++k) {
        if (!visibility[k]) continue;
        const double d = pred.at(n, m, k) - gt.at(n, m, k);
        sum += d * d;
      }
    }
  }
  return sum / (static_cast<double>(pred.height) * pred.width * kNumKeypoints);
}

}  // namespace wsp

#endif  // WSP_LOSSES_HPP_
