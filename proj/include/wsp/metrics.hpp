#ifndef WSP_METRICS_HPP_
#define WSP_METRICS_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "wsp/errors.hpp"
#include "wsp/geometry.hpp"
#include "wsp/scene.hpp"

namespace wsp {

/// COCO-derived per-keypoint constants for the 13-type set (doubled sigmas
/// folded into k_i).
inline std::array<double, kNumKeypoints> default_oks_kappas() {
  return {0.026,          // nose
          0.079, 0.079,   // shoulders
          0.072, 0.072,   // elbows
          0.062, 0.062,   // wrists
          0.107, 0.107,   // hips
          0.087, 0.087,   // knees
          0.089, 0.089};  // ankles
}

struct OksConfig {
  std::array<double, kNumKeypoints> kappas = default_oks_kappas();
  double epsilon = 1e-12;
  std::vector<double> thresholds = {0.50, 0.55, 0.60, 0.65, 0.70, 0.75, 0.80, 0.85, 0.90, 0.95};

  void validate() const {
    for (double k : kappas)
      if (!(k > 0.0)) throw ConfigError("OksConfig: kappas must be > 0");
    if (!(epsilon > 0.0)) throw ConfigError("OksConfig: epsilon must be > 0");
    for (std::size_t i = 1; i < thresholds.size(); ++i)
      if (!(thresholds[i] > thresholds[i - 1]))
        throw ConfigError("OksConfig: thresholds must be strictly increasing");
  }
};

/// One evaluation pair. Distances d_i live in whatever space pred/gt are
/// expressed in (3D meters, or 2D pixels with z ignored after projection).
struct EvalSample {
  std::array<Point3, kNumKeypoints> pred{};
  std::array<Point3, kNumKeypoints> gt{};
  std::array<int, kNumKeypoints> visibility{};
  double object_scale = 1.0;  // s
};

/// Object scale for OKS@3D: square root of the product of the two largest
/// extents of the visible ground-truth keypoints' bounding box.
inline double object_scale_3d(const std::array<Point3, kNumKeypoints>& gt,
                              const std::array<int, kNumKeypoints>& visibility) {
  Point3 lo{1e30, 1e30, 1e30}, hi{-1e30, -1e30, -1e30};
  bool any = false;
  for (int k = 0; k < kNumKeypoints; ++k) {
    if (!visibility[k]) continue;
    any = true;
    lo.x = std::min(lo.x, gt[k].x); hi.x = std::max(hi.x, gt[k].x);
    lo.y = std::min(lo.y, gt[k].y); hi.y = std::max(hi.y, gt[k].y);
    lo.z = std::min(lo.z, gt[k].z); hi.z = std::max(hi.z, gt[k].z);
  }
  if (!any) throw NoVisibleKeypoints("object_scale_3d: no visible keypoints");
  std::array<double, 3> ext = {hi.x - lo.x, hi.y - lo.y, hi.z - lo.z};
  std::sort(ext.begin(), ext.end());
  return std::sqrt(std::max(ext[1] * ext[2], 1e-6));
}

/// Object scale for OKS@2D: square root of the visible ground-truth 2D
/// bounding-box area.
inline double object_scale_2d(const std::array<Point3, kNumKeypoints>& gt,
                              const std::array<int, kNumKeypoints>& visibility) {
  double lou = 1e30, hiu = -1e30, lov = 1e30, hiv = -1e30;
  bool any = false;
  for (int k = 0; k < kNumKeypoints; ++k) {
    if (!visibility[k]) continue;
    any = true;
    lou = std::min(lou, gt[k].x); hiu = std::max(hiu, gt[k].x);
    lov = std::min(lov, gt[k].y); hiv = std::max(hiv, gt[k].y);
  }
  if (!any) throw NoVisibleKeypoints("object_scale_2d: no visible keypoints");
  return std::sqrt(std::max((hiu - lou) * (hiv - lov), 1e-6));
}

inline double oks_exp_term(double d, double s, double kappa) {
  return std::exp(-(d * d) / (2.0 * s * s * kappa * kappa));
}

/// Per-keypoint OKS as printed: exp term gated by visibility, denominator
/// guarded by epsilon. Zero for invisible keypoints.
inline double per_keypoint_oks(const EvalSample& sample, int k, const OksConfig& config) {
  config.validate();
  const double vis = sample.visibility[k] ? 1.0 : 0.0;
  const double d = distance(sample.pred[k], sample.gt[k]);
  return oks_exp_term(d, sample.object_scale, config.kappas[k]) * vis / (vis + config.epsilon);
}

/// Object-level OKS: visible-averaged exp terms.
inline double object_oks(const EvalSample& sample, const OksConfig& config) {
  config.validate();
  double sum = 0.0;
  int count = 0;
  for (int k = 0; k < kNumKeypoints; ++k) {
    if (!sample.visibility[k]) continue;
    sum += oks_exp_term(distance(sample.pred[k], sample.gt[k]), sample.object_scale,
                        config.kappas[k]);
    ++count;
  }
  if (count == 0) throw NoVisibleKeypoints("object_oks: no visible keypoints");
  return sum / count;
}

struct OksAccResult {
  double acc = 0.0;                   // mean over thresholds
  std::vector<double> per_threshold;  // fraction of samples clearing each t
};

inline OksAccResult oks_acc(const std::vector<EvalSample>& samples, const OksConfig& config) {
  config.validate();
  if (samples.empty()) throw EmptyEvalSet("oks_acc: no samples");
  std::vector<double> oks_values;
  oks_values.reserve(samples.size());
  for (const auto& s : samples) oks_values.push_back(object_oks(s, config));

  OksAccResult result;
  result.per_threshold.resize(config.thresholds.size());
  for (std::size_t j = 0; j < config.thresholds.size(); ++j) {
    int pass = 0;
    for (double oks : oks_values)
      if (oks >= config.thresholds[j]) ++pass;
    result.per_threshold[j] = static_cast<double>(pass) / samples.size();
    result.acc += result.per_threshold[j];
  }
  result.acc /= config.thresholds.size();
  return result;
}

/// Mean Euclidean error over all (sample, visible keypoint) pairs. Plain, no
/// Procrustes alignment.
inline double mpjpe(const std::vector<EvalSample>& samples) {
  double sum = 0.0;
  long count = 0;
  for (const auto& s : samples) {
    for (int k = 0; k < kNumKeypoints; ++k) {
      if (!s.visibility[k]) continue;
      sum += distance(s.pred[k], s.gt[k]);
      ++count;
    }
  }
  if (count == 0) throw NoVisibleKeypoints("mpjpe: no visible keypoints in the set");
  return sum / count;
}

/// Project a 3D sample to a 2D one (u, v stored in x, y; z = 0), for OKS@2D.
inline EvalSample project_predictions(const EvalSample& sample_3d, const CameraModel& cam) {
  EvalSample out;
  out.visibility = sample_3d.visibility;
  for (int k = 0; k < kNumKeypoints; ++k) {
    if (!sample_3d.visibility[k]) continue;
    Projection pp, pg;
    try {
      pp = project(cam, sample_3d.pred[k]);
      pg = project(cam, sample_3d.gt[k]);
    } catch (const NonPositiveDepth&) {
      throw NonPositiveDepth("project_predictions: non-positive depth at keypoint " +
                             std::to_string(k));
    }
    out.pred[k] = {pp.pixel.u, pp.pixel.v, 0.0};
    out.gt[k] = {pg.pixel.u, pg.pixel.v, 0.0};
  }
  out.object_scale = object_scale_2d(out.gt, out.visibility);
  return out;
}

}  // namespace wsp

#endif  // WSP_METRICS_HPP_
