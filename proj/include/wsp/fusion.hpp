#ifndef WSP_FUSION_HPP_
#define WSP_FUSION_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "wsp/errors.hpp"
#include "wsp/geometry.hpp"
#include "wsp/rng.hpp"
#include "wsp/scene.hpp"

namespace wsp {

/// H' x W' x K grid of keypoint likelihoods in [0, 1].
struct Heatmap {
  int height = 0;  // H'
  int width = 0;   // W'
  std::vector<double> data;  // row-major (n, m, k)

  Heatmap() = default;
  Heatmap(int h, int w) : height(h), width(w), data(static_cast<std::size_t>(h) * w * kNumKeypoints, 0.0) {}

  double& at(int n, int m, int k) {
    return data[(static_cast<std::size_t>(n) * width + m) * kNumKeypoints + k];
  }
  double at(int n, int m, int k) const {
    return data[(static_cast<std::size_t>(n) * width + m) * kNumKeypoints + k];
  }
  bool inside(int n, int m) const { return n >= 0 && n < height && m >= 0 && m < width; }
};

struct HeatmapCorruption {
  double dropout_prob = 0.0;  // per-keypoint channel zeroing probability
  double jitter_sigma = 0.0;  // grid pixels, Gaussian peak-center jitter
  std::uint64_t rng_seed = 0;
};

struct HeatmapOracleConfig {
  double sigma_render = 2.0;     // grid pixels
  int smooth_kernel_size = 7;    // odd
  double smooth_sigma = 3.0;     // grid pixels
  std::optional<HeatmapCorruption> corruption;

  void validate() const {
    if (!(sigma_render > 0.0)) throw ConfigError("HeatmapOracleConfig: sigma_render must be > 0");
    if (smooth_kernel_size < 1 || smooth_kernel_size % 2 == 0)
      throw ConfigError("HeatmapOracleConfig: smooth_kernel_size must be odd and >= 1");
    if (!(smooth_sigma > 0.0)) throw ConfigError("HeatmapOracleConfig: smooth_sigma must be > 0");
    if (corruption &&
        (corruption->dropout_prob < 0.0 || corruption->dropout_prob > 1.0))
      throw ConfigError("HeatmapOracleConfig: dropout_prob must be in [0, 1]");
  }
};

/// Ground-truth-style heatmap: Gaussian peaks at the 2D keypoint labels scaled
/// into grid coordinates, one channel per keypoint, zero for invisible ones.
/// Stands in for a camera CNN; optional corruption simulates an imperfect one.
inline Heatmap render_gt_heatmap(const std::array<Keypoint2D, kNumKeypoints>& keypoints_2d,
                                 const CameraModel& cam, int grid_height, int grid_width,
                                 const HeatmapOracleConfig& config) {
  config.validate();
  if (grid_height <= 0 || grid_width <= 0)
    throw ConfigError("render_gt_heatmap: grid dimensions must be positive");
  Heatmap h(grid_height, grid_width);
  Rng rng(config.corruption ? config.corruption->rng_seed : 0);
  const double inv_two_sigma2 = 1.0 / (2.0 * config.sigma_render * config.sigma_render);
  for (int k = 0; k < kNumKeypoints; ++k) {
    bool dropped = false;
    double jitter_m = 0.0, jitter_n = 0.0;
    if (config.corruption) {
      // draw per channel regardless of visibility so streams stay aligned
      dropped = rng.uniform() < config.corruption->dropout_prob;
      jitter_m = rng.normal(0.0, config.corruption->jitter_sigma);
      jitter_n = rng.normal(0.0, config.corruption->jitter_sigma);
    }
    if (!keypoints_2d[k].visibility || dropped) continue;
    const double mk = (static_cast<double>(grid_width) / cam.width) * keypoints_2d[k].pixel.u + jitter_m;
    const double nk = (static_cast<double>(grid_height) / cam.height) * keypoints_2d[k].pixel.v + jitter_n;
    for (int n = 0; n < grid_height; ++n) {
      for (int m = 0; m < grid_width; ++m) {
        const double d2 = (m - mk) * (m - mk) + (n - nk) * (n - nk);
        h.at(n, m, k) = std::exp(-d2 * inv_two_sigma2);
      }
    }
  }
  return h;
}

/// Normalized 2D Gaussian kernel, truncated to kernel_size x kernel_size.
inline std::vector<double> gaussian_kernel_2d(int kernel_size, double sigma) {
  std::vector<double> kernel(static_cast<std::size_t>(kernel_size) * kernel_size);
  const int half = kernel_size / 2;
  double sum = 0.0;
  for (int dy = -half; dy <= half; ++dy) {
    for (int dx = -half; dx <= half; ++dx) {
      const double w = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
      kernel[(dy + half) * kernel_size + (dx + half)] = w;
      sum += w;
    }
  }
  for (auto& w : kernel) w /= sum;
  return kernel;
}

/// Channelwise convolution with a normalized Gaussian, zero padding at the
/// borders. A normalized kernel cannot overshoot [0, 1].
inline Heatmap smooth_heatmap(const Heatmap& h, int kernel_size, double sigma) {
  if (kernel_size < 1 || kernel_size % 2 == 0)
    throw ConfigError("smooth_heatmap: kernel_size must be odd and >= 1");
  if (kernel_size == 1) return h;
  const auto kernel = gaussian_kernel_2d(kernel_size, sigma);
  const int half = kernel_size / 2;
  Heatmap out(h.height, h.width);
  for (int n = 0; n < h.height; ++n) {
    for (int m = 0; m < h.width; ++m) {
      for (int k = 0; k < kNumKeypoints; ++k) {
        double acc = 0.0;
        for (int dy = -half; dy <= half; ++dy) {
          const int nn = n + dy;
          if (nn < 0 || nn >= h.height) continue;
          for (int dx = -half; dx <= half; ++dx) {
            const int mm = m + dx;
            if (mm < 0 || mm >= h.width) continue;
            acc += kernel[(dy + half) * kernel_size + (dx + half)] * h.at(nn, mm, k);
          }
        }
        out.at(n, m, k) = acc;
      }
    }
  }
  return out;
}

/// Augmented point cloud: each row is [x y z | 13 camera-feature channels].
struct FusedCloud {
  std::vector<std::array<double, 3 + kNumKeypoints>> rows;

  std::size_t size() const { return rows.size(); }
};

/// Per-point heatmap lookup at the rounded, grid-scaled projection. Points
/// projecting outside the grid get zero camera features.
inline FusedCloud sample_camera_features(const Heatmap& h, const Scene& scene) {
  FusedCloud fused;
  fused.rows.resize(scene.points.size());
  const double su = static_cast<double>(h.width) / scene.camera.width;
  const double sv = static_cast<double>(h.height) / scene.camera.height;
  for (std::size_t i = 0; i < scene.points.size(); ++i) {
    auto& row = fused.rows[i];
    row.fill(0.0);
    row[0] = scene.points[i].position.x;
    row[1] = scene.points[i].position.y;
    row[2] = scene.points[i].position.z;
    const int m = round_half_away(su * scene.points[i].projection.u);
    const int n = round_half_away(sv * scene.points[i].projection.v);
    if (h.inside(n, m)) {
      for (int k = 0; k < kNumKeypoints; ++k) row[3 + k] = h.at(n, m, k);
    }
  }
  return fused;
}

}  // namespace wsp

#endif  // WSP_FUSION_HPP_
