#ifndef WSP_SCENE_HPP_
#define WSP_SCENE_HPP_

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "wsp/geometry.hpp"

namespace wsp {

inline constexpr int kNumKeypoints = 13;

enum class KeypointType : int {
  kNose = 0,
  kLeftShoulder,
  kRightShoulder,
  kLeftElbow,
  kRightElbow,
  kLeftWrist,
  kRightWrist,
  kLeftHip,
  kRightHip,
  kLeftKnee,
  kRightKnee,
  kLeftAnkle,
  kRightAnkle,
};

inline const std::array<std::string, kNumKeypoints>& keypoint_names() {
  static const std::array<std::string, kNumKeypoints> names = {
      "nose",     "left_shoulder", "right_shoulder", "left_elbow", "right_elbow",
      "left_wrist", "right_wrist", "left_hip",       "right_hip",  "left_knee",
      "right_knee", "left_ankle",  "right_ankle"};
  return names;
}

/// 13 named joints in the LiDAR frame plus per-joint visibility.
struct SkeletonPose {
  std::array<Point3, kNumKeypoints> joints{};
  std::array<int, kNumKeypoints> visibility{};  // 0 or 1

  const Point3& joint(KeypointType t) const { return joints[static_cast<int>(t)]; }
  Point3& joint(KeypointType t) { return joints[static_cast<int>(t)]; }
};

struct ScenePoint {
  Point3 position;    // LiDAR frame, meters
  Point2 projection;  // cached image coordinates (may be off-image)
  double depth = 0.0; // camera-frame z, meters
};

struct Keypoint2D {
  Point2 pixel;
  int visibility = 0;  // v_k
};

/// One pedestrian sample: the culled point cloud with cached projections,
/// 2D keypoint labels, and (synthetic data only) ground-truth 3D joints.
struct Scene {
  std::string scene_id;
  CameraModel camera;
  std::vector<ScenePoint> points;
  std::array<Keypoint2D, kNumKeypoints> keypoints_2d{};
  std::optional<SkeletonPose> keypoints_3d_gt;

  std::size_t size() const { return points.size(); }
};

inline Point3 cloud_centroid(const std::vector<ScenePoint>& points) {
  Point3 c{0, 0, 0};
  if (points.empty()) return c;
  for (const auto& p : points) c = c + p.position;
  return (1.0 / static_cast<double>(points.size())) * c;
}

}  // namespace wsp

#endif  // WSP_SCENE_HPP_
