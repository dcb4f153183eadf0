#ifndef WSP_SYNTH_HPP_
#define WSP_SYNTH_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wsp/errors.hpp"
#include "wsp/geometry.hpp"
#include "wsp/rng.hpp"
#include "wsp/scene.hpp"

namespace wsp {

enum class PoseFamily : int { kStanding = 0, kWalking, kCycling, kRandomArticulation };

inline std::string to_string(PoseFamily f) {
  switch (f) {
    case PoseFamily::kStanding: return "standing";
    case PoseFamily::kWalking: return "walking";
    case PoseFamily::kCycling: return "cycling";
    case PoseFamily::kRandomArticulation: return "random_articulation";
  }
  return "standing";
}

inline PoseFamily pose_family_from_string(const std::string& s) {
  if (s == "standing") return PoseFamily::kStanding;
  if (s == "walking") return PoseFamily::kWalking;
  if (s == "cycling") return PoseFamily::kCycling;
  if (s == "random_articulation") return PoseFamily::kRandomArticulation;
  throw ConfigError("unknown pose family: " + s);
}

/// Axis-aligned box in the LiDAR frame.
struct Box3 {
  Point3 min;
  Point3 max;

  bool contains(const Point3& p) const {
    return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y && p.z >= min.z &&
           p.z <= max.z;
  }
};

/// True if the open segment from `origin` toward `target` hits the box before
/// reaching `target` (slab test on the parametric range (0, 1)).
inline bool segment_hits_box(const Point3& origin, const Point3& target, const Box3& box) {
  const Point3 d = target - origin;
  double t0 = 0.0;
  double t1 = 1.0;
  const double o[3] = {origin.x, origin.y, origin.z};
  const double dir[3] = {d.x, d.y, d.z};
  const double lo[3] = {box.min.x, box.min.y, box.min.z};
  const double hi[3] = {box.max.x, box.max.y, box.max.z};
  for (int a = 0; a < 3; ++a) {
    if (std::abs(dir[a]) < 1e-15) {
      if (o[a] < lo[a] || o[a] > hi[a]) return false;
      continue;
    }
    double ta = (lo[a] - o[a]) / dir[a];
    double tb = (hi[a] - o[a]) / dir[a];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 > t1) return false;
  }
  return t0 < 1.0;  // entry strictly before the target
}

/// Default synthetic rig: LiDAR/world frame with +z up, camera at world
/// (0, 0, 1) looking along +y, 256x256 image.
inline CameraModel default_synth_camera() {
  CameraModel cam;
  cam.fx = 800.0;
  cam.fy = 800.0;
  cam.cx = 127.5;
  cam.cy = 127.5;
  cam.width = 256;
  cam.height = 256;
  cam.rotation = {1, 0, 0, 0, 0, -1, 0, 1, 0};
  cam.translation = {0, 1, 0};
  return cam;
}

struct SynthConfig {
  std::uint64_t rng_seed = 0;
  int n_surface_points = 2048;       // pre-culling surface samples
  double limb_radius = 0.07;         // meters
  double noise_sigma = 0.005;        // meters, isotropic jitter
  double angular_resolution = 0.0038; // radians, LiDAR ray spacing; yields
                                      // 200-600 survivors at 10 m range
  std::optional<Box3> occluder;
  double distance = 10.0;            // meters from camera along +y
  double lateral_jitter = 0.4;       // meters, random x offset range
  CameraModel camera = default_synth_camera();

  void validate() const {
    if (n_surface_points < 1) throw ConfigError("SynthConfig: n_surface_points must be >= 1");
    if (!(limb_radius > 0.0) || limb_radius > 0.3)
      throw ConfigError("SynthConfig: limb_radius must be in (0, 0.3]");
    if (!(angular_resolution > 0.0)) throw ConfigError("SynthConfig: angular_resolution must be > 0");
    if (noise_sigma < 0.0) throw ConfigError("SynthConfig: noise_sigma must be >= 0");
    camera.validate();
  }
};

namespace detail {

struct LimbDirections {
  // Sagittal-plane pitch angles, radians; 0 points straight down.
  double l_thigh = 0, r_thigh = 0, l_shin = 0, r_shin = 0;
  double l_upper_arm = 0, r_upper_arm = 0, l_forearm = 0, r_forearm = 0;
  double torso_pitch = 0;  // forward lean
};

inline LimbDirections pose_angles(PoseFamily family, Rng& rng) {
  LimbDirections a;
  switch (family) {
    case PoseFamily::kStanding: {
      a.l_thigh = rng.uniform(-0.10, 0.10);
      a.r_thigh = rng.uniform(-0.10, 0.10);
      a.l_shin = a.l_thigh + rng.uniform(-0.05, 0.05);
      a.r_shin = a.r_thigh + rng.uniform(-0.05, 0.05);
      a.l_upper_arm = rng.uniform(-0.15, 0.15);
      a.r_upper_arm = rng.uniform(-0.15, 0.15);
      a.l_forearm = a.l_upper_arm + rng.uniform(0.0, 0.25);
      a.r_forearm = a.r_upper_arm + rng.uniform(0.0, 0.25);
      a.torso_pitch = rng.uniform(-0.05, 0.05);
      break;
    }
    case PoseFamily::kWalking: {
      const double phase = rng.uniform(-0.5, 0.5);
      a.l_thigh = phase;
      a.r_thigh = -phase;
      a.l_shin = a.l_thigh - (phase > 0 ? 0.0 : rng.uniform(0.3, 0.7));
      a.r_shin = a.r_thigh - (phase > 0 ? rng.uniform(0.3, 0.7) : 0.0);
      a.l_upper_arm = -phase * 0.8;
      a.r_upper_arm = phase * 0.8;
      a.l_forearm = a.l_upper_arm + 0.4;
      a.r_forearm = a.r_upper_arm + 0.4;
      a.torso_pitch = rng.uniform(0.0, 0.1);
      break;
    }
    case PoseFamily::kCycling: {
      a.l_thigh = rng.uniform(1.0, 1.5);
      a.r_thigh = rng.uniform(0.4, 0.9);
      a.l_shin = a.l_thigh - rng.uniform(1.2, 1.6);
      a.r_shin = a.r_thigh - rng.uniform(1.2, 1.6);
      a.l_upper_arm = rng.uniform(0.7, 1.0);
      a.r_upper_arm = rng.uniform(0.7, 1.0);
      a.l_forearm = a.l_upper_arm + rng.uniform(0.2, 0.4);
      a.r_forearm = a.r_upper_arm + rng.uniform(0.2, 0.4);
      a.torso_pitch = rng.uniform(0.4, 0.7);
      break;
    }
    case PoseFamily::kRandomArticulation: {
      a.l_thigh = rng.uniform(-0.8, 1.2);
      a.r_thigh = rng.uniform(-0.8, 1.2);
      a.l_shin = a.l_thigh - rng.uniform(0.0, 1.2);
      a.r_shin = a.r_thigh - rng.uniform(0.0, 1.2);
      a.l_upper_arm = rng.uniform(-1.2, 1.2);
      a.r_upper_arm = rng.uniform(-1.2, 1.2);
      a.l_forearm = a.l_upper_arm + rng.uniform(-0.8, 0.8);
      a.r_forearm = a.r_upper_arm + rng.uniform(-0.8, 0.8);
      a.torso_pitch = rng.uniform(-0.2, 0.5);
      break;
    }
  }
  return a;
}

// Unit direction for a limb segment: pitch rotates from straight-down toward
// `forward` in the sagittal plane.
inline Point3 limb_dir(double pitch, const Point3& forward, const Point3& up) {
  return std::cos(pitch) * (-1.0 * up) + std::sin(pitch) * forward;
}

}  // namespace detail

/// Articulated skeleton from forward kinematics over a fixed topology.
/// Deterministic per (seed, family); all bone-length invariants hold by
/// construction.
inline SkeletonPose generate_skeleton(const SynthConfig& config, PoseFamily family) {
  config.validate();
  Rng rng = Rng::stream(config.rng_seed, 0x536b656cULL);

  const double shoulder_width = rng.uniform(0.32, 0.44);
  const double hip_width = rng.uniform(0.26, 0.34);
  const double upper_arm = rng.uniform(0.26, 0.34);
  const double forearm = rng.uniform(0.24, 0.30);
  const double thigh = rng.uniform(0.38, 0.48);
  const double shin = rng.uniform(0.36, 0.45);
  const double torso_len = rng.uniform(0.45, 0.55);
  const double neck_len = rng.uniform(0.22, 0.28);

  const double yaw = rng.uniform(0.0, 2.0 * M_PI);
  const double px = rng.uniform(-config.lateral_jitter, config.lateral_jitter);
  const double py = config.distance + rng.uniform(-0.5, 0.5);

  const Point3 up{0, 0, 1};
  const Point3 forward{std::sin(yaw), std::cos(yaw), 0};   // facing direction
  const Point3 lateral{std::cos(yaw), -std::sin(yaw), 0};  // person's left

  const auto a = detail::pose_angles(family, rng);

  const double hip_height =
      (family == PoseFamily::kCycling) ? rng.uniform(0.75, 0.95) : thigh + shin - 0.02;
  const Point3 hip_center{px, py, hip_height};
  const Point3 torso_dir = std::cos(a.torso_pitch) * up + std::sin(a.torso_pitch) * forward;
  const Point3 shoulder_center = hip_center + torso_len * torso_dir;

  SkeletonPose s;
  auto set = [&s](KeypointType t, const Point3& p) { s.joint(t) = p; };

  set(KeypointType::kLeftHip, hip_center + (hip_width / 2) * lateral);
  set(KeypointType::kRightHip, hip_center - (hip_width / 2) * lateral);
  set(KeypointType::kLeftShoulder, shoulder_center + (shoulder_width / 2) * lateral);
  set(KeypointType::kRightShoulder, shoulder_center - (shoulder_width / 2) * lateral);
  set(KeypointType::kNose, shoulder_center + neck_len * torso_dir + 0.06 * forward);

  set(KeypointType::kLeftKnee,
      s.joint(KeypointType::kLeftHip) + thigh * detail::limb_dir(a.l_thigh, forward, up));
  set(KeypointType::kRightKnee,
      s.joint(KeypointType::kRightHip) + thigh * detail::limb_dir(a.r_thigh, forward, up));
  set(KeypointType::kLeftAnkle,
      s.joint(KeypointType::kLeftKnee) + shin * detail::limb_dir(a.l_shin, forward, up));
  set(KeypointType::kRightAnkle,
      s.joint(KeypointType::kRightKnee) + shin * detail::limb_dir(a.r_shin, forward, up));

  set(KeypointType::kLeftElbow, s.joint(KeypointType::kLeftShoulder) +
                                    upper_arm * detail::limb_dir(a.l_upper_arm, forward, up));
  set(KeypointType::kRightElbow, s.joint(KeypointType::kRightShoulder) +
                                     upper_arm * detail::limb_dir(a.r_upper_arm, forward, up));
  set(KeypointType::kLeftWrist, s.joint(KeypointType::kLeftElbow) +
                                    forearm * detail::limb_dir(a.l_forearm, forward, up));
  set(KeypointType::kRightWrist, s.joint(KeypointType::kRightElbow) +
                                     forearm * detail::limb_dir(a.r_forearm, forward, up));

  s.visibility.fill(1);
  return s;
}

struct Segment3 {
  Point3 a;
  Point3 b;
};

inline double point_segment_distance(const Point3& p, const Segment3& seg) {
  const Point3 d = seg.b - seg.a;
  const double len2 = dot(d, d);
  double t = len2 > 0.0 ? dot(p - seg.a, d) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return distance(p, seg.a + t * d);
}

/// Bone segments that carry the sampled surface; exposed so tests can verify
/// point-to-surface distances by brute force.
inline std::vector<Segment3> surface_segments(const SkeletonPose& s) {
  using K = KeypointType;
  auto j = [&s](K t) { return s.joint(t); };
  const Point3 shoulder_center = 0.5 * (j(K::kLeftShoulder) + j(K::kRightShoulder));
  const Point3 hip_center = 0.5 * (j(K::kLeftHip) + j(K::kRightHip));
  return {
      {j(K::kLeftShoulder), j(K::kLeftElbow)},   {j(K::kLeftElbow), j(K::kLeftWrist)},
      {j(K::kRightShoulder), j(K::kRightElbow)}, {j(K::kRightElbow), j(K::kRightWrist)},
      {j(K::kLeftHip), j(K::kLeftKnee)},         {j(K::kLeftKnee), j(K::kLeftAnkle)},
      {j(K::kRightHip), j(K::kRightKnee)},       {j(K::kRightKnee), j(K::kRightAnkle)},
      {j(K::kLeftShoulder), j(K::kRightShoulder)},
      {j(K::kLeftHip), j(K::kRightHip)},
      {j(K::kLeftShoulder), j(K::kLeftHip)},
      {j(K::kRightShoulder), j(K::kRightHip)},
      {shoulder_center, hip_center},
      {shoulder_center, j(K::kNose)},
  };
}

/// Uniform sampling on cylinder walls of radius limb_radius around each bone
/// segment (sphere of the same radius at the nose), with Gaussian jitter.
inline std::vector<Point3> sample_surface(const SkeletonPose& skeleton, const SynthConfig& config) {
  config.validate();
  Rng rng = Rng::stream(config.rng_seed, 0x53757266ULL);
  const auto segments = surface_segments(skeleton);
  const double r = config.limb_radius;

  std::vector<double> cumulative;
  double total = 0.0;
  for (const auto& seg : segments) {
    total += std::max(distance(seg.a, seg.b), 1e-6);
    cumulative.push_back(total);
  }
  const double sphere_weight = 0.25 * total > 0.08 ? 0.08 : 0.25 * total;
  total += sphere_weight;
  cumulative.push_back(total);

  std::vector<Point3> out;
  out.reserve(config.n_surface_points);
  for (int n = 0; n < config.n_surface_points; ++n) {
    const double pick = rng.uniform(0.0, total);
    const std::size_t idx =
        std::lower_bound(cumulative.begin(), cumulative.end(), pick) - cumulative.begin();
    Point3 p;
    if (idx >= segments.size()) {
      // head sphere around the nose
      const double z = rng.uniform(-1.0, 1.0);
      const double phi = rng.uniform(0.0, 2.0 * M_PI);
      const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
      p = skeleton.joint(KeypointType::kNose) +
          r * Point3{rho * std::cos(phi), rho * std::sin(phi), z};
    } else {
      const auto& seg = segments[idx];
      const Point3 axis = seg.b - seg.a;
      const double len = norm(axis);
      const Point3 u = len > 0 ? (1.0 / len) * axis : Point3{0, 0, 1};
      // orthonormal frame around the axis
      const Point3 ref = std::abs(u.z) < 0.9 ? Point3{0, 0, 1} : Point3{1, 0, 0};
      Point3 n1{u.y * ref.z - u.z * ref.y, u.z * ref.x - u.x * ref.z, u.x * ref.y - u.y * ref.x};
      n1 = (1.0 / norm(n1)) * n1;
      const Point3 n2{u.y * n1.z - u.z * n1.y, u.z * n1.x - u.x * n1.z, u.x * n1.y - u.y * n1.x};
      const double t = rng.uniform();
      const double theta = rng.uniform(0.0, 2.0 * M_PI);
      p = seg.a + t * axis + r * (std::cos(theta) * n1) + r * (std::sin(theta) * n2);
    }
    if (config.noise_sigma > 0.0) {
      p = p + Point3{rng.normal(0.0, config.noise_sigma), rng.normal(0.0, config.noise_sigma),
                     rng.normal(0.0, config.noise_sigma)};
    }
    out.push_back(p);
  }
  return out;
}

namespace detail {

struct RayAngles {
  double az = 0.0;
  double el = 0.0;
};

inline RayAngles ray_angles(const CameraModel& cam, const Point3& p) {
  const Point3 c = cam.to_camera_frame(p);
  if (c.z <= kMinProjectionDepth) throw NonPositiveDepth("ray_angles: non-positive depth");
  return {std::atan2(c.x, c.z), std::atan2(c.y, c.z)};
}

}  // namespace detail

/// LiDAR sensor model: angular-bucket z-buffer occlusion plus occluder shadow
/// culling. Output is a subsequence of the input.
inline std::vector<Point3> apply_lidar_model(const std::vector<Point3>& points,
                                             const CameraModel& camera, const SynthConfig& config) {
  config.validate();
  const double res = config.angular_resolution;

  // z-buffer: nearest depth per angular bucket
  std::map<std::pair<long, long>, std::size_t> winner;
  std::vector<double> depths(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto ang = detail::ray_angles(camera, points[i]);
    depths[i] = camera.to_camera_frame(points[i]).z;
    const std::pair<long, long> key{static_cast<long>(std::floor(ang.az / res)),
                                    static_cast<long>(std::floor(ang.el / res))};
    auto it = winner.find(key);
    if (it == winner.end() || depths[i] < depths[it->second]) winner[key] = i;
  }
  std::vector<bool> keep(points.size(), false);
  for (const auto& [key, idx] : winner) keep[idx] = true;

  const Point3 origin = camera.center_in_lidar_frame();
  std::vector<Point3> out;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!keep[i]) continue;
    if (config.occluder && segment_hits_box(origin, points[i], *config.occluder)) continue;
    out.push_back(points[i]);
  }
  return out;
}

/// Full scene composition: skeleton -> surface cloud -> LiDAR culling ->
/// cached projections, with 2D labels projected from ground truth and
/// visibility derived from the surviving cloud.
inline Scene make_scene(const SynthConfig& config, PoseFamily family) {
  config.validate();
  SkeletonPose skeleton = generate_skeleton(config, family);
  const auto surface = sample_surface(skeleton, config);
  const auto culled = apply_lidar_model(surface, config.camera, config);
  if (culled.size() < 8) {
    throw DegenerateScene("make_scene: only " + std::to_string(culled.size()) +
                          " points survive occlusion");
  }

  Scene scene;
  scene.camera = config.camera;
  scene.scene_id = "synth_" + std::to_string(config.rng_seed) + "_" + to_string(family);
  const auto projections = project_cloud(config.camera, culled);
  scene.points.resize(culled.size());
  for (std::size_t i = 0; i < culled.size(); ++i) {
    scene.points[i] = {culled[i], projections[i].pixel, projections[i].depth};
  }

  std::vector<detail::RayAngles> point_angles;
  point_angles.reserve(culled.size());
  for (const auto& p : culled) point_angles.push_back(detail::ray_angles(config.camera, p));

  // Annotator model: a keypoint is visible when (a) it projects onto the
  // image, (b) its own surface survived culling (a point near the joint's
  // ray at a compatible range), and (c) its pixel neighborhood is
  // depth-coherent -- if another body part crowds the same image region at a
  // clearly different range, the annotation is ambiguous and skipped.
  const double vis_radius = 2.0 * config.angular_resolution;
  const Point3 origin = config.camera.center_in_lidar_frame();
  const double range_tol = 2.0 * config.limb_radius + 3.0 * config.noise_sigma + 0.01;
  const double coherence_px = 10.0;
  for (int k = 0; k < kNumKeypoints; ++k) {
    const Point3& joint = skeleton.joints[k];
    const auto proj = project(config.camera, joint);
    const auto jang = detail::ray_angles(config.camera, joint);
    const double joint_range = distance(joint, origin);
    bool visible = on_image(config.camera, proj.pixel);
    if (visible) {
      bool supported = false;
      bool coherent = true;
      for (std::size_t i = 0; i < culled.size(); ++i) {
        const double gap = std::abs(distance(culled[i], origin) - joint_range);
        const auto& pa = point_angles[i];
        if (std::abs(pa.az - jang.az) <= vis_radius && std::abs(pa.el - jang.el) <= vis_radius &&
            gap <= range_tol) {
          supported = true;
        }
        if (distance(projections[i].pixel, proj.pixel) <= coherence_px && gap > range_tol) {
          coherent = false;
          break;
        }
      }
      visible = supported && coherent;
    }
    skeleton.visibility[k] = visible ? 1 : 0;
    scene.keypoints_2d[k] = {proj.pixel, skeleton.visibility[k]};
  }
  if (std::none_of(skeleton.visibility.begin(), skeleton.visibility.end(),
                   [](int v) { return v != 0; })) {
    throw DegenerateScene("make_scene: annotator found no visible keypoints");
  }
  scene.keypoints_3d_gt = skeleton;
  return scene;
}

/// Random occluder box between the camera and part of the body, for synthetic
/// occlusion studies. Covers either the legs or one side of the upper body.
inline Box3 random_occluder(const SkeletonPose& skeleton, const CameraModel& camera, Rng& rng) {
  const Point3 origin = camera.center_in_lidar_frame();
  Point3 lo{1e30, 1e30, 1e30}, hi{-1e30, -1e30, -1e30};
  for (const auto& j : skeleton.joints) {
    lo.x = std::min(lo.x, j.x); lo.y = std::min(lo.y, j.y); lo.z = std::min(lo.z, j.z);
    hi.x = std::max(hi.x, j.x); hi.y = std::max(hi.y, j.y); hi.z = std::max(hi.z, j.z);
  }
  const Point3 body_center = 0.5 * (lo + hi);
  // place the box 60-80% of the way from camera to body
  const double f = rng.uniform(0.6, 0.8);
  const Point3 c = origin + f * (body_center - origin);
  Box3 box;
  const bool legs = rng.uniform() < 0.6;
  const double half_w = 0.5 * f * (hi.x - lo.x + 0.4);
  const double depth_half = 0.15;
  box.min.x = c.x - half_w;
  box.max.x = c.x + half_w;
  box.min.y = c.y - depth_half;
  box.max.y = c.y + depth_half;
  if (legs) {
    box.min.z = -0.5;
    box.max.z = f * (lo.z + rng.uniform(0.45, 0.75) * (hi.z - lo.z)) + (1 - f) * origin.z;
  } else {
    box.min.z = f * (lo.z + rng.uniform(0.4, 0.6) * (hi.z - lo.z)) + (1 - f) * origin.z;
    box.max.z = hi.z + 0.5;
  }
  return box;
}

}  // namespace wsp

#endif  // WSP_SYNTH_HPP_
