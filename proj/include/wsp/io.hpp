#ifndef WSP_IO_HPP_
#define WSP_IO_HPP_

#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "wsp/errors.hpp"
#include "wsp/fusion.hpp"
#include "wsp/labelgen.hpp"
#include "wsp/metrics.hpp"
#include "wsp/pointnet.hpp"
#include "wsp/scene.hpp"

namespace wsp {

using json = nlohmann::json;

struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// ---------------------------------------------------------------- camera/scene

inline json camera_to_json(const CameraModel& cam) {
  return json{{"fx", cam.fx},
              {"fy", cam.fy},
              {"cx", cam.cx},
              {"cy", cam.cy},
              {"rotation", cam.rotation},
              {"translation", cam.translation},
              {"width", cam.width},
              {"height", cam.height}};
}

inline CameraModel camera_from_json(const json& j) {
  CameraModel cam;
  cam.fx = j.at("fx");
  cam.fy = j.at("fy");
  cam.cx = j.at("cx");
  cam.cy = j.at("cy");
  const auto r = j.at("rotation").get<std::vector<double>>();
  const auto t = j.at("translation").get<std::vector<double>>();
  if (r.size() != 9 || t.size() != 3) throw IoError("camera_from_json: bad rotation/translation");
  std::copy(r.begin(), r.end(), cam.rotation.begin());
  std::copy(t.begin(), t.end(), cam.translation.begin());
  cam.width = j.at("width");
  cam.height = j.at("height");
  cam.validate();
  return cam;
}

inline json scene_to_json(const Scene& scene) {
  json points = json::array();
  for (const auto& p : scene.points) {
    points.push_back({p.position.x, p.position.y, p.position.z, p.projection.u, p.projection.v,
                      p.depth});
  }
  json kp2d = json::array();
  for (const auto& kp : scene.keypoints_2d) kp2d.push_back({kp.pixel.u, kp.pixel.v, kp.visibility});
  json kp3d;
  if (scene.keypoints_3d_gt) {
    kp3d = json::array();
    for (const auto& j : scene.keypoints_3d_gt->joints) kp3d.push_back({j.x, j.y, j.z});
  } else {
    kp3d = nullptr;
  }
  return json{{"scene_id", scene.scene_id},
              {"camera", camera_to_json(scene.camera)},
              {"points", points},
              {"keypoints_2d", kp2d},
              {"keypoints_3d_gt", kp3d}};
}

inline Scene scene_from_json(const json& j) {
  Scene scene;
  scene.scene_id = j.at("scene_id");
  scene.camera = camera_from_json(j.at("camera"));
  for (const auto& row : j.at("points")) {
    if (row.size() != 6) throw IoError("scene_from_json: point rows must have 6 entries");
    scene.points.push_back({{row[0], row[1], row[2]}, {row[3], row[4]}, row[5]});
  }
  const auto& kp2d = j.at("keypoints_2d");
  if (kp2d.size() != kNumKeypoints) throw IoError("scene_from_json: need 13 2D keypoints");
  for (int k = 0; k < kNumKeypoints; ++k) {
    scene.keypoints_2d[k] = {{kp2d[k][0], kp2d[k][1]}, kp2d[k][2]};
  }
  const auto& kp3d = j.at("keypoints_3d_gt");
  if (!kp3d.is_null()) {
    if (kp3d.size() != kNumKeypoints) throw IoError("scene_from_json: need 13 3D keypoints");
    SkeletonPose pose;
    for (int k = 0; k < kNumKeypoints; ++k) {
      pose.joints[k] = {kp3d[k][0], kp3d[k][1], kp3d[k][2]};
      pose.visibility[k] = scene.keypoints_2d[k].visibility;
    }
    scene.keypoints_3d_gt = pose;
  }
  return scene;
}

// ------------------------------------------------------------------------- RLE

/// Run-length encoding of the flattened (point-major) N x 13 bitmap. Runs
/// alternate starting with the count of leading zeros.
inline std::vector<std::int64_t> rle_encode(
    const std::vector<std::array<std::uint8_t, kNumKeypoints>>& bitmap) {
  std::vector<std::int64_t> counts;
  std::uint8_t current = 0;
  std::int64_t run = 0;
  for (const auto& row : bitmap) {
    for (std::uint8_t bit : row) {
      if (bit == current) {
        ++run;
      } else {
        counts.push_back(run);
        current = bit;
        run = 1;
      }
    }
  }
  counts.push_back(run);
  return counts;
}

inline std::vector<std::array<std::uint8_t, kNumKeypoints>> rle_decode(
    const std::vector<std::int64_t>& counts, std::size_t n_points) {
  std::vector<std::array<std::uint8_t, kNumKeypoints>> bitmap(n_points);
  std::size_t flat = 0;
  std::uint8_t current = 0;
  for (std::int64_t run : counts) {
    for (std::int64_t i = 0; i < run; ++i) {
      if (flat >= n_points * kNumKeypoints) throw IoError("rle_decode: counts overflow the bitmap");
      bitmap[flat / kNumKeypoints][flat % kNumKeypoints] = current;
      ++flat;
    }
    current = current ? 0 : 1;
  }
  if (flat != n_points * kNumKeypoints) throw IoError("rle_decode: counts do not fill the bitmap");
  return bitmap;
}

// ---------------------------------------------------------------------- labels

inline json labels_to_json(const PseudoLabels& labels) {
  json y = json::array();
  for (const auto& p : labels.y_tilde) y.push_back({p.x, p.y, p.z});
  return json{{"y_tilde", y},
              {"reliability", labels.reliability},
              {"visibility", labels.visibility},
              {"n_points", labels.pointwise.size()},
              {"pointwise", rle_encode(labels.pointwise)}};
}

inline PseudoLabels labels_from_json(const json& j) {
  PseudoLabels labels;
  const auto& y = j.at("y_tilde");
  if (y.size() != kNumKeypoints) throw IoError("labels_from_json: need 13 pseudo keypoints");
  for (int k = 0; k < kNumKeypoints; ++k) {
    labels.y_tilde[k] = {y[k][0], y[k][1], y[k][2]};
    labels.reliability[k] = j.at("reliability")[k];
    labels.visibility[k] = j.at("visibility")[k];
  }
  labels.pointwise =
      rle_decode(j.at("pointwise").get<std::vector<std::int64_t>>(), j.at("n_points"));
  return labels;
}

// ------------------------------------------------------------------ file utils

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << content;
  if (!out) throw IoError("write failed: " + path);
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_json_file(const std::string& path, const json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

inline json read_json_file(const std::string& path) {
  return json::parse(read_text_file(path));
}

// --------------------------------------------------------------- params binary

inline constexpr char kParamsMagic[8] = {'W', 'S', 'P', 'P', 'N', '0', '0', '1'};

/// Flat binary format: 8-byte magic, shape header (u32 fields), u64 parameter
/// count, then little-endian f64 values in flatten() order.
inline void save_params(const std::string& path, const PointNetParams& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out.write(kParamsMagic, 8);
  auto put_u32 = [&out](std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); };
  put_u32(static_cast<std::uint32_t>(params.shape.input_dim));
  auto put_widths = [&put_u32](const std::vector<int>& w) {
    put_u32(static_cast<std::uint32_t>(w.size()));
    for (int x : w) put_u32(static_cast<std::uint32_t>(x));
  };
  put_widths(params.shape.encoder_widths);
  put_widths(params.shape.regression_hidden);
  put_widths(params.shape.segmentation_hidden);
  const Eigen::VectorXd flat = params.flatten();
  const std::uint64_t n = static_cast<std::uint64_t>(flat.size());
  out.write(reinterpret_cast<const char*>(&n), 8);
  out.write(reinterpret_cast<const char*>(flat.data()), static_cast<std::streamsize>(n * 8));
  if (!out) throw IoError("write failed: " + path);
}

inline PointNetParams load_params(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kParamsMagic, 8) != 0)
    throw IoError("load_params: bad magic in " + path);
  auto get_u32 = [&in]() {
    std::uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), 4);
    return v;
  };
  PointNetShape shape;
  shape.input_dim = static_cast<int>(get_u32());
  auto get_widths = [&get_u32]() {
    std::vector<int> w(get_u32());
    for (auto& x : w) x = static_cast<int>(get_u32());
    return w;
  };
  shape.encoder_widths = get_widths();
  shape.regression_hidden = get_widths();
  shape.segmentation_hidden = get_widths();
  std::uint64_t n = 0;
  in.read(reinterpret_cast<char*>(&n), 8);
  PointNetParams params = PointNetParams::zeros(shape);
  if (n != params.parameter_count()) throw IoError("load_params: parameter count mismatch");
  Eigen::VectorXd flat(static_cast<Eigen::Index>(n));
  in.read(reinterpret_cast<char*>(flat.data()), static_cast<std::streamsize>(n * 8));
  if (!in) throw IoError("load_params: truncated file " + path);
  params.unflatten(flat);
  return params;
}

// ------------------------------------------------------------------ run log CSV

inline std::string runlog_to_csv(const std::vector<RunLogEntry>& log) {
  std::ostringstream ss;
  ss << "step,lr,L_reg,L_seg,L\n";
  ss << std::setprecision(17);
  for (const auto& e : log) {
    ss << e.step << ',' << e.lr << ',' << e.l_reg << ',' << e.l_seg << ',' << e.l << '\n';
  }
  return ss.str();
}

// ------------------------------------------------------------------- PGM / SVG

/// One 16-bit PGM per heatmap channel, values scaled by 65535.
inline std::string heatmap_channel_to_pgm(const Heatmap& h, int k) {
  std::ostringstream ss;
  ss << "P2\n" << h.width << " " << h.height << "\n65535\n";
  for (int n = 0; n < h.height; ++n) {
    for (int m = 0; m < h.width; ++m) {
      const long v = std::lround(std::clamp(h.at(n, m, k), 0.0, 1.0) * 65535.0);
      ss << v << (m + 1 < h.width ? ' ' : '\n');
    }
  }
  return ss.str();
}

/// Minimal SVG bar chart of per-keypoint values in [0, 1].
inline std::string per_keypoint_bar_chart_svg(const std::array<double, kNumKeypoints>& values,
                                              const std::string& title) {
  const int bar_w = 48, gap = 8, chart_h = 240, label_h = 80;
  const int width = kNumKeypoints * (bar_w + gap) + gap;
  std::ostringstream ss;
  ss << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
     << chart_h + label_h + 40 << "\">\n";
  ss << "<text x=\"" << gap << "\" y=\"20\" font-size=\"16\">" << title << "</text>\n";
  for (int k = 0; k < kNumKeypoints; ++k) {
    const double v = std::clamp(values[k], 0.0, 1.0);
    const int h = static_cast<int>(v * chart_h);
    const int x = gap + k * (bar_w + gap);
    const int y = 30 + chart_h - h;
    ss << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << bar_w << "\" height=\"" << h
       << "\" fill=\"#4878b0\"/>\n";
    ss << "<text x=\"" << x + bar_w / 2 << "\" y=\"" << 30 + chart_h + 14
       << "\" font-size=\"10\" text-anchor=\"middle\" transform=\"rotate(45 " << x + bar_w / 2
       << " " << 30 + chart_h + 14 << ")\">" << keypoint_names()[k] << "</text>\n";
  }
  ss << "</svg>\n";
  return ss.str();
}

// --------------------------------------------------------------------- reports

inline json quality_report_to_json(const QualityReport& report) {
  json per = json::array();
  for (int k = 0; k < kNumKeypoints; ++k) {
    const auto& q = report.per_keypoint[k];
    per.push_back({{"keypoint", keypoint_names()[k]},
                   {"error_3d_m", q.error_3d_m},
                   {"min_neighbor_px", q.min_neighbor_px},
                   {"positive_points", q.positive_points},
                   {"reliability", q.reliability},
                   {"visibility", q.visibility},
                   {"low_support", q.low_support}});
  }
  return json{{"per_keypoint", per},
              {"mean_error_m", report.mean_error_m},
              {"max_error_m", report.max_error_m},
              {"visible_count", report.visible_count}};
}

}  // namespace wsp

#endif  // WSP_IO_HPP_
