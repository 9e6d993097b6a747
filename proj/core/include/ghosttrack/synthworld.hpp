#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "ghosttrack/config.hpp"
#include "ghosttrack/depth_field.hpp"
#include "ghosttrack/io.hpp"
#include "ghosttrack/records.hpp"
#include "ghosttrack/sequence.hpp"

namespace ghosttrack {

/// A person moving with constant 3D velocity (world units per frame) from `start` at frame 1.
struct WalkerSpec {
  Cylinder3D start;
  Eigen::Vector3d velocity = Eigen::Vector3d::Zero();
};

/// Static axis-aligned 3D box in camera coordinates.
struct Occluder {
  Eigen::Vector3d min = Eigen::Vector3d::Zero();
  Eigen::Vector3d max = Eigen::Vector3d::Ones();
};

struct DetectorModel {
  /// Detections are produced only for visibility >= min_visibility.
  double min_visibility = 0.5;
  double miss_rate = 0.0;
  /// Gaussian noise on center and size, pixels.
  double noise_px = 0.0;
  bool features = true;
  int feature_dim = 16;
  double feature_noise = 0.05;
};

struct Scenario {
  std::string name = "synthetic";
  int width = 640;
  int height = 360;
  int frames = 100;
  double fps = 30.0;
  CameraModel camera{500.0, 320.0, 180.0};
  /// Ground plane lies at Y = camera_height (Y points down).
  double camera_height = 1.5;
  /// Depth of the far wall; the ground plane is capped at this value.
  double background_depth = 40.0;
  std::vector<WalkerSpec> walkers;
  std::vector<Occluder> occluders;
  DetectorModel detector;
  /// Cumulative horizontal image shift per frame (index 0 is frame 1). Empty = static camera.
  std::vector<double> pan;
  std::uint64_t seed = 1;
  /// Tracker settings suited to this world's units, applied by scenario_config.
  std::vector<std::pair<std::string, std::string>> tracker_overrides;

  /// Throws std::invalid_argument on a walker with nonpositive depth at frame 1,
  /// degenerate occluders or bad image/camera settings.
  void validate() const;
  double pan_offset(int frame) const;
  Cylinder3D walker_at(std::size_t walker, int frame) const;
};

/// Everything the generator emits for one frame.
struct SynthFrame {
  int frame = 0;
  std::vector<GtBox> gt;
  std::vector<DetRecord> detections;
  std::vector<int> detection_walker;  // walker index of each detection
  DepthField depth;
  Warp warp = Warp::Identity();
};

/// Renders one frame (pure function of the scenario and the frame index). Walkers are
/// z-buffered as their bounding rectangles, occluders as the rectangle spanned by their
/// projected corners at their nearest depth. Throws std::invalid_argument when a walker
/// reaches Z <= 0.
SynthFrame render_frame(const Scenario& sc, int frame);

/// GT for all frames (the depth rasters are rendered and discarded).
GtRecord render_ground_truth(const Scenario& sc);

/// GT, detections and warps for all frames.
struct RenderedSequence {
  GtRecord gt;
  DetectionRecord detections;
  WarpRecord warps;
};
RenderedSequence render_records(const Scenario& sc);

/// Frames rendered lazily in order; detections optionally replaced by visible GT boxes.
class SynthFrameSource final : public FrameSource {
 public:
  enum class Detections { Detector, VisibleGroundTruth };

  explicit SynthFrameSource(Scenario sc, Detections mode = Detections::Detector,
                            double gt_v_thresh = 0.10, bool supply_warps = true);

  const SequenceInfo& info() const override { return info_; }
  std::optional<CameraModel> camera() const override { return scenario_.camera; }
  std::optional<FrameData> next() override;

  /// GT of the frames produced so far.
  const GtRecord& ground_truth() const { return gt_; }

 private:
  Scenario scenario_;
  SequenceInfo info_;
  Detections mode_;
  double gt_v_thresh_;
  bool supply_warps_;
  int next_frame_ = 1;
  GtRecord gt_;
};

/// Writes a complete sequence directory: seqinfo.ini, gt/gt.txt, det/det.txt,
/// det/features.txt, depth/frame_%06d.pfm, warps.txt and tracker.cfg.
void write_sequence(const Scenario& sc, const fs::path& dir);

Scenario load_scenario(const fs::path& path);
void save_scenario(const Scenario& sc, const fs::path& path);
Scenario scenario_from_json_text(const std::string& text);
std::string scenario_to_json_text(const Scenario& sc);

/// Base config with the scenario's focal length and tracker overrides applied.
Config scenario_config(const Scenario& sc, Config base = {});

}  // namespace ghosttrack
