#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "ghosttrack/association.hpp"
#include "ghosttrack/config.hpp"
#include "ghosttrack/depth_field.hpp"
#include "ghosttrack/hypotheses.hpp"
#include "ghosttrack/track.hpp"

namespace ghosttrack {

/// One person reported in a frame. Suppressed and deleted tracks never appear.
struct ReportedPerson {
  int id = 0;
  BBox box;
  double gamma = 0.0;
  bool occluded = false;
  HypothesisSet hypotheses;
  Eigen::Matrix2d xg_cov = Eigen::Matrix2d::Zero();
};

struct FrameOutput {
  int frame = 0;
  std::vector<ReportedPerson> people;
};

/// With freespace reasoning active, an unmatched track whose forecast box has less than this
/// fraction of its width inside the image is deleted as having left the field of view.
inline constexpr double kMinInViewFraction = 0.75;

/// Determinant magnitude below which a warp is treated as singular.
inline constexpr double kMinWarpDeterminant = 1e-12;

/// Maps (x, y) of the mean through the homography and transforms the image velocities by
/// its Jacobian at that point. Covariance is left unchanged. Near-singular warps fall back
/// to identity with a logged warning.
TrackState apply_warp(const TrackState& s, const Warp& w);
Track apply_warp(const Track& t, const Warp& w);

/// Online occlusion-aware tracker for one sequence.
class Tracker {
 public:
  Tracker(Config cfg, CameraModel camera);

  /// Process one frame. Frames must arrive in strictly increasing order (throws
  /// std::invalid_argument otherwise). depth may be null only when cfg.depth_disabled.
  FrameOutput step(int frame_id, std::span<const Detection> detections, const DepthField* depth,
                   const Warp& warp = Warp::Identity(), const BinaryMask* mask = nullptr);

  std::span<const Track> tracks() const { return tracks_; }
  const Config& config() const { return cfg_; }
  const CameraModel& camera() const { return camera_; }

 private:
  bool freespace_active(const DepthField* depth) const;
  HypothesisSet hypotheses_for(const Track& t, const DepthField* depth, int frame_id) const;
  void spawn(const Detection& det, double fallback_gamma);

  Config cfg_;
  CameraModel camera_;
  KalmanParams kalman_;
  AssociationParams assoc_;
  std::vector<Track> tracks_;
  int next_id_ = 1;
  int last_frame_ = 0;
  bool started_ = false;
};

}  // namespace ghosttrack
