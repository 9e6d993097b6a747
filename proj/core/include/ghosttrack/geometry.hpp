#pragma once

#include <array>

#include <Eigen/Core>

namespace ghosttrack {

/// Image-space box in center/aspect/height form. Aspect is width / height.
/// Corner (tlwh) form only appears at file boundaries.
struct BBox {
  double cx = 0.0;
  double cy = 0.0;
  double aspect = 1.0;
  double height = 1.0;

  double width() const { return aspect * height; }
  double left() const { return cx - 0.5 * width(); }
  double top() const { return cy - 0.5 * height; }
  double right() const { return cx + 0.5 * width(); }
  double bottom() const { return cy + 0.5 * height; }

  /// height > 0, aspect > 0 and all fields finite.
  bool valid() const;

  static BBox from_tlwh(double left, double top, double width, double height);
  std::array<double, 4> tlwh() const;

  friend bool operator==(const BBox&, const BBox&) = default;
};

/// Upright cylinder in camera coordinates (Z forward, Y down).
/// (x, y, z) is the centroid; height is constant, aspect may vary.
struct Cylinder3D {
  double x = 0.0;
  double y = 0.0;
  double z = 1.0;
  double height = 1.0;
  double aspect = 1.0;
};

/// Pinhole camera with a single focal length in pixels.
struct CameraModel {
  double focal = 1.0;
  double px = 0.0;
  double py = 0.0;

  /// Principal point at the image center; focal defaults to the image width when <= 0.
  static CameraModel for_image(int width, int height, double focal = 0.0);
};

/// 3x3 homography taking frame t-1 pixel coordinates into frame t.
using Warp = Eigen::Matrix3d;

double iou(const BBox& a, const BBox& b);

/// Throws std::invalid_argument when c.z <= 0.
BBox project(const Cylinder3D& c, const CameraModel& cam);

/// Inverse of project for a known inverse depth. Throws when inv_depth <= 0.
Cylinder3D backproject(const BBox& b, double inv_depth, const CameraModel& cam);

}  // namespace ghosttrack
