#include "ghosttrack/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ghosttrack {

bool BBox::valid() const {
  return std::isfinite(cx) && std::isfinite(cy) && std::isfinite(aspect) && std::isfinite(height) &&
         aspect > 0.0 && height > 0.0;
}

BBox BBox::from_tlwh(double left, double top, double width, double height) {
  return BBox{left + 0.5 * width, top + 0.5 * height, height != 0.0 ? width / height : 0.0, height};
}

std::array<double, 4> BBox::tlwh() const { return {left(), top(), width(), height}; }

CameraModel CameraModel::for_image(int width, int height, double focal) {
  return CameraModel{focal > 0.0 ? focal : static_cast<double>(width), 0.5 * width, 0.5 * height};
}

double iou(const BBox& a, const BBox& b) {
  const double ix = std::min(a.right(), b.right()) - std::max(a.left(), b.left());
  const double iy = std::min(a.bottom(), b.bottom()) - std::max(a.top(), b.top());
  if (ix <= 0.0 || iy <= 0.0) return 0.0;
  const double inter = ix * iy;
  const double uni = a.width() * a.height + b.width() * b.height - inter;
  if (uni <= 0.0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

BBox project(const Cylinder3D& c, const CameraModel& cam) {
  if (!(c.z > 0.0)) throw std::invalid_argument("project: depth must be positive");
  const double s = cam.focal / c.z;
  return BBox{s * c.x + cam.px, s * c.y + cam.py, c.aspect, s * c.height};
}

Cylinder3D backproject(const BBox& b, double inv_depth, const CameraModel& cam) {
  if (!(inv_depth > 0.0)) throw std::invalid_argument("backproject: inverse depth must be positive");
  const double z = 1.0 / inv_depth;
  const double s = z / cam.focal;
  return Cylinder3D{(b.cx - cam.px) * s, (b.cy - cam.py) * s, z, b.height * s, b.aspect};
}

}  // namespace ghosttrack
