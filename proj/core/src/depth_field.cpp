#include "ghosttrack/depth_field.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ghosttrack {

PixelRect pixel_span(const BBox& box, int width, int height) {
  auto clamp_to = [](double v, int hi) {
    if (!(v > 0.0)) return 0;
    if (v >= hi) return hi;
    return static_cast<int>(v);
  };
  PixelRect r;
  r.col0 = clamp_to(std::floor(box.left()), width);
  r.row0 = clamp_to(std::floor(box.top()), height);
  r.col1 = clamp_to(std::ceil(box.right()), width);
  r.row1 = clamp_to(std::ceil(box.bottom()), height);
  return r;
}

DepthField::DepthField(int width, int height, std::vector<float> values, int frame_id)
    : width_(width), height_(height), frame_id_(frame_id), values_(std::move(values)) {
  if (width <= 0 || height <= 0) throw std::invalid_argument("DepthField: empty raster");
  if (values_.size() != static_cast<size_t>(width) * height)
    throw std::invalid_argument("DepthField: size does not match dimensions");
  for (size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i]) || values_[i] <= 0.0f)
      throw std::invalid_argument("DepthField: depth at pixel " + std::to_string(i) +
                                  " is not finite and positive");
  }
}

DepthField DepthField::constant(int width, int height, float depth, int frame_id) {
  return DepthField(width, height,
                    std::vector<float>(static_cast<size_t>(std::max(width, 0)) * std::max(height, 0), depth),
                    frame_id);
}

BinaryMask::BinaryMask(int width, int height, std::vector<std::uint8_t> values)
    : width_(width), height_(height), values_(std::move(values)) {
  if (width <= 0 || height <= 0) throw std::invalid_argument("BinaryMask: empty raster");
  if (values_.size() != static_cast<size_t>(width) * height)
    throw std::invalid_argument("BinaryMask: size does not match dimensions");
}

const char* to_string(FreespaceVerdict v) {
  switch (v) {
    case FreespaceVerdict::ReportOccluded: return "report_occluded";
    case FreespaceVerdict::Suppress: return "suppress";
    case FreespaceVerdict::Delete: return "delete";
  }
  return "?";
}

std::optional<double> region_inverse_depth(const DepthField& depth, const BBox& box,
                                           const BinaryMask* mask) {
  const PixelRect r = pixel_span(box, depth.width(), depth.height());
  if (r.empty()) return std::nullopt;

  double box_sum = 0.0;
  double mask_sum = 0.0;
  long mask_count = 0;
  const bool use_mask = mask != nullptr && mask->width() == depth.width() && mask->height() == depth.height();
  for (int row = r.row0; row < r.row1; ++row) {
    for (int col = r.col0; col < r.col1; ++col) {
      const double inv = 1.0 / depth.at(row, col);
      box_sum += inv;
      if (use_mask && mask->at(row, col)) {
        mask_sum += inv;
        ++mask_count;
      }
    }
  }
  const long n = r.area();
  if (use_mask && mask_count > 0 && static_cast<double>(mask_count) >= kMinMaskCoverage * n)
    return mask_sum / static_cast<double>(mask_count);
  return box_sum / static_cast<double>(n);
}

double horizon_depth(const DepthField& depth, const BBox& box) {
  const double cx = std::clamp(box.cx, 0.0, std::nextafter(static_cast<double>(depth.width()), 0.0));
  const double cy = std::clamp(box.cy, 0.0, std::nextafter(static_cast<double>(depth.height()), 0.0));
  const double half_w = 0.25 * std::max(box.width(), 0.0);
  const double half_h = 0.25 * std::max(box.height, 0.0);
  BBox sub{cx, cy, half_h > 0.0 ? half_w / half_h : 1.0, 2.0 * half_h};
  PixelRect r = pixel_span(sub, depth.width(), depth.height());
  if (r.empty()) {
    // Degenerate box: fall back to the pixel under the clamped center.
    const int col = static_cast<int>(cx);
    const int row = static_cast<int>(cy);
    r = PixelRect{col, row, col + 1, row + 1};
  }
  std::vector<float> vals;
  vals.reserve(static_cast<size_t>(r.area()));
  for (int row = r.row0; row < r.row1; ++row)
    for (int col = r.col0; col < r.col1; ++col) vals.push_back(depth.at(row, col));
  const auto mid = vals.begin() + static_cast<long>((vals.size() - 1) / 2);
  std::nth_element(vals.begin(), mid, vals.end());
  return *mid;
}

FreespaceVerdict freespace_verdict(double z_f, double z_o, double alpha_supp, double alpha_delete) {
  if (!(z_f > 0.0) || !(z_o > 0.0)) throw std::invalid_argument("freespace_verdict: depths must be positive");
  if (!(alpha_delete < alpha_supp)) throw std::invalid_argument("freespace_verdict: need alpha_delete < alpha_supp");
  if (z_f < alpha_delete * z_o) return FreespaceVerdict::Delete;
  if (z_f < alpha_supp * z_o) return FreespaceVerdict::Suppress;
  return FreespaceVerdict::ReportOccluded;
}

}  // namespace ghosttrack
