#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ghosttrack/geometry.hpp"

namespace ghosttrack {

/// Half-open pixel rectangle [col0, col1) x [row0, row1).
struct PixelRect {
  int col0 = 0;
  int row0 = 0;
  int col1 = 0;
  int row1 = 0;

  bool empty() const { return col1 <= col0 || row1 <= row0; }
  long area() const { return empty() ? 0L : static_cast<long>(col1 - col0) * (row1 - row0); }
};

/// Pixels touched by a box (any overlap counts), clipped to a width x height image.
/// Pixel (r, c) covers [c, c+1) x [r, r+1).
PixelRect pixel_span(const BBox& box, int width, int height);

/// Dense per-frame depth raster, row-major, row 0 at the top of the image.
class DepthField {
 public:
  DepthField() = default;
  /// Throws std::invalid_argument on size mismatch or a nonpositive / non-finite depth.
  DepthField(int width, int height, std::vector<float> values, int frame_id = 0);

  static DepthField constant(int width, int height, float depth, int frame_id = 0);

  int width() const { return width_; }
  int height() const { return height_; }
  int frame_id() const { return frame_id_; }
  float at(int row, int col) const { return values_[static_cast<size_t>(row) * width_ + col]; }
  std::span<const float> values() const { return values_; }

 private:
  int width_ = 0;
  int height_ = 0;
  int frame_id_ = 0;
  std::vector<float> values_;
};

/// Binary foreground raster (nonzero = person pixel).
class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(int width, int height, std::vector<std::uint8_t> values);

  int width() const { return width_; }
  int height() const { return height_; }
  bool at(int row, int col) const { return values_[static_cast<size_t>(row) * width_ + col] != 0; }
  std::span<const std::uint8_t> values() const { return values_; }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> values_;
};

enum class FreespaceVerdict { ReportOccluded, Suppress, Delete };

const char* to_string(FreespaceVerdict v);

/// Minimum mask coverage of the box below which the mask is ignored.
inline constexpr double kMinMaskCoverage = 0.25;

/// Mean of 1/depth over the box pixels inside the image. With a mask covering at least
/// kMinMaskCoverage of those pixels the mean is restricted to mask pixels.
/// Returns nullopt when the box does not touch the image (depth is unobservable).
std::optional<double> region_inverse_depth(const DepthField& depth, const BBox& box,
                                           const BinaryMask* mask = nullptr);

/// Depth of the freespace horizon behind a box: the (lower) median depth over the
/// central half-size sub-box. The box center is clamped into the image first.
double horizon_depth(const DepthField& depth, const BBox& box);

/// Delete if z_f < alpha_delete * z_o, else Suppress if z_f < alpha_supp * z_o,
/// else ReportOccluded.
FreespaceVerdict freespace_verdict(double z_f, double z_o, double alpha_supp, double alpha_delete);

}  // namespace ghosttrack
