#pragma once

#include <cstdint>
#include <vector>

#include "ghosttrack/depth_field.hpp"
#include "ghosttrack/kalman.hpp"

namespace ghosttrack {

/// Ordered candidate boxes for one reported person. boxes[0] is the Top-1 output.
struct HypothesisSet {
  std::vector<BBox> boxes;

  const BBox& top() const { return boxes.front(); }
  std::size_t size() const { return boxes.size(); }
  friend bool operator==(const HypothesisSet&, const HypothesisSet&) = default;
};

/// Attempts per slot before falling back to the mean box.
inline constexpr int kMaxRejectionAttempts = 100;

/// Mean box followed by k-1 draws from the (x, gamma) marginal of the state. With a depth
/// field, draws whose depth lies in freespace (z < alpha_supp * horizon at the sampled x)
/// or whose gamma is nonpositive are rejected. Sampled boxes keep the mean's y, aspect
/// and height. Throws NumericalError when the marginal is not PSD.
HypothesisSet sample_topk(const TrackState& state, const DepthField* depth, int k,
                          std::uint64_t seed, double alpha_supp);

/// Input box followed by k-1 boxes with cx ~ N(cx, (s_x h)^2), cy ~ N(cy, (s_y h)^2).
HypothesisSet baseline_gauss(const BBox& box, double s_x, double s_y, int k, std::uint64_t seed);

/// Stateless seed mixing (splitmix64) for per-track, per-frame streams.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

}  // namespace ghosttrack
