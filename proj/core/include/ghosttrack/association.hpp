#pragma once

#include <deque>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "ghosttrack/assignment.hpp"
#include "ghosttrack/kalman.hpp"
#include "ghosttrack/track.hpp"

namespace ghosttrack {

/// A detection ready for association: box, optional inverse depth, optional feature.
struct Detection {
  BBox box;
  double confidence = 1.0;
  Feature feature;  // empty when no appearance features are available
  std::optional<double> gamma;

  Measurement measurement() const { return {box, gamma}; }
};

/// Min over the gallery of (1 - cosine similarity). Vectors are expected to be unit norm.
/// Throws std::invalid_argument on a dimension mismatch or an empty gallery.
double appearance_cost(std::span<const Feature> gallery, const Feature& det);
double appearance_cost(const std::deque<Feature>& gallery, const Feature& det);

struct AssociationParams {
  KalmanParams kalman;
  double min_iou = 0.3;
  double max_appearance_distance = 0.2;
  /// Include the inverse-depth component in Mahalanobis gating.
  bool gate_gamma = true;
};

/// Partition of tracks and detections after matching.
struct MatchResult {
  std::vector<std::pair<int, int>> matches;  // (track index, detection index)
  std::vector<int> unmatched_visible;        // Y1
  std::vector<int> unmatched_occluded;       // Y2
  std::vector<int> unmatched_detections;     // Z
};

/// Two-stage matching. Stage 1: appearance cost gated by Mahalanobis distance, solved
/// per time-since-update level in ascending order (confirmed tracks only; skipped when
/// any detection lacks a feature). Stage 2: 1 - IoU for remaining tentative and visible
/// tracks (and occluded ones when running without features). Tracks must already be
/// predicted to the current frame.
MatchResult match_frame(std::span<const Track> tracks, std::span<const Detection> detections,
                        const AssociationParams& params);

}  // namespace ghosttrack
