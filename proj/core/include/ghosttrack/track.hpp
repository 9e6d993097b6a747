#pragma once

#include <deque>
#include <vector>

#include "ghosttrack/kalman.hpp"

namespace ghosttrack {

enum class TrackStatus { Tentative, Visible, Occluded, Deleted };

const char* to_string(TrackStatus s);

using Feature = std::vector<float>;

struct Track {
  int id = 0;
  TrackState state;
  TrackStatus status = TrackStatus::Tentative;
  int time_since_update = 0;
  int hits = 0;
  int age = 0;
  /// Appearance gallery, most recent first.
  std::deque<Feature> gallery;
  DepthHistory depth_history;

  bool confirmed() const { return status == TrackStatus::Visible || status == TrackStatus::Occluded; }
};

}  // namespace ghosttrack
