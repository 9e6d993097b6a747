#pragma once

#include <map>
#include <vector>

#include "ghosttrack/geometry.hpp"
#include "ghosttrack/hypotheses.hpp"
#include "ghosttrack/track.hpp"

namespace ghosttrack {

/// Ground-truth box. Occluded iff visibility < the evaluation threshold.
struct GtBox {
  int frame = 0;
  int id = 0;
  BBox box;
  double visibility = 1.0;
  int cls = 1;

  bool occluded(double v_thresh) const { return visibility < v_thresh; }
};

/// Raw detection as stored in a det file.
struct DetRecord {
  int frame = 0;
  BBox box;
  double confidence = 1.0;
  Feature feature;
};

/// One reported person in one frame.
struct PredEntry {
  int frame = 0;
  int id = 0;
  HypothesisSet hypotheses;
  bool occluded = false;
  double gamma = 0.0;

  friend bool operator==(const PredEntry&, const PredEntry&) = default;
};

/// Records keyed by 1-based frame index.
template <class T>
using FrameMap = std::map<int, std::vector<T>>;

using GtRecord = FrameMap<GtBox>;
using DetectionRecord = FrameMap<DetRecord>;
using PredictionRecord = FrameMap<PredEntry>;

}  // namespace ghosttrack
