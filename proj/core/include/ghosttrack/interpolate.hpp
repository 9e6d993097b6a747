#pragma once

#include "ghosttrack/records.hpp"

namespace ghosttrack {

/// Offline gap filling: for every id, boxes are linearly interpolated across each interior
/// gap (both endpoints known). Gaps at the start or end of a track stay empty. Filled
/// entries are flagged occluded and carry a single hypothesis.
PredictionRecord interpolate_offline(const PredictionRecord& tracks);

/// GT boxes with visibility >= v_thresh as single-hypothesis predictions keeping GT ids.
PredictionRecord visible_gt_as_tracks(const GtRecord& gts, double v_thresh);

}  // namespace ghosttrack
