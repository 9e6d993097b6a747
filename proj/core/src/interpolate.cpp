#include "ghosttrack/interpolate.hpp"

#include <algorithm>

namespace ghosttrack {

namespace {

void sort_by_id(PredictionRecord& rec) {
  for (auto& [frame, entries] : rec)
    std::sort(entries.begin(), entries.end(), [](const PredEntry& a, const PredEntry& b) { return a.id < b.id; });
}

}  // namespace

PredictionRecord interpolate_offline(const PredictionRecord& tracks) {
  std::map<int, std::map<int, const PredEntry*>> by_id;
  for (const auto& [frame, entries] : tracks)
    for (const PredEntry& e : entries) by_id[e.id][frame] = &e;

  PredictionRecord out = tracks;
  for (const auto& [id, frames] : by_id) {
    for (auto it = frames.begin(); std::next(it) != frames.end(); ++it) {
      const auto nx = std::next(it);
      const int f0 = it->first;
      const int f1 = nx->first;
      if (f1 - f0 < 2) continue;
      const BBox a = it->second->hypotheses.top();
      const BBox b = nx->second->hypotheses.top();
      for (int f = f0 + 1; f < f1; ++f) {
        const double t = static_cast<double>(f - f0) / (f1 - f0);
        auto lerp = [t](double u, double v) { return u + t * (v - u); };
        const double w = lerp(a.width(), b.width());
        const double h = lerp(a.height, b.height);
        PredEntry e;
        e.frame = f;
        e.id = id;
        e.hypotheses.boxes.push_back(BBox{lerp(a.cx, b.cx), lerp(a.cy, b.cy), w / h, h});
        e.occluded = true;
        e.gamma = lerp(it->second->gamma, nx->second->gamma);
        out[f].push_back(std::move(e));
      }
    }
  }
  sort_by_id(out);
  return out;
}

PredictionRecord visible_gt_as_tracks(const GtRecord& gts, double v_thresh) {
  PredictionRecord out;
  for (const auto& [frame, boxes] : gts)
    for (const GtBox& g : boxes) {
      if (g.occluded(v_thresh)) continue;
      PredEntry e;
      e.frame = frame;
      e.id = g.id;
      e.hypotheses.boxes.push_back(g.box);
      out[frame].push_back(std::move(e));
    }
  sort_by_id(out);
  return out;
}

}  // namespace ghosttrack
