#include "ghosttrack/association.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <stdexcept>

#include "ghosttrack/geometry.hpp"

namespace ghosttrack {

namespace {

double cosine_distance(const Feature& a, const Feature& b) {
  if (a.size() != b.size()) throw std::invalid_argument("appearance_cost: feature dimension mismatch");
  double dot = 0.0;
  for (size_t i = 0; i < a.size(); ++i) dot += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  return std::max(0.0, 1.0 - dot);
}

template <class Range>
double min_distance(const Range& gallery, const Feature& det) {
  if (gallery.empty()) throw std::invalid_argument("appearance_cost: empty gallery");
  double best = std::numeric_limits<double>::infinity();
  for (const Feature& g : gallery) best = std::min(best, cosine_distance(g, det));
  return best;
}

bool within_gate(const Track& t, const Detection& d, const AssociationParams& p) {
  Measurement m = d.measurement();
  if (!p.gate_gamma) m.gamma.reset();
  return mahalanobis(t.state, m, p.kalman) <= chi2_95(m.dim());
}

// Solves one cost table and moves matched entries out of the candidate lists.
void solve_stage(std::vector<int>& track_ids, std::vector<int>& det_ids, const CostMatrix& cost,
                 std::vector<std::pair<int, int>>& matches) {
  const Assignment a = solve_assignment(cost);
  std::vector<char> track_used(track_ids.size(), 0), det_used(det_ids.size(), 0);
  for (const auto& [r, c] : a) {
    matches.emplace_back(track_ids[static_cast<size_t>(r)], det_ids[static_cast<size_t>(c)]);
    track_used[static_cast<size_t>(r)] = 1;
    det_used[static_cast<size_t>(c)] = 1;
  }
  auto keep = [](std::vector<int>& ids, const std::vector<char>& used) {
    std::vector<int> rest;
    for (size_t i = 0; i < ids.size(); ++i)
      if (!used[i]) rest.push_back(ids[i]);
    ids = std::move(rest);
  };
  keep(track_ids, track_used);
  keep(det_ids, det_used);
}

}  // namespace

double appearance_cost(std::span<const Feature> gallery, const Feature& det) { return min_distance(gallery, det); }

double appearance_cost(const std::deque<Feature>& gallery, const Feature& det) { return min_distance(gallery, det); }

MatchResult match_frame(std::span<const Track> tracks, std::span<const Detection> detections,
                        const AssociationParams& params) {
  MatchResult out;
  std::vector<int> dets(detections.size());
  for (size_t j = 0; j < dets.size(); ++j) dets[j] = static_cast<int>(j);

  const bool with_features =
      !detections.empty() &&
      std::all_of(detections.begin(), detections.end(), [](const Detection& d) { return !d.feature.empty(); });

  std::vector<char> matched(tracks.size(), 0);

  if (with_features) {
    std::map<int, std::vector<int>> levels;
    for (size_t i = 0; i < tracks.size(); ++i)
      if (tracks[i].confirmed() && !tracks[i].gallery.empty())
        levels[tracks[i].time_since_update].push_back(static_cast<int>(i));
    for (auto& [level, ids] : levels) {
      if (dets.empty()) break;
      CostMatrix cost(static_cast<int>(ids.size()), static_cast<int>(dets.size()));
      for (size_t r = 0; r < ids.size(); ++r) {
        const Track& t = tracks[static_cast<size_t>(ids[r])];
        for (size_t c = 0; c < dets.size(); ++c) {
          const Detection& d = detections[static_cast<size_t>(dets[c])];
          double v = appearance_cost(t.gallery, d.feature);
          if (v > params.max_appearance_distance || !within_gate(t, d, params)) v = CostMatrix::kGated;
          cost(static_cast<int>(r), static_cast<int>(c)) = v;
        }
      }
      std::vector<std::pair<int, int>> stage;
      solve_stage(ids, dets, cost, stage);
      for (const auto& m : stage) {
        matched[static_cast<size_t>(m.first)] = 1;
        out.matches.push_back(m);
      }
    }
  }

  std::vector<int> iou_tracks;
  for (size_t i = 0; i < tracks.size(); ++i) {
    if (matched[i]) continue;
    const TrackStatus s = tracks[i].status;
    if (s == TrackStatus::Tentative || s == TrackStatus::Visible || (s == TrackStatus::Occluded && !with_features))
      iou_tracks.push_back(static_cast<int>(i));
  }
  if (!iou_tracks.empty() && !dets.empty()) {
    CostMatrix cost(static_cast<int>(iou_tracks.size()), static_cast<int>(dets.size()));
    for (size_t r = 0; r < iou_tracks.size(); ++r) {
      const BBox tb = tracks[static_cast<size_t>(iou_tracks[r])].state.box();
      for (size_t c = 0; c < dets.size(); ++c) {
        const double o = iou(tb, detections[static_cast<size_t>(dets[c])].box);
        cost(static_cast<int>(r), static_cast<int>(c)) = o < params.min_iou ? CostMatrix::kGated : 1.0 - o;
      }
    }
    std::vector<std::pair<int, int>> stage;
    solve_stage(iou_tracks, dets, cost, stage);
    for (const auto& m : stage) {
      matched[static_cast<size_t>(m.first)] = 1;
      out.matches.push_back(m);
    }
  }

  std::sort(out.matches.begin(), out.matches.end());
  for (size_t i = 0; i < tracks.size(); ++i) {
    if (matched[i]) continue;
    if (tracks[i].status == TrackStatus::Occluded)
      out.unmatched_occluded.push_back(static_cast<int>(i));
    else
      out.unmatched_visible.push_back(static_cast<int>(i));
  }
  out.unmatched_detections = dets;
  std::sort(out.unmatched_detections.begin(), out.unmatched_detections.end());
  return out;
}

}  // namespace ghosttrack
