#include "ghosttrack/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/LU>
#include <spdlog/spdlog.h>

namespace ghosttrack {

namespace si = state_index;

namespace {

// Nominal person height used to guess depth when no depth raster is available.
constexpr double kNominalHeightMeters = 1.7;

}  // namespace

TrackState apply_warp(const TrackState& s, const Warp& w) {
  if (w.isIdentity(0.0)) return s;
  if (!w.allFinite() || std::abs(w.determinant()) < kMinWarpDeterminant) {
    spdlog::warn("near-singular warp ignored (det = {})", w.determinant());
    return s;
  }
  const double x = s.mean[si::kX];
  const double y = s.mean[si::kY];
  const Eigen::Vector3d h = w * Eigen::Vector3d(x, y, 1.0);
  if (!(std::abs(h.z()) > kMinWarpDeterminant)) {
    spdlog::warn("warp maps a track center to infinity; ignored");
    return s;
  }
  const double px = h.x() / h.z();
  const double py = h.y() / h.z();
  Eigen::Matrix2d jac;
  jac << (w(0, 0) - px * w(2, 0)) / h.z(), (w(0, 1) - px * w(2, 1)) / h.z(),
         (w(1, 0) - py * w(2, 0)) / h.z(), (w(1, 1) - py * w(2, 1)) / h.z();
  TrackState out = s;
  out.mean[si::kX] = px;
  out.mean[si::kY] = py;
  const Eigen::Vector2d v = jac * Eigen::Vector2d(s.mean[si::kVelX], s.mean[si::kVelY]);
  out.mean[si::kVelX] = v.x();
  out.mean[si::kVelY] = v.y();
  return out;
}

Track apply_warp(const Track& t, const Warp& w) {
  Track out = t;
  out.state = apply_warp(t.state, w);
  return out;
}

Tracker::Tracker(Config cfg, CameraModel camera) : cfg_(std::move(cfg)), camera_(camera) {
  cfg_.validate();
  if (!(camera_.focal > 0.0)) throw std::invalid_argument("Tracker: focal length must be positive");
  kalman_ = cfg_.kalman_params(camera_.focal);
  assoc_ = cfg_.association_params(camera_.focal);
}

bool Tracker::freespace_active(const DepthField* depth) const {
  return cfg_.freespace && !cfg_.depth_disabled && depth != nullptr;
}

HypothesisSet Tracker::hypotheses_for(const Track& t, const DepthField* depth, int frame_id) const {
  const std::uint64_t seed =
      mix_seed(cfg_.seed, static_cast<std::uint64_t>(frame_id), static_cast<std::uint64_t>(t.id));
  HypothesisMode mode = cfg_.hypotheses;
  if (mode == HypothesisMode::Auto)
    mode = freespace_active(depth) ? HypothesisMode::State : HypothesisMode::Baseline;
  if (mode == HypothesisMode::State)
    return sample_topk(t.state, freespace_active(depth) ? depth : nullptr, cfg_.k, seed, cfg_.alpha_supp);
  return baseline_gauss(t.state.box(), cfg_.s_x, cfg_.s_y, cfg_.k, seed);
}

void Tracker::spawn(const Detection& det, double gamma) {
  Track t;
  t.id = next_id_++;
  t.state = init_state(det.box, gamma, kalman_);
  t.status = TrackStatus::Tentative;
  t.hits = 1;
  t.age = 1;
  t.depth_history = DepthHistory(static_cast<std::size_t>(cfg_.depth_window));
  t.depth_history.push(gamma);
  if (!det.feature.empty()) t.gallery.push_front(det.feature);
  tracks_.push_back(std::move(t));
}

FrameOutput Tracker::step(int frame_id, std::span<const Detection> detections, const DepthField* depth,
                          const Warp& warp, const BinaryMask* mask) {
  if (started_ && frame_id <= last_frame_)
    throw std::invalid_argument("Tracker: frame " + std::to_string(frame_id) + " does not follow frame " +
                                std::to_string(last_frame_));
  if (depth == nullptr && !cfg_.depth_disabled)
    throw std::invalid_argument("Tracker: missing depth raster for frame " + std::to_string(frame_id));
  started_ = true;
  last_frame_ = frame_id;
  const DepthField* field = cfg_.depth_disabled ? nullptr : depth;
  const bool gate_freespace = freespace_active(field);

  std::vector<Detection> dets;
  dets.reserve(detections.size());
  for (const Detection& d : detections)
    if (d.confidence >= cfg_.min_confidence && d.box.valid()) dets.push_back(d);

  for (Track& t : tracks_) {
    if (cfg_.egomotion) t.state = apply_warp(t.state, warp);
    const double gamma_hat = std::max(t.depth_history.aggregate(), kMinGamma);
    t.state = predict(t.state, t.status == TrackStatus::Occluded, gamma_hat, kalman_);
    ++t.age;
    ++t.time_since_update;
  }

  const MatchResult m = match_frame(tracks_, dets, assoc_);

  auto observed_gamma = [&](const BBox& box) -> std::optional<double> {
    if (field == nullptr) return std::nullopt;
    return region_inverse_depth(*field, box, mask);
  };

  FrameOutput out;
  out.frame = frame_id;
  auto report = [&](const Track& t, bool occluded) {
    ReportedPerson p;
    p.id = t.id;
    p.box = t.state.box();
    p.gamma = t.state.gamma();
    p.occluded = occluded;
    p.hypotheses = occluded ? hypotheses_for(t, field, frame_id) : HypothesisSet{{p.box}};
    p.xg_cov = t.state.xg_cov();
    out.people.push_back(std::move(p));
  };
  // A forecast with a good part of its width past the image border has walked out of view
  // rather than behind something.
  auto left_view = [&](const Track& t) {
    if (!gate_freespace) return false;
    const BBox b = t.state.box();
    const double inside = std::min(b.right(), static_cast<double>(field->width())) - std::max(b.left(), 0.0);
    return inside < kMinInViewFraction * b.width();
  };
  auto verdict = [&](const Track& t) {
    const double z_f = 1.0 / std::max(t.state.gamma(), kMinGamma);
    const double z_o = horizon_depth(*field, t.state.box());
    return freespace_verdict(z_f, z_o, cfg_.alpha_supp, cfg_.alpha_delete);
  };

  for (const auto& [ti, di] : m.matches) {
    Track& t = tracks_[static_cast<size_t>(ti)];
    const Detection& d = dets[static_cast<size_t>(di)];
    const std::optional<double> g = observed_gamma(d.box);
    t.state = update(t.state, Measurement{d.box, g}, kalman_);
    t.time_since_update = 0;
    ++t.hits;
    if (t.status == TrackStatus::Occluded || (t.status == TrackStatus::Tentative && t.hits >= cfg_.n_init))
      t.status = TrackStatus::Visible;
    if (!d.feature.empty()) {
      t.gallery.push_front(d.feature);
      while (t.gallery.size() > static_cast<size_t>(cfg_.gallery_size)) t.gallery.pop_back();
    }
    t.depth_history.push(g ? *g : t.state.gamma());
    if (t.status == TrackStatus::Visible) report(t, false);
  }

  for (int ti : m.unmatched_visible) {
    Track& t = tracks_[static_cast<size_t>(ti)];
    t.depth_history.push(t.state.gamma());
    if (t.status == TrackStatus::Tentative || t.time_since_update > cfg_.n_age || left_view(t)) {
      t.status = TrackStatus::Deleted;
      continue;
    }
    if (!cfg_.forecast) continue;
    // A forecast in front of the visible background would have been seen: keep it silent.
    if (gate_freespace && verdict(t) != FreespaceVerdict::ReportOccluded) continue;
    t.status = TrackStatus::Occluded;
    report(t, true);
  }

  for (int ti : m.unmatched_occluded) {
    Track& t = tracks_[static_cast<size_t>(ti)];
    t.depth_history.push(t.state.gamma());
    if (t.time_since_update > cfg_.n_age || left_view(t)) {
      t.status = TrackStatus::Deleted;
      continue;
    }
    if (gate_freespace) {
      const FreespaceVerdict v = verdict(t);
      if (v == FreespaceVerdict::Delete) {
        t.status = TrackStatus::Deleted;
        continue;
      }
      if (v == FreespaceVerdict::Suppress) continue;
    }
    report(t, true);
  }

  for (int di : m.unmatched_detections) {
    const Detection& d = dets[static_cast<size_t>(di)];
    std::optional<double> g = observed_gamma(d.box);
    if (!g || !(*g > 0.0)) g = d.box.height / (camera_.focal * kNominalHeightMeters);
    spawn(d, *g);
  }

  std::erase_if(tracks_, [](const Track& t) { return t.status == TrackStatus::Deleted; });
  std::sort(out.people.begin(), out.people.end(),
            [](const ReportedPerson& a, const ReportedPerson& b) { return a.id < b.id; });
  return out;
}

}  // namespace ghosttrack

namespace ghosttrack {

const char* to_string(TrackStatus s) {
  switch (s) {
    case TrackStatus::Tentative: return "tentative";
    case TrackStatus::Visible: return "visible";
    case TrackStatus::Occluded: return "occluded";
    case TrackStatus::Deleted: return "deleted";
  }
  return "unknown";
}

}  // namespace ghosttrack
