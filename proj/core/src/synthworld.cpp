#include "ghosttrack/synthworld.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "ghosttrack/error.hpp"
#include "ghosttrack/hypotheses.hpp"

namespace ghosttrack {

namespace {

constexpr std::uint64_t kDetectorStream = 0xd37ec70bULL;
constexpr std::uint64_t kFeatureStream = 0xfea7u;

struct Rect {
  double left, top, right, bottom;
};

Rect occluder_rect(const Occluder& o, const CameraModel& cam, double pan) {
  Rect r{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
         -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (int corner = 0; corner < 8; ++corner) {
    const double x = corner & 1 ? o.max.x() : o.min.x();
    const double y = corner & 2 ? o.max.y() : o.min.y();
    const double z = corner & 4 ? o.max.z() : o.min.z();
    const double u = cam.focal * x / z + cam.px - pan;
    const double v = cam.focal * y / z + cam.py;
    r.left = std::min(r.left, u);
    r.right = std::max(r.right, u);
    r.top = std::min(r.top, v);
    r.bottom = std::max(r.bottom, v);
  }
  return r;
}

PixelRect rect_span(const Rect& r, int w, int h) {
  const double height = r.bottom - r.top;
  const double width = r.right - r.left;
  if (!(height > 0.0) || !(width > 0.0)) return {};
  return pixel_span(BBox{0.5 * (r.left + r.right), 0.5 * (r.top + r.bottom), width / height, height}, w, h);
}

Feature walker_base_feature(const Scenario& sc, std::size_t walker) {
  std::mt19937_64 rng(mix_seed(sc.seed, kFeatureStream, walker));
  std::normal_distribution<double> n(0.0, 1.0);
  Feature f(static_cast<std::size_t>(sc.detector.feature_dim));
  double norm = 0.0;
  for (float& x : f) {
    x = static_cast<float>(n(rng));
    norm += static_cast<double>(x) * x;
  }
  norm = std::sqrt(norm);
  for (float& x : f) x = static_cast<float>(x / norm);
  return f;
}

Feature noisy_feature(const Feature& base, double noise, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Feature f = base;
  double norm = 0.0;
  for (float& x : f) {
    x = static_cast<float>(x + noise * n(rng));
    norm += static_cast<double>(x) * x;
  }
  norm = std::sqrt(norm);
  for (float& x : f) x = static_cast<float>(x / norm);
  return f;
}

double in_image_fraction(const BBox& b, int w, int h) {
  const double ix = std::min(b.right(), static_cast<double>(w)) - std::max(b.left(), 0.0);
  const double iy = std::min(b.bottom(), static_cast<double>(h)) - std::max(b.top(), 0.0);
  if (ix <= 0.0 || iy <= 0.0) return 0.0;
  return ix * iy / (b.width() * b.height);
}

// Minimum share of a walker's box inside the image for it to be annotated.
constexpr double kMinInImage = 0.5;

}  // namespace

void Scenario::validate() const {
  if (width <= 0 || height <= 0) throw std::invalid_argument("scenario: image size must be positive");
  if (frames < 0) throw std::invalid_argument("scenario: frame count must be nonnegative");
  if (!(camera.focal > 0.0)) throw std::invalid_argument("scenario: focal length must be positive");
  if (!(background_depth > 0.0)) throw std::invalid_argument("scenario: background depth must be positive");
  if (!(camera_height > 0.0)) throw std::invalid_argument("scenario: camera height must be positive");
  for (std::size_t i = 0; i < walkers.size(); ++i) {
    const Cylinder3D& c = walkers[i].start;
    if (!(c.z > 0.0)) throw std::invalid_argument("scenario: walker " + std::to_string(i) + " starts at Z <= 0");
    if (!(c.height > 0.0) || !(c.aspect > 0.0))
      throw std::invalid_argument("scenario: walker " + std::to_string(i) + " has a degenerate size");
  }
  for (std::size_t i = 0; i < occluders.size(); ++i) {
    const Occluder& o = occluders[i];
    if (!((o.max - o.min).array() > 0.0).all())
      throw std::invalid_argument("scenario: occluder " + std::to_string(i) + " has nonpositive extent");
    if (!(o.min.z() > 0.0)) throw std::invalid_argument("scenario: occluder " + std::to_string(i) + " reaches Z <= 0");
  }
  if (detector.min_visibility < 0.0 || detector.min_visibility > 1.0 || detector.miss_rate < 0.0 ||
      detector.miss_rate > 1.0 || detector.noise_px < 0.0 || detector.feature_dim < 1 || detector.feature_noise < 0.0)
    throw std::invalid_argument("scenario: invalid detector model");
  for (double p : pan)
    if (!std::isfinite(p)) throw std::invalid_argument("scenario: non-finite pan");
}

double Scenario::pan_offset(int frame) const {
  if (pan.empty() || frame < 1) return 0.0;
  return pan[static_cast<std::size_t>(std::min<std::size_t>(static_cast<std::size_t>(frame), pan.size()) - 1)];
}

Cylinder3D Scenario::walker_at(std::size_t walker, int frame) const {
  const WalkerSpec& w = walkers.at(walker);
  Cylinder3D c = w.start;
  const double t = frame - 1;
  c.x += t * w.velocity.x();
  c.y += t * w.velocity.y();
  c.z += t * w.velocity.z();
  return c;
}

SynthFrame render_frame(const Scenario& sc, int frame) {
  const int w = sc.width;
  const int h = sc.height;
  const CameraModel& cam = sc.camera;
  const double pan = sc.pan_offset(frame);

  SynthFrame out;
  out.frame = frame;
  if (frame >= 2) {
    const double shift = pan - sc.pan_offset(frame - 1);
    if (shift != 0.0) out.warp(0, 2) = -shift;
  }

  std::vector<float> depth(static_cast<std::size_t>(w) * h);
  std::vector<int> owner(depth.size(), -1);  // walker index, -1 background, -2 occluder
  for (int r = 0; r < h; ++r) {
    const double v = r + 0.5 - cam.py;
    double z = sc.background_depth;
    if (v > 0.0) z = std::min(z, cam.focal * sc.camera_height / v);
    std::fill_n(depth.begin() + static_cast<long>(r) * w, w, static_cast<float>(z));
  }
  auto paint = [&](const PixelRect& pr, double z, int id) {
    const float zf = static_cast<float>(z);
    for (int r = pr.row0; r < pr.row1; ++r)
      for (int c = pr.col0; c < pr.col1; ++c) {
        const std::size_t i = static_cast<std::size_t>(r) * w + c;
        if (zf < depth[i]) {
          depth[i] = zf;
          owner[i] = id;
        }
      }
  };
  for (const Occluder& o : sc.occluders) paint(rect_span(occluder_rect(o, cam, pan), w, h), o.min.z(), -2);

  std::vector<BBox> boxes(sc.walkers.size());
  std::vector<PixelRect> spans(sc.walkers.size());
  for (std::size_t i = 0; i < sc.walkers.size(); ++i) {
    const Cylinder3D c = sc.walker_at(i, frame);
    if (!(c.z > 0.0))
      throw std::invalid_argument("scenario: walker " + std::to_string(i) + " reaches Z <= 0 at frame " +
                                  std::to_string(frame));
    boxes[i] = project(c, cam);
    boxes[i].cx -= pan;
    spans[i] = pixel_span(boxes[i], w, h);
    paint(spans[i], c.z, static_cast<int>(i));
  }

  std::mt19937_64 rng(mix_seed(sc.seed, static_cast<std::uint64_t>(frame), kDetectorStream));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t i = 0; i < sc.walkers.size(); ++i) {
    const PixelRect& pr = spans[i];
    long owned = 0;
    for (int r = pr.row0; r < pr.row1; ++r)
      for (int c = pr.col0; c < pr.col1; ++c) owned += owner[static_cast<std::size_t>(r) * w + c] == static_cast<int>(i);
    const double visibility = pr.area() > 0 ? static_cast<double>(owned) / static_cast<double>(pr.area()) : 0.0;
    // Draws happen for every walker so one walker's fate never shifts another's noise.
    const double miss = unit(rng);
    const std::array<double, 4> noise{normal(rng), normal(rng), normal(rng), normal(rng)};
    if (in_image_fraction(boxes[i], w, h) < kMinInImage) continue;

    GtBox g;
    g.frame = frame;
    g.id = static_cast<int>(i) + 1;
    g.box = boxes[i];
    g.visibility = visibility;
    out.gt.push_back(g);

    if (visibility < sc.detector.min_visibility || miss < sc.detector.miss_rate) continue;
    const double s = sc.detector.noise_px;
    const BBox& b = boxes[i];
    const double bw = std::max(1.0, b.width() + s * noise[2]);
    const double bh = std::max(1.0, b.height + s * noise[3]);
    DetRecord d;
    d.frame = frame;
    d.box = BBox{b.cx + s * noise[0], b.cy + s * noise[1], bw / bh, bh};
    d.confidence = 1.0;
    if (sc.detector.features)
      d.feature = noisy_feature(walker_base_feature(sc, i), sc.detector.feature_noise, rng);
    out.detections.push_back(std::move(d));
    out.detection_walker.push_back(static_cast<int>(i));
  }
  out.depth = DepthField(w, h, std::move(depth), frame);
  return out;
}

GtRecord render_ground_truth(const Scenario& sc) {
  sc.validate();
  GtRecord gt;
  for (int f = 1; f <= sc.frames; ++f) {
    SynthFrame fr = render_frame(sc, f);
    if (!fr.gt.empty()) gt[f] = std::move(fr.gt);
  }
  return gt;
}

RenderedSequence render_records(const Scenario& sc) {
  sc.validate();
  RenderedSequence out;
  for (int f = 1; f <= sc.frames; ++f) {
    SynthFrame fr = render_frame(sc, f);
    if (!fr.gt.empty()) out.gt[f] = std::move(fr.gt);
    if (!fr.detections.empty()) out.detections[f] = std::move(fr.detections);
    if (!fr.warp.isIdentity(0.0)) out.warps[f] = fr.warp;
  }
  return out;
}

SynthFrameSource::SynthFrameSource(Scenario sc, Detections mode, double gt_v_thresh, bool supply_warps)
    : scenario_(std::move(sc)), mode_(mode), gt_v_thresh_(gt_v_thresh), supply_warps_(supply_warps) {
  scenario_.validate();
  info_.name = scenario_.name;
  info_.width = scenario_.width;
  info_.height = scenario_.height;
  info_.length = scenario_.frames;
  info_.fps = scenario_.fps;
  info_.focal = scenario_.camera.focal;
}

std::optional<FrameData> SynthFrameSource::next() {
  if (next_frame_ > scenario_.frames) return std::nullopt;
  SynthFrame fr = render_frame(scenario_, next_frame_++);
  FrameData fd;
  fd.frame = fr.frame;
  if (mode_ == Detections::Detector) {
    for (const DetRecord& d : fr.detections) fd.detections.push_back(Detection{d.box, d.confidence, d.feature, std::nullopt});
  } else {
    for (const GtBox& g : fr.gt) {
      if (g.occluded(gt_v_thresh_)) continue;
      Feature f;
      if (scenario_.detector.features) f = walker_base_feature(scenario_, static_cast<std::size_t>(g.id - 1));
      fd.detections.push_back(Detection{g.box, 1.0, std::move(f), std::nullopt});
    }
  }
  if (!fr.gt.empty()) gt_[fr.frame] = fr.gt;
  fd.depth = std::move(fr.depth);
  if (supply_warps_) fd.warp = fr.warp;
  return fd;
}

void write_sequence(const Scenario& sc, const fs::path& dir) {
  sc.validate();
  fs::create_directories(dir / "gt");
  fs::create_directories(dir / "det");
  fs::create_directories(dir / "depth");
  {
    std::ofstream ini(dir / "seqinfo.ini");
    if (!ini) throw IoError("cannot write " + (dir / "seqinfo.ini").string());
    char focal[64];
    std::snprintf(focal, sizeof focal, "%.17g", sc.camera.focal);
    char fps[64];
    std::snprintf(fps, sizeof fps, "%.17g", sc.fps);
    ini << "[Sequence]\nname=" << sc.name << "\nframeRate=" << fps << "\nseqLength=" << sc.frames
        << "\nimWidth=" << sc.width << "\nimHeight=" << sc.height << "\nfocal=" << focal << "\n";
  }
  RenderedSequence rec;
  for (int f = 1; f <= sc.frames; ++f) {
    SynthFrame fr = render_frame(sc, f);
    write_pfm(fr.depth, dir / "depth" / frame_filename(f, ".pfm"));
    if (!fr.gt.empty()) rec.gt[f] = std::move(fr.gt);
    if (!fr.detections.empty()) rec.detections[f] = std::move(fr.detections);
    if (f >= 2 && !sc.pan.empty()) rec.warps[f] = fr.warp;
  }
  write_mot_gt(rec.gt, dir / "gt" / "gt.txt");
  write_mot_det(rec.detections, dir / "det" / "det.txt");
  if (sc.detector.features) write_features(rec.detections, dir / "det" / "features.txt");
  if (!sc.pan.empty()) write_warps(rec.warps, dir / "warps.txt");
  save_config(scenario_config(sc), dir / "tracker.cfg");
  save_scenario(sc, dir / "scenario.json");
}

namespace {

using json = nlohmann::ordered_json;
using nlohmann::ordered_json;

void check_keys(const json& j, std::initializer_list<const char*> allowed, const char* where) {
  if (!j.is_object()) throw std::invalid_argument(std::string("scenario: ") + where + " must be an object");
  for (const auto& [k, v] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || k == a;
    if (!ok) throw std::invalid_argument(std::string("scenario: unknown key '") + k + "' in " + where);
  }
}

template <class T>
void read_opt(const json& j, const char* key, T& dst) {
  if (j.contains(key)) dst = j.at(key).get<T>();
}

Eigen::Vector3d vec3(const json& j) {
  if (!j.is_array() || j.size() != 3) throw std::invalid_argument("scenario: expected a 3-vector");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace

Scenario scenario_from_json_text(const std::string& text) {
  Scenario sc;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("scenario: ") + e.what());
  }
  try {
    check_keys(j, {"name", "width", "height", "frames", "fps", "camera", "camera_height", "background_depth",
                   "walkers", "occluders", "detector", "pan", "seed", "tracker"},
               "scenario");
    read_opt(j, "name", sc.name);
    read_opt(j, "width", sc.width);
    read_opt(j, "height", sc.height);
    read_opt(j, "frames", sc.frames);
    read_opt(j, "fps", sc.fps);
    read_opt(j, "camera_height", sc.camera_height);
    read_opt(j, "background_depth", sc.background_depth);
    read_opt(j, "seed", sc.seed);
    sc.camera = CameraModel::for_image(sc.width, sc.height, 500.0);
    if (j.contains("camera")) {
      const json& c = j.at("camera");
      check_keys(c, {"focal", "px", "py"}, "camera");
      read_opt(c, "focal", sc.camera.focal);
      read_opt(c, "px", sc.camera.px);
      read_opt(c, "py", sc.camera.py);
    }
    if (j.contains("walkers"))
      for (const json& w : j.at("walkers")) {
        check_keys(w, {"x", "y", "z", "height", "aspect", "velocity"}, "walker");
        WalkerSpec s;
        s.start.height = 1.7;
        s.start.aspect = 0.41;
        read_opt(w, "height", s.start.height);
        read_opt(w, "aspect", s.start.aspect);
        s.start.x = w.at("x").get<double>();
        s.start.z = w.at("z").get<double>();
        s.start.y = w.contains("y") ? w.at("y").get<double>() : sc.camera_height - 0.5 * s.start.height;
        if (w.contains("velocity")) s.velocity = vec3(w.at("velocity"));
        sc.walkers.push_back(s);
      }
    if (j.contains("occluders"))
      for (const json& o : j.at("occluders")) {
        check_keys(o, {"min", "max"}, "occluder");
        sc.occluders.push_back(Occluder{vec3(o.at("min")), vec3(o.at("max"))});
      }
    if (j.contains("detector")) {
      const json& d = j.at("detector");
      check_keys(d, {"min_visibility", "miss_rate", "noise_px", "features", "feature_dim", "feature_noise"}, "detector");
      read_opt(d, "min_visibility", sc.detector.min_visibility);
      read_opt(d, "miss_rate", sc.detector.miss_rate);
      read_opt(d, "noise_px", sc.detector.noise_px);
      read_opt(d, "features", sc.detector.features);
      read_opt(d, "feature_dim", sc.detector.feature_dim);
      read_opt(d, "feature_noise", sc.detector.feature_noise);
    }
    read_opt(j, "pan", sc.pan);
    if (j.contains("tracker")) {
      const json& t = j.at("tracker");
      if (!t.is_object()) throw std::invalid_argument("scenario: tracker must be an object");
      for (const auto& [k, v] : t.items())
        sc.tracker_overrides.emplace_back(k, v.is_string() ? v.get<std::string>() : v.dump());
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("scenario: ") + e.what());
  }
  sc.validate();
  return sc;
}

std::string scenario_to_json_text(const Scenario& sc) {
  ordered_json j;
  j["name"] = sc.name;
  j["width"] = sc.width;
  j["height"] = sc.height;
  j["frames"] = sc.frames;
  j["fps"] = sc.fps;
  j["camera"] = {{"focal", sc.camera.focal}, {"px", sc.camera.px}, {"py", sc.camera.py}};
  j["camera_height"] = sc.camera_height;
  j["background_depth"] = sc.background_depth;
  j["seed"] = sc.seed;
  ordered_json walkers = ordered_json::array();
  for (const WalkerSpec& w : sc.walkers) {
    ordered_json o;
    o["x"] = w.start.x;
    o["y"] = w.start.y;
    o["z"] = w.start.z;
    o["height"] = w.start.height;
    o["aspect"] = w.start.aspect;
    o["velocity"] = {w.velocity.x(), w.velocity.y(), w.velocity.z()};
    walkers.push_back(std::move(o));
  }
  j["walkers"] = std::move(walkers);
  ordered_json occ = ordered_json::array();
  for (const Occluder& o : sc.occluders)
    occ.push_back({{"min", {o.min.x(), o.min.y(), o.min.z()}}, {"max", {o.max.x(), o.max.y(), o.max.z()}}});
  j["occluders"] = std::move(occ);
  j["detector"] = {{"min_visibility", sc.detector.min_visibility}, {"miss_rate", sc.detector.miss_rate},
                   {"noise_px", sc.detector.noise_px},             {"features", sc.detector.features},
                   {"feature_dim", sc.detector.feature_dim},       {"feature_noise", sc.detector.feature_noise}};
  j["pan"] = sc.pan;
  ordered_json t = ordered_json::object();
  for (const auto& [k, v] : sc.tracker_overrides) t[k] = v;
  j["tracker"] = std::move(t);
  return j.dump(2) + "\n";
}

Scenario load_scenario(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scenario " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return scenario_from_json_text(ss.str());
  } catch (const std::invalid_argument& e) {
    throw ParseError(path.string(), 0, e.what());
  }
}

void save_scenario(const Scenario& sc, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write scenario " + path.string());
  out << scenario_to_json_text(sc);
  out.close();
  if (!out) throw IoError("write failed for " + path.string());
}

Config scenario_config(const Scenario& sc, Config base) {
  base.focal = sc.camera.focal;
  for (const auto& [k, v] : sc.tracker_overrides) base.set(k, v);
  base.validate();
  return base;
}

}  // namespace ghosttrack
