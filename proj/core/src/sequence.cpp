#include "ghosttrack/sequence.hpp"

#include <fstream>
#include <map>

#include "ghosttrack/error.hpp"

namespace ghosttrack {

SequenceSource SequenceSource::open(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("sequence directory not found: " + dir.string());
  const fs::path ini = dir / "seqinfo.ini";
  std::ifstream in(ini);
  if (!in) throw IoError("missing " + ini.string());
  std::map<std::string, std::string> kv;
  for (auto& [k, v] : parse_key_values(in, ini.string())) kv[k] = v;

  auto required = [&](const char* key) -> const std::string& {
    const auto it = kv.find(key);
    if (it == kv.end()) throw ParseError(ini.string(), 0, std::string("missing key '") + key + "'");
    return it->second;
  };
  auto as_int = [&](const char* key) {
    try {
      std::size_t used = 0;
      const int v = std::stoi(required(key), &used);
      if (used != required(key).size()) throw std::invalid_argument(key);
      return v;
    } catch (const std::logic_error&) {
      throw ParseError(ini.string(), 0, std::string("key '") + key + "' is not an integer");
    }
  };

  SequenceSource s;
  s.root = dir;
  s.info.name = kv.count("name") ? kv["name"] : dir.filename().string();
  s.info.width = as_int("imWidth");
  s.info.height = as_int("imHeight");
  s.info.length = as_int("seqLength");
  if (s.info.width <= 0 || s.info.height <= 0) throw ParseError(ini.string(), 0, "image size must be positive");
  if (s.info.length < 0) throw ParseError(ini.string(), 0, "seqLength must be nonnegative");
  try {
    if (kv.count("frameRate")) s.info.fps = std::stod(kv["frameRate"]);
    if (kv.count("focal")) s.info.focal = std::stod(kv["focal"]);
  } catch (const std::logic_error&) {
    throw ParseError(ini.string(), 0, "frameRate and focal must be numbers");
  }
  s.det = dir / "det" / "det.txt";
  s.gt = dir / "gt" / "gt.txt";
  s.depth = dir / "depth";
  s.masks = dir / "masks";
  s.warps = dir / "warps.txt";
  s.features = dir / "det" / "features.txt";
  return s;
}

CameraModel SequenceSource::camera(const Config& cfg) const {
  const double focal = cfg.focal > 0.0 ? cfg.focal : info.focal.value_or(0.0);
  return CameraModel::for_image(info.width, info.height, focal);
}

DirectoryFrameSource::DirectoryFrameSource(SequenceSource source, const Config& cfg)
    : source_(std::move(source)),
      load_depth_(!cfg.depth_disabled),
      read_ahead_(static_cast<std::size_t>(std::max(cfg.read_ahead, 0))),
      focal_override_(cfg.focal) {
  if (!fs::exists(source_.det)) throw IoError("missing detections " + source_.det.string());
  dets_ = read_mot_det(source_.det);
  if (fs::exists(source_.features)) read_features(source_.features, dets_);
  filter_confidence(dets_, cfg.min_confidence);
  if (cfg.egomotion) warps_ = read_warps(source_.warps);
}

DirectoryFrameSource::~DirectoryFrameSource() {
  for (auto& f : pending_)
    if (f.valid()) f.wait();
}

std::optional<CameraModel> DirectoryFrameSource::camera() const {
  Config c;
  c.focal = focal_override_;
  return source_.camera(c);
}

DirectoryFrameSource::Rasters DirectoryFrameSource::load_rasters(int frame) const {
  Rasters r;
  if (!load_depth_) return r;
  const fs::path depth = source_.depth / frame_filename(frame, ".pfm");
  if (!fs::exists(depth)) throw IoError("missing depth raster for frame " + std::to_string(frame) + ": " + depth.string());
  r.depth = read_pfm(depth, frame);
  if (r.depth->width() != source_.info.width || r.depth->height() != source_.info.height)
    throw IoError("depth raster size mismatch for frame " + std::to_string(frame));
  const fs::path mask = source_.masks / frame_filename(frame, ".pgm");
  if (fs::exists(mask)) r.mask = read_pgm(mask);
  return r;
}

void DirectoryFrameSource::fill_queue() {
  const int limit = std::min(source_.info.length, next_frame_ + static_cast<int>(read_ahead_));
  while (queued_until_ < limit) {
    const int frame = ++queued_until_;
    pending_.push_back(std::async(std::launch::async, [this, frame] { return load_rasters(frame); }));
  }
}

std::optional<FrameData> DirectoryFrameSource::next() {
  if (next_frame_ > source_.info.length) return std::nullopt;
  const int frame = next_frame_++;
  FrameData fd;
  fd.frame = frame;
  Rasters rasters;
  if (read_ahead_ == 0) {
    rasters = load_rasters(frame);
    queued_until_ = frame;
  } else {
    fill_queue();
    rasters = pending_.front().get();
    pending_.pop_front();
  }
  fd.depth = std::move(rasters.depth);
  fd.mask = std::move(rasters.mask);
  fd.warp = warp_for(warps_, frame);
  const auto it = dets_.find(frame);
  if (it != dets_.end())
    for (const DetRecord& d : it->second) fd.detections.push_back(Detection{d.box, d.confidence, d.feature, std::nullopt});
  return fd;
}

std::vector<PredEntry> to_predictions(const FrameOutput& out) {
  std::vector<PredEntry> v;
  v.reserve(out.people.size());
  for (const ReportedPerson& p : out.people) v.push_back(PredEntry{out.frame, p.id, p.hypotheses, p.occluded, p.gamma});
  return v;
}

PredictionRecord run_sequence(FrameSource& source, const Config& cfg, const FrameObserver& observer) {
  const SequenceInfo& info = source.info();
  const CameraModel cam = source.camera().value_or(CameraModel::for_image(info.width, info.height, cfg.focal));
  Tracker tracker(cfg, cam);
  PredictionRecord rec;
  while (auto fd = source.next()) {
    const FrameOutput out = tracker.step(fd->frame, fd->detections, fd->depth ? &*fd->depth : nullptr, fd->warp,
                                         fd->mask ? &*fd->mask : nullptr);
    if (!out.people.empty()) rec[out.frame] = to_predictions(out);
    if (observer) observer(out, tracker);
  }
  return rec;
}

PredictionRecord run_sequence(const fs::path& dir, const Config& cfg, const FrameObserver& observer) {
  DirectoryFrameSource src(SequenceSource::open(dir), cfg);
  return run_sequence(src, cfg, observer);
}

}  // namespace ghosttrack
