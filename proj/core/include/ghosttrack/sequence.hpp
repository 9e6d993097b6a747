#pragma once

#include <cstddef>
#include <deque>
#include <filesystem>
#include <functional>
#include <future>
#include <optional>
#include <string>
#include <vector>

#include "ghosttrack/association.hpp"
#include "ghosttrack/config.hpp"
#include "ghosttrack/depth_field.hpp"
#include "ghosttrack/io.hpp"
#include "ghosttrack/records.hpp"
#include "ghosttrack/tracker.hpp"

namespace ghosttrack {

struct SequenceInfo {
  std::string name;
  int width = 0;
  int height = 0;
  int length = 0;  // frames are 1..length
  double fps = 30.0;
  std::optional<double> focal;
};

/// On-disk layout of one sequence directory.
struct SequenceSource {
  SequenceInfo info;
  fs::path root;
  fs::path det;       // det/det.txt
  fs::path gt;        // gt/gt.txt (optional)
  fs::path depth;     // depth/frame_%06d.pfm
  fs::path masks;     // masks/frame_%06d.pgm (optional)
  fs::path warps;     // warps.txt (optional)
  fs::path features;  // det/features.txt (optional)

  /// Reads seqinfo.ini (`name`, `imWidth`, `imHeight`, `seqLength`, `frameRate`, optional
  /// `focal`). Throws IoError when the directory or seqinfo.ini is missing.
  static SequenceSource open(const fs::path& dir);

  CameraModel camera(const Config& cfg) const;
};

struct FrameData {
  int frame = 0;
  std::vector<Detection> detections;
  std::optional<DepthField> depth;
  std::optional<BinaryMask> mask;
  Warp warp = Warp::Identity();
};

/// Ordered stream of frames for the tracker.
class FrameSource {
 public:
  virtual ~FrameSource() = default;
  virtual const SequenceInfo& info() const = 0;
  virtual std::optional<CameraModel> camera() const { return std::nullopt; }
  /// Next frame, or nullopt at the end of the sequence.
  virtual std::optional<FrameData> next() = 0;
};

/// Streams a sequence directory. Depth rasters and masks are loaded on worker threads up
/// to `read_ahead` frames ahead of the consumer.
class DirectoryFrameSource final : public FrameSource {
 public:
  DirectoryFrameSource(SequenceSource source, const Config& cfg);
  ~DirectoryFrameSource() override;

  const SequenceInfo& info() const override { return source_.info; }
  std::optional<CameraModel> camera() const override;
  std::optional<FrameData> next() override;

 private:
  struct Rasters {
    std::optional<DepthField> depth;
    std::optional<BinaryMask> mask;
  };
  void fill_queue();
  Rasters load_rasters(int frame) const;

  SequenceSource source_;
  bool load_depth_;
  std::size_t read_ahead_;
  double focal_override_;
  DetectionRecord dets_;
  WarpRecord warps_;
  int next_frame_ = 1;
  int queued_until_ = 0;
  std::deque<std::future<Rasters>> pending_;
};

using FrameObserver = std::function<void(const FrameOutput&, const Tracker&)>;

/// Converts one frame's reports into prediction entries.
std::vector<PredEntry> to_predictions(const FrameOutput& out);

/// Runs the tracker over every frame of the source.
PredictionRecord run_sequence(FrameSource& source, const Config& cfg,
                              const FrameObserver& observer = {});

/// Convenience: open a directory and run.
PredictionRecord run_sequence(const fs::path& dir, const Config& cfg,
                              const FrameObserver& observer = {});

}  // namespace ghosttrack
