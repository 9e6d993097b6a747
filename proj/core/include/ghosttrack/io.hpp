#pragma once

#include <filesystem>
#include <limits>
#include <map>
#include <string>

#include "ghosttrack/depth_field.hpp"
#include "ghosttrack/records.hpp"

namespace ghosttrack {

namespace fs = std::filesystem;

/// MOT ground truth: `frame,id,left,top,width,height,conf,class,visibility`.
/// With filter_pedestrians, rows with conf == 0 or class != 1 are dropped.
GtRecord read_mot_gt(const fs::path& path, bool filter_pedestrians = true);
void write_mot_gt(const GtRecord& gts, const fs::path& path);

/// MOT detections: `frame,-1,left,top,width,height,conf[,...]`. Rows with
/// conf < min_confidence are dropped.
DetectionRecord read_mot_det(const fs::path& path,
                             double min_confidence = -std::numeric_limits<double>::infinity());
void write_mot_det(const DetectionRecord& dets, const fs::path& path);

/// Drops detections below the confidence threshold (after features are attached).
void filter_confidence(DetectionRecord& dets, double min_confidence);

/// Top-1 boxes in MOT result form `frame,id,left,top,width,height,1,-1,-1,-1`.
void write_mot_predictions(const PredictionRecord& preds, const fs::path& path);
/// Reads MOT result rows back as single-hypothesis, non-occluded predictions.
PredictionRecord read_mot_predictions(const fs::path& path);

/// JSON-lines, one object per reported person:
/// {"frame":F,"id":I,"occluded":B,"gamma":G,"hypotheses":[[l,t,w,h],...]}
void write_hypotheses(const PredictionRecord& preds, const fs::path& path);
PredictionRecord read_hypotheses(const fs::path& path);

/// Writes both the MOT txt (Top-1) and the JSON-lines hypotheses.
void write_predictions(const PredictionRecord& preds, const fs::path& path_txt,
                       const fs::path& path_hyp);

/// Dispatches on extension: .jsonl -> hypotheses, anything else -> MOT txt.
PredictionRecord read_predictions(const fs::path& path);

using WarpRecord = std::map<int, Warp>;

/// Lines `frame w11 w12 w13 w21 w22 w23 w31 w32 w33`. A missing file yields an empty
/// record (identity everywhere). Non-invertible matrices are rejected.
WarpRecord read_warps(const fs::path& path);
void write_warps(const WarpRecord& warps, const fs::path& path);
Warp warp_for(const WarpRecord& warps, int frame);

/// Lines `frame,det_index,d,v1,...,vd` where det_index counts detections of that frame in
/// det-file order. Vectors are normalized on load. Throws ParseError on duplicates and
/// std::runtime_error when the records do not cover every detection exactly once.
void read_features(const fs::path& path, DetectionRecord& dets);
void write_features(const DetectionRecord& dets, const fs::path& path);

/// Portable Float Map; negative scale means little-endian, rows stored bottom-to-top.
DepthField read_pfm(const fs::path& path, int frame_id = 0);
void write_pfm(const DepthField& depth, const fs::path& path);

/// Binary PGM (P5, maxval <= 255); nonzero pixels are foreground.
BinaryMask read_pgm(const fs::path& path);
void write_pgm(const BinaryMask& mask, const fs::path& path);

/// "frame_000042" + ext.
std::string frame_filename(int frame, const std::string& ext);

}  // namespace ghosttrack
