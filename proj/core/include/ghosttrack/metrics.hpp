#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ghosttrack/config.hpp"
#include "ghosttrack/records.hpp"

namespace ghosttrack {

struct EvalParams {
  double alpha_iou = 0.5;
  int k = 5;  // hypotheses considered per prediction
  double v_thresh = 0.10;
  MatchingMode matching = MatchingMode::Optimal;

  static EvalParams from(const Config& cfg);
};

/// IoU(g, P) = max over the first k hypotheses of iou(g, p_i).
double set_overlap(const BBox& gt, const HypothesisSet& hyps, int k);

/// Per-frame GT/prediction matching. Pairs are indices into the input spans.
struct FrameMatch {
  std::vector<std::pair<int, int>> pairs;
  std::vector<double> overlaps;
};

/// Optimal matching maximizing the number of pairs with overlap >= alpha_iou, then the
/// total overlap. Ties resolve by (gt id, pred id). MatchingMode::Greedy instead takes
/// pairs in descending overlap order.
/// With prefer_occluded_below >= 0, among the largest matchings those covering more GT with
/// visibility below that threshold win before total overlap is compared (greedy mode takes
/// those pairs first). Occluded-mode metrics use this so that the number of matched
/// occluded boxes is as large as any matching allows.
FrameMatch match_topk_frame(std::span<const GtBox> gts, std::span<const PredEntry> preds,
                            double alpha_iou, int k = 1 << 30,
                            MatchingMode mode = MatchingMode::Optimal,
                            double prefer_occluded_below = -1.0);

struct DetectionCounts {
  long tp = 0;
  long fp = 0;
  long fn = 0;

  double precision() const;
  double recall() const;
  double f1() const;
  DetectionCounts& operator+=(const DetectionCounts& o);
};

/// F1 = 2PR/(P+R) with 0/0 -> 0.
double f1_score(double precision, double recall);

/// Occluded mode: TP = matched occluded GT, FN = unmatched occluded GT, FP = unmatched
/// predictions; matches to visible GT are neutral. All mode: standard counts.
DetectionCounts topk_counts(const GtRecord& gts, const PredictionRecord& preds,
                            const EvalParams& params, bool occluded_only);

struct PrecisionRecall {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

PrecisionRecall topk_f1(const GtRecord& gts, const PredictionRecord& preds,
                        const EvalParams& params, bool occluded_only);

struct IdentityCounts {
  long idtp = 0;
  long idfp = 0;
  long idfn = 0;

  double idf1() const;
  IdentityCounts& operator+=(const IdentityCounts& o);
};

/// Identity matching over GT trajectories (occluded mode: each maximal occluded segment
/// is its own trajectory) against predicted ids, using Top-1 boxes. In occluded mode
/// predictions matched frame-wise to visible GT are not counted as IDFP.
IdentityCounts identity_counts(const GtRecord& gts, const PredictionRecord& preds,
                               const EvalParams& params, bool occluded_only);

double idf1_occluded(const GtRecord& gts, const PredictionRecord& preds, const EvalParams& params);

struct ClearCounts {
  long tp = 0;
  long fp = 0;
  long fn = 0;
  long ids = 0;
  long gt = 0;

  /// Absent when there is no GT.
  std::optional<double> mota() const;
  ClearCounts& operator+=(const ClearCounts& o);
};

/// CLEAR-MOT accounting on Top-1 boxes. Occluded mode rewards only occluded GT, counts
/// identity switches only on occluded GT and leaves predictions on visible GT neutral.
ClearCounts clear_counts(const GtRecord& gts, const PredictionRecord& preds,
                         const EvalParams& params, bool occluded_only);

std::optional<double> mota_occluded(const GtRecord& gts, const PredictionRecord& preds,
                                    const EvalParams& params);

struct MetricCounts {
  DetectionCounts topk_occl;
  DetectionCounts topk_all;
  DetectionCounts top1_occl;
  DetectionCounts top1_all;
  IdentityCounts id_occl;
  IdentityCounts id_all;
  ClearCounts clear_occl;
  ClearCounts clear_all;

  MetricCounts& operator+=(const MetricCounts& o);
};

struct MetricReport {
  std::string name;
  MetricCounts counts;

  double topk_f1_occl() const { return counts.topk_occl.f1(); }
  double topk_prec_occl() const { return counts.topk_occl.precision(); }
  double topk_rec_occl() const { return counts.topk_occl.recall(); }
  double topk_f1_all() const { return counts.topk_all.f1(); }
  double top1_f1_occl() const { return counts.top1_occl.f1(); }
  double top1_f1_all() const { return counts.top1_all.f1(); }
  double idf1_occl() const { return counts.id_occl.idf1(); }
  double idf1_all() const { return counts.id_all.idf1(); }
  std::optional<double> mota_occl() const { return counts.clear_occl.mota(); }
  std::optional<double> mota_all() const { return counts.clear_all.mota(); }

  /// Machine-readable `key=value` lines, fixed order.
  std::vector<std::pair<std::string, std::string>> entries() const;
};

MetricReport evaluate_sequence(const std::string& name, const GtRecord& gts,
                               const PredictionRecord& preds, const EvalParams& params);

/// Sums counts over sequences; the name is "aggregate".
MetricReport aggregate(std::span<const MetricReport> reports);

std::string format_table(std::span<const MetricReport> reports);
std::string format_key_values(std::span<const MetricReport> reports);

}  // namespace ghosttrack
