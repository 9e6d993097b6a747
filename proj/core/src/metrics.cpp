#include "ghosttrack/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "ghosttrack/assignment.hpp"

namespace ghosttrack {

EvalParams EvalParams::from(const Config& cfg) {
  return EvalParams{cfg.alpha_iou, cfg.k, cfg.v_thresh, cfg.matching};
}

double set_overlap(const BBox& gt, const HypothesisSet& hyps, int k) {
  double best = 0.0;
  const std::size_t n = std::min(hyps.size(), static_cast<std::size_t>(std::max(k, 1)));
  for (std::size_t i = 0; i < n; ++i) best = std::max(best, iou(gt, hyps.boxes[i]));
  return best;
}

FrameMatch match_topk_frame(std::span<const GtBox> gts, std::span<const PredEntry> preds, double alpha_iou,
                            int k, MatchingMode mode, double prefer_occluded_below) {
  FrameMatch out;
  if (gts.empty() || preds.empty()) return out;

  std::vector<int> gi(gts.size()), pi(preds.size());
  std::iota(gi.begin(), gi.end(), 0);
  std::iota(pi.begin(), pi.end(), 0);
  std::stable_sort(gi.begin(), gi.end(), [&](int a, int b) { return gts[a].id < gts[b].id; });
  std::stable_sort(pi.begin(), pi.end(), [&](int a, int b) { return preds[a].id < preds[b].id; });

  std::vector<double> overlap(gi.size() * pi.size());
  for (std::size_t r = 0; r < gi.size(); ++r)
    for (std::size_t c = 0; c < pi.size(); ++c)
      overlap[r * pi.size() + c] = set_overlap(gts[gi[r]].box, preds[pi[c]].hypotheses, k);

  auto visible_row = [&](std::size_t r) {
    return prefer_occluded_below >= 0.0 && !gts[gi[r]].occluded(prefer_occluded_below);
  };

  std::vector<std::pair<int, int>> chosen;  // sorted positions
  if (mode == MatchingMode::Greedy) {
    std::vector<std::pair<int, int>> cand;
    for (std::size_t r = 0; r < gi.size(); ++r)
      for (std::size_t c = 0; c < pi.size(); ++c)
        if (overlap[r * pi.size() + c] >= alpha_iou) cand.emplace_back(static_cast<int>(r), static_cast<int>(c));
    std::stable_sort(cand.begin(), cand.end(), [&](const auto& a, const auto& b) {
      const bool va = visible_row(a.first);
      const bool vb = visible_row(b.first);
      if (va != vb) return vb;
      return overlap[a.first * pi.size() + a.second] > overlap[b.first * pi.size() + b.second];
    });
    std::vector<char> gu(gi.size(), 0), pu(pi.size(), 0);
    for (const auto& [r, c] : cand) {
      if (gu[r] || pu[c]) continue;
      gu[r] = pu[c] = 1;
      chosen.emplace_back(r, c);
    }
    std::sort(chosen.begin(), chosen.end());
  } else {
    // Each visible pair pays more than any total of overlap costs can differ by.
    const double visible_penalty = static_cast<double>(std::min(gi.size(), pi.size()) + 1);
    CostMatrix cost(static_cast<int>(gi.size()), static_cast<int>(pi.size()));
    for (std::size_t r = 0; r < gi.size(); ++r)
      for (std::size_t c = 0; c < pi.size(); ++c) {
        const double o = overlap[r * pi.size() + c];
        cost(static_cast<int>(r), static_cast<int>(c)) =
            o >= alpha_iou ? 1.0 - o + (visible_row(r) ? visible_penalty : 0.0) : CostMatrix::kGated;
      }
    chosen = solve_assignment(cost);
  }
  for (const auto& [r, c] : chosen) {
    out.pairs.emplace_back(gi[r], pi[c]);
    out.overlaps.push_back(overlap[static_cast<std::size_t>(r) * pi.size() + c]);
  }
  return out;
}

double DetectionCounts::precision() const { return tp + fp == 0 ? 0.0 : static_cast<double>(tp) / (tp + fp); }
double DetectionCounts::recall() const { return tp + fn == 0 ? 0.0 : static_cast<double>(tp) / (tp + fn); }
double DetectionCounts::f1() const { return f1_score(precision(), recall()); }

DetectionCounts& DetectionCounts::operator+=(const DetectionCounts& o) {
  tp += o.tp;
  fp += o.fp;
  fn += o.fn;
  return *this;
}

double f1_score(double precision, double recall) {
  const double s = precision + recall;
  return s <= 0.0 ? 0.0 : 2.0 * precision * recall / s;
}

namespace {

const std::vector<GtBox> kNoGt;
const std::vector<PredEntry> kNoPred;

template <class F>
void for_each_frame(const GtRecord& gts, const PredictionRecord& preds, F&& fn) {
  std::set<int> frames;
  for (const auto& kv : gts) frames.insert(kv.first);
  for (const auto& kv : preds) frames.insert(kv.first);
  for (int f : frames) {
    const auto g = gts.find(f);
    const auto p = preds.find(f);
    fn(f, g == gts.end() ? kNoGt : g->second, p == preds.end() ? kNoPred : p->second);
  }
}

}  // namespace

DetectionCounts topk_counts(const GtRecord& gts, const PredictionRecord& preds, const EvalParams& params,
                            bool occluded_only) {
  DetectionCounts c;
  for_each_frame(gts, preds, [&](int, const std::vector<GtBox>& g, const std::vector<PredEntry>& p) {
    const FrameMatch m = match_topk_frame(g, p, params.alpha_iou, params.k, params.matching,
                                          occluded_only ? params.v_thresh : -1.0);
    const long matched = static_cast<long>(m.pairs.size());
    c.fp += static_cast<long>(p.size()) - matched;
    if (!occluded_only) {
      c.tp += matched;
      c.fn += static_cast<long>(g.size()) - matched;
      return;
    }
    long occ = 0, occ_matched = 0;
    for (const GtBox& b : g) occ += b.occluded(params.v_thresh) ? 1 : 0;
    for (const auto& [gi, pi] : m.pairs) occ_matched += g[static_cast<size_t>(gi)].occluded(params.v_thresh) ? 1 : 0;
    c.tp += occ_matched;
    c.fn += occ - occ_matched;
  });
  return c;
}

PrecisionRecall topk_f1(const GtRecord& gts, const PredictionRecord& preds, const EvalParams& params,
                        bool occluded_only) {
  const DetectionCounts c = topk_counts(gts, preds, params, occluded_only);
  return {c.precision(), c.recall(), c.f1()};
}

double IdentityCounts::idf1() const {
  const long d = 2 * idtp + idfp + idfn;
  return d == 0 ? 0.0 : 2.0 * static_cast<double>(idtp) / static_cast<double>(d);
}

IdentityCounts& IdentityCounts::operator+=(const IdentityCounts& o) {
  idtp += o.idtp;
  idfp += o.idfp;
  idfn += o.idfn;
  return *this;
}

IdentityCounts identity_counts(const GtRecord& gts, const PredictionRecord& preds, const EvalParams& params,
                               bool occluded_only) {
  // Trajectory key of every counted GT box; occluded segments get fresh keys.
  std::map<std::pair<int, int>, int> gt_traj;  // (frame, gt id) -> trajectory
  {
    std::map<int, std::pair<int, int>> open;  // gt id -> (last frame, trajectory)
    int next = 0;
    for (const auto& [frame, boxes] : gts)
      for (const GtBox& g : boxes) {
        if (occluded_only && !g.occluded(params.v_thresh)) continue;
        int traj = -1;
        if (!occluded_only) {
          auto [it, fresh] = open.try_emplace(g.id, frame, next);
          if (fresh) ++next;
          traj = it->second.second;
        } else {
          auto it = open.find(g.id);
          if (it != open.end() && it->second.first == frame - 1) {
            traj = it->second.second;
            it->second.first = frame;
          } else {
            traj = next++;
            open[g.id] = {frame, traj};
          }
        }
        gt_traj[{frame, g.id}] = traj;
      }
  }

  IdentityCounts c;
  std::map<std::pair<int, int>, long> co;  // (trajectory, pred id) -> frames matched at alpha
  long pred_total = 0;
  for_each_frame(gts, preds, [&](int frame, const std::vector<GtBox>& g, const std::vector<PredEntry>& p) {
    std::vector<char> neutral(p.size(), 0);
    if (occluded_only) {
      const FrameMatch m = match_topk_frame(g, p, params.alpha_iou, 1, params.matching, params.v_thresh);
      for (const auto& [gi, pi] : m.pairs)
        if (!g[static_cast<size_t>(gi)].occluded(params.v_thresh)) neutral[static_cast<size_t>(pi)] = 1;
    }
    for (std::size_t j = 0; j < p.size(); ++j) pred_total += neutral[j] ? 0 : 1;
    for (const GtBox& gb : g) {
      const auto t = gt_traj.find({frame, gb.id});
      if (t == gt_traj.end()) continue;
      for (std::size_t j = 0; j < p.size(); ++j) {
        if (neutral[j]) continue;
        if (set_overlap(gb.box, p[j].hypotheses, 1) >= params.alpha_iou) ++co[{t->second, p[j].id}];
      }
    }
  });

  // Max-weight bipartite matching between trajectories and predicted ids. Each row also
  // gets a private "unmatched" column so every row is matched and cost = M - overlap count.
  std::map<int, int> row_of, col_of;
  for (const auto& [key, n] : co) {
    row_of.try_emplace(key.first, static_cast<int>(row_of.size()));
    col_of.try_emplace(key.second, static_cast<int>(col_of.size()));
  }
  long idtp = 0;
  if (!co.empty()) {
    long m = 0;
    for (const auto& kv : co) m = std::max(m, kv.second);
    const int rows = static_cast<int>(row_of.size());
    const int cols = static_cast<int>(col_of.size());
    CostMatrix cost(rows, cols + rows, CostMatrix::kGated);
    for (const auto& [key, n] : co)
      cost(row_of[key.first], col_of[key.second]) = static_cast<double>(m - n);
    for (int r = 0; r < rows; ++r) cost(r, cols + r) = static_cast<double>(m);
    for (const auto& [r, col] : solve_assignment(cost)) {
      if (col >= cols) continue;
      idtp += m - static_cast<long>(cost(r, col));
    }
  }
  c.idtp = idtp;
  c.idfn = static_cast<long>(gt_traj.size()) - idtp;
  c.idfp = pred_total - idtp;
  return c;
}

double idf1_occluded(const GtRecord& gts, const PredictionRecord& preds, const EvalParams& params) {
  return identity_counts(gts, preds, params, true).idf1();
}

std::optional<double> ClearCounts::mota() const {
  if (gt == 0) return std::nullopt;
  return 1.0 - static_cast<double>(fp + fn + ids) / static_cast<double>(gt);
}

ClearCounts& ClearCounts::operator+=(const ClearCounts& o) {
  tp += o.tp;
  fp += o.fp;
  fn += o.fn;
  ids += o.ids;
  gt += o.gt;
  return *this;
}

ClearCounts clear_counts(const GtRecord& gts, const PredictionRecord& preds, const EvalParams& params,
                         bool occluded_only) {
  ClearCounts c;
  std::map<int, int> current;  // gt id -> pred id matched in the previous frame
  std::map<int, int> last;     // gt id -> last pred id ever matched
  for_each_frame(gts, preds, [&](int, const std::vector<GtBox>& g, const std::vector<PredEntry>& p) {
    std::vector<int> gt_match(g.size(), -1);
    std::vector<char> pred_used(p.size(), 0);

    // Keep correspondences that are still valid.
    std::map<int, int> pred_index;
    for (std::size_t j = 0; j < p.size(); ++j) pred_index.emplace(p[j].id, static_cast<int>(j));
    for (std::size_t i = 0; i < g.size(); ++i) {
      const auto cur = current.find(g[i].id);
      if (cur == current.end()) continue;
      const auto pj = pred_index.find(cur->second);
      if (pj == pred_index.end() || pred_used[static_cast<size_t>(pj->second)]) continue;
      if (set_overlap(g[i].box, p[static_cast<size_t>(pj->second)].hypotheses, 1) < params.alpha_iou) continue;
      gt_match[i] = pj->second;
      pred_used[static_cast<size_t>(pj->second)] = 1;
    }

    std::vector<GtBox> rest_g;
    std::vector<int> rest_gi;
    for (std::size_t i = 0; i < g.size(); ++i)
      if (gt_match[i] < 0) {
        rest_g.push_back(g[i]);
        rest_gi.push_back(static_cast<int>(i));
      }
    std::vector<PredEntry> rest_p;
    std::vector<int> rest_pi;
    for (std::size_t j = 0; j < p.size(); ++j)
      if (!pred_used[j]) {
        rest_p.push_back(p[j]);
        rest_pi.push_back(static_cast<int>(j));
      }
    const FrameMatch m = match_topk_frame(rest_g, rest_p, params.alpha_iou, 1, params.matching,
                                          occluded_only ? params.v_thresh : -1.0);
    std::vector<char> is_new(g.size(), 0);
    for (const auto& [a, b] : m.pairs) {
      gt_match[static_cast<size_t>(rest_gi[static_cast<size_t>(a)])] = rest_pi[static_cast<size_t>(b)];
      pred_used[static_cast<size_t>(rest_pi[static_cast<size_t>(b)])] = 1;
      is_new[static_cast<size_t>(rest_gi[static_cast<size_t>(a)])] = 1;
    }

    std::map<int, int> next;
    long matched = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const bool counted = !occluded_only || g[i].occluded(params.v_thresh);
      if (counted) ++c.gt;
      if (gt_match[i] < 0) {
        if (counted) ++c.fn;
        continue;
      }
      ++matched;
      const int pid = p[static_cast<size_t>(gt_match[i])].id;
      if (counted) {
        ++c.tp;
        const auto prev = last.find(g[i].id);
        if (is_new[i] && prev != last.end() && prev->second != pid) ++c.ids;
      }
      next[g[i].id] = pid;
      last[g[i].id] = pid;
    }
    current = std::move(next);
    c.fp += static_cast<long>(p.size()) - matched;
  });
  return c;
}

std::optional<double> mota_occluded(const GtRecord& gts, const PredictionRecord& preds, const EvalParams& params) {
  return clear_counts(gts, preds, params, true).mota();
}

MetricCounts& MetricCounts::operator+=(const MetricCounts& o) {
  topk_occl += o.topk_occl;
  topk_all += o.topk_all;
  top1_occl += o.top1_occl;
  top1_all += o.top1_all;
  id_occl += o.id_occl;
  id_all += o.id_all;
  clear_occl += o.clear_occl;
  clear_all += o.clear_all;
  return *this;
}

namespace {

std::string fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string opt_fixed(const std::optional<double>& v, int digits = 6) { return v ? fixed(*v, digits) : "na"; }

}  // namespace

std::vector<std::pair<std::string, std::string>> MetricReport::entries() const {
  const MetricCounts& c = counts;
  return {
      {"topk_f1_occl", fixed(topk_f1_occl())},
      {"topk_prec_occl", fixed(topk_prec_occl())},
      {"topk_rec_occl", fixed(topk_rec_occl())},
      {"topk_f1_all", fixed(topk_f1_all())},
      {"top1_f1_occl", fixed(top1_f1_occl())},
      {"top1_f1_all", fixed(top1_f1_all())},
      {"idf1_occl", fixed(idf1_occl())},
      {"idf1_all", fixed(idf1_all())},
      {"mota_occl", opt_fixed(mota_occl())},
      {"mota_all", opt_fixed(mota_all())},
      {"topk_tp_occl", std::to_string(c.topk_occl.tp)},
      {"topk_fp_occl", std::to_string(c.topk_occl.fp)},
      {"topk_fn_occl", std::to_string(c.topk_occl.fn)},
      {"topk_tp_all", std::to_string(c.topk_all.tp)},
      {"topk_fp_all", std::to_string(c.topk_all.fp)},
      {"topk_fn_all", std::to_string(c.topk_all.fn)},
      {"top1_tp_occl", std::to_string(c.top1_occl.tp)},
      {"top1_fp_occl", std::to_string(c.top1_occl.fp)},
      {"top1_fn_occl", std::to_string(c.top1_occl.fn)},
      {"idtp_occl", std::to_string(c.id_occl.idtp)},
      {"idfp_occl", std::to_string(c.id_occl.idfp)},
      {"idfn_occl", std::to_string(c.id_occl.idfn)},
      {"idtp_all", std::to_string(c.id_all.idtp)},
      {"idfp_all", std::to_string(c.id_all.idfp)},
      {"idfn_all", std::to_string(c.id_all.idfn)},
      {"ids_occl", std::to_string(c.clear_occl.ids)},
      {"ids_all", std::to_string(c.clear_all.ids)},
      {"gt_occl", std::to_string(c.clear_occl.gt)},
      {"gt_all", std::to_string(c.clear_all.gt)},
  };
}

MetricReport evaluate_sequence(const std::string& name, const GtRecord& gts, const PredictionRecord& preds,
                               const EvalParams& params) {
  MetricReport r;
  r.name = name;
  EvalParams top1 = params;
  top1.k = 1;
  r.counts.topk_occl = topk_counts(gts, preds, params, true);
  r.counts.topk_all = topk_counts(gts, preds, params, false);
  r.counts.top1_occl = topk_counts(gts, preds, top1, true);
  r.counts.top1_all = topk_counts(gts, preds, top1, false);
  r.counts.id_occl = identity_counts(gts, preds, params, true);
  r.counts.id_all = identity_counts(gts, preds, params, false);
  r.counts.clear_occl = clear_counts(gts, preds, params, true);
  r.counts.clear_all = clear_counts(gts, preds, params, false);
  return r;
}

MetricReport aggregate(std::span<const MetricReport> reports) {
  MetricReport out;
  out.name = "aggregate";
  for (const MetricReport& r : reports) out.counts += r.counts;
  return out;
}

std::string format_table(std::span<const MetricReport> reports) {
  std::ostringstream os;
  char line[256];
  std::snprintf(line, sizeof line, "%-24s %8s %8s %8s %8s %8s %8s %8s %8s %8s\n", "sequence", "TkF1-o", "TkP-o",
                "TkR-o", "T1F1-o", "TkF1-a", "IDF1-o", "IDF1-a", "MOTA-o", "MOTA-a");
  os << line;
  auto pct = [](double v) { return fixed(100.0 * v, 1); };
  auto opt_pct = [&](const std::optional<double>& v) { return v ? pct(*v) : std::string("-"); };
  for (const MetricReport& r : reports) {
    std::snprintf(line, sizeof line, "%-24s %8s %8s %8s %8s %8s %8s %8s %8s %8s\n", r.name.c_str(),
                  pct(r.topk_f1_occl()).c_str(), pct(r.topk_prec_occl()).c_str(), pct(r.topk_rec_occl()).c_str(),
                  pct(r.top1_f1_occl()).c_str(), pct(r.topk_f1_all()).c_str(), pct(r.idf1_occl()).c_str(),
                  pct(r.idf1_all()).c_str(), opt_pct(r.mota_occl()).c_str(), opt_pct(r.mota_all()).c_str());
    os << line;
  }
  return os.str();
}

std::string format_key_values(std::span<const MetricReport> reports) {
  std::ostringstream os;
  for (const MetricReport& r : reports)
    for (const auto& [k, v] : r.entries()) os << r.name << '.' << k << '=' << v << '\n';
  return os.str();
}

}  // namespace ghosttrack
