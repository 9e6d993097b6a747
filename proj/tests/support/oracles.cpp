#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <set>
#include <stdexcept>

namespace gt_test {

Mat zeros(int rows, int cols) { return Mat(static_cast<size_t>(rows), std::vector<double>(static_cast<size_t>(cols), 0.0)); }

Mat identity(int n) {
  Mat m = zeros(n, n);
  for (int i = 0; i < n; ++i) m[i][i] = 1.0;
  return m;
}

Mat mul(const Mat& a, const Mat& b) {
  const size_t n = a.size(), k = b.size(), m = b.empty() ? 0 : b[0].size();
  Mat out(n, std::vector<double>(m, 0.0));
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < m; ++j) {
      double s = 0.0;
      for (size_t t = 0; t < k; ++t) s += a[i][t] * b[t][j];
      out[i][j] = s;
    }
  return out;
}

Mat transpose(const Mat& a) {
  if (a.empty()) return {};
  Mat out(a[0].size(), std::vector<double>(a.size()));
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < a[0].size(); ++j) out[j][i] = a[i][j];
  return out;
}

Mat add(const Mat& a, const Mat& b) {
  Mat out = a;
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < a[i].size(); ++j) out[i][j] += b[i][j];
  return out;
}

Mat sub(const Mat& a, const Mat& b) {
  Mat out = a;
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < a[i].size(); ++j) out[i][j] -= b[i][j];
  return out;
}

Mat inverse(Mat a) {
  const size_t n = a.size();
  Mat inv = identity(static_cast<int>(n));
  for (size_t c = 0; c < n; ++c) {
    size_t piv = c;
    for (size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    if (a[piv][c] == 0.0) throw std::runtime_error("inverse: singular");
    std::swap(a[piv], a[c]);
    std::swap(inv[piv], inv[c]);
    const double d = a[c][c];
    for (size_t j = 0; j < n; ++j) {
      a[c][j] /= d;
      inv[c][j] /= d;
    }
    for (size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = a[r][c];
      if (f == 0.0) continue;
      for (size_t j = 0; j < n; ++j) {
        a[r][j] -= f * a[c][j];
        inv[r][j] -= f * inv[c][j];
      }
    }
  }
  return inv;
}

// Index names for readability: x y g a h vx vy vg va vh.
enum { X, Y, G, A, H, VX, VY, VG, VA, VH };

DenseKalman DenseKalman::init(const ghosttrack::BBox& b, double gamma, const ghosttrack::KalmanParams& p) {
  DenseKalman k;
  k.mean = {b.cx, b.cy, gamma, b.aspect, b.height, 0, 0, 0, 0, 0};
  double pos, vel;
  if (p.noise == ghosttrack::NoiseModel::InverseDepth) {
    pos = p.f_observation * gamma;
    vel = 10.0 * pos;
  } else {
    pos = 2.0 * b.height / 20.0;
    vel = 10.0 * b.height / 160.0;
  }
  // Depth rate uncertainty: ten frames' worth of depth process noise.
  const double zdot = 10.0 * p.f_process / p.focal * gamma * gamma;
  const double sd[10] = {pos, pos, p.sigma_gamma, p.aspect_process_std, pos, vel, vel, zdot, p.aspect_rate_process_std, vel};
  for (int i = 0; i < 10; ++i) k.cov[i][i] = sd[i] * sd[i];
  return k;
}

void DenseKalman::predict(bool occluded, double gamma_hat, const ghosttrack::KalmanParams& p) {
  Mat f = identity(10);
  f[X][VX] = f[Y][VY] = f[G][VG] = 1.0;
  f[A][VA] = occluded ? 0.0 : 1.0;
  f[H][VH] = occluded ? 0.0 : 1.0;

  double pos, vel;
  if (p.noise == ghosttrack::NoiseModel::InverseDepth) {
    pos = p.f_process * gamma_hat;
    vel = p.velocity_noise_ratio * pos;
  } else {
    pos = mean[H] / 20.0;
    vel = mean[H] / 160.0;
  }
  const double g = p.f_process * gamma_hat * gamma_hat / p.focal;
  const double sd[10] = {pos, pos, g, p.aspect_process_std, pos, vel, vel, p.velocity_noise_ratio * g, p.aspect_rate_process_std, vel};
  Mat q = zeros(10, 10);
  for (int i = 0; i < 10; ++i) q[i][i] = sd[i] * sd[i];

  std::array<double, 10> m{};
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j) m[i] += f[i][j] * mean[j];
  mean = m;
  cov = add(mul(mul(f, cov), transpose(f)), q);
}

void DenseKalman::update(const ghosttrack::BBox& b, std::optional<double> gamma, const ghosttrack::KalmanParams& p) {
  std::vector<int> rows{X, Y};
  std::vector<double> z{b.cx, b.cy};
  if (gamma) {
    rows.push_back(G);
    z.push_back(*gamma);
  }
  rows.push_back(A);
  z.push_back(b.aspect);
  rows.push_back(H);
  z.push_back(b.height);
  const int d = static_cast<int>(rows.size());

  Mat h = zeros(d, 10);
  for (int i = 0; i < d; ++i) h[i][rows[i]] = 1.0;

  const double pos = p.noise == ghosttrack::NoiseModel::InverseDepth ? p.f_observation * std::max(mean[G], 1e-9)
                                                                     : mean[H] / 20.0;
  Mat r = zeros(d, d);
  for (int i = 0; i < d; ++i) {
    double sd = pos;
    if (rows[i] == G) sd = p.sigma_gamma;
    if (rows[i] == A) sd = p.aspect_obs_std;
    r[i][i] = sd * sd;
  }

  const Mat ht = transpose(h);
  const Mat s = add(mul(mul(h, cov), ht), r);
  const Mat k = mul(mul(cov, ht), inverse(s));
  std::vector<double> resid(d);
  for (int i = 0; i < d; ++i) resid[i] = z[i] - mean[rows[i]];
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < d; ++j) mean[i] += k[i][j] * resid[j];
  cov = mul(sub(identity(10), mul(k, h)), cov);
  mean[G] = std::max(mean[G], 1e-9);  // inverse depth stays positive
}

ghosttrack::Assignment brute_force_assignment(const ghosttrack::CostMatrix& c) {
  const int n = std::max(c.rows(), c.cols());
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  ghosttrack::Assignment best;
  double best_cost = 0.0;
  bool have = false;
  do {
    ghosttrack::Assignment cur;
    double cost = 0.0;
    for (int r = 0; r < c.rows(); ++r) {
      const int col = perm[r];
      if (col >= c.cols() || c.gated(r, col)) continue;
      cur.emplace_back(r, col);
      cost += c(r, col);
    }
    bool better = !have || cur.size() > best.size();
    if (have && cur.size() == best.size()) better = cost < best_cost || (cost == best_cost && cur < best);
    if (better) {
      best = cur;
      best_cost = cost;
      have = true;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

BruteMatch brute_force_frame_match(const std::vector<ghosttrack::GtBox>& gts,
                                   const std::vector<ghosttrack::PredEntry>& preds, double alpha, int k,
                                   double prefer_occluded_below) {
  std::vector<int> gi(gts.size()), pi(preds.size());
  std::iota(gi.begin(), gi.end(), 0);
  std::iota(pi.begin(), pi.end(), 0);
  std::stable_sort(gi.begin(), gi.end(), [&](int a, int b) { return gts[a].id < gts[b].id; });
  std::stable_sort(pi.begin(), pi.end(), [&](int a, int b) { return preds[a].id < preds[b].id; });

  auto overlap = [&](int r, int c) { return plain_iou_max(gts[gi[r]].box, preds[pi[c]].hypotheses, k); };
  auto occluded = [&](int r) {
    return prefer_occluded_below >= 0.0 && gts[gi[r]].visibility < prefer_occluded_below;
  };

  struct Cand {
    std::vector<std::pair<int, int>> ranks;
    double total = 0.0;
    int occl = 0;
  };
  std::vector<Cand> all;
  std::vector<char> used(preds.size(), 0);
  Cand cur;
  std::function<void(int)> rec = [&](int r) {
    if (r == static_cast<int>(gts.size())) {
      all.push_back(cur);
      return;
    }
    rec(r + 1);
    for (int c = 0; c < static_cast<int>(preds.size()); ++c) {
      if (used[c]) continue;
      const double o = overlap(r, c);
      if (o < alpha) continue;
      used[c] = 1;
      cur.ranks.emplace_back(r, c);
      cur.total += o;
      cur.occl += occluded(r) ? 1 : 0;
      rec(r + 1);
      cur.occl -= occluded(r) ? 1 : 0;
      cur.total -= o;
      cur.ranks.pop_back();
      used[c] = 0;
    }
  };
  rec(0);

  auto key_better = [](const Cand& a, const Cand& b) {
    if (a.ranks.size() != b.ranks.size()) return a.ranks.size() > b.ranks.size();
    if (a.occl != b.occl) return a.occl > b.occl;
    if (a.total != b.total) return a.total > b.total;
    return a.ranks < b.ranks;
  };
  const Cand* best = &all.front();
  for (const Cand& c : all)
    if (key_better(c, *best)) best = &c;

  BruteMatch out;
  for (const Cand& c : all) {
    if (&c == best) continue;
    if (c.ranks.size() == best->ranks.size() && c.occl == best->occl && std::abs(c.total - best->total) < 1e-9)
      out.unique = false;
  }
  for (const auto& [r, c] : best->ranks) out.pairs.emplace_back(gi[r], pi[c]);
  std::sort(out.pairs.begin(), out.pairs.end());
  out.total_overlap = best->total;
  out.occluded_pairs = best->occl;
  return out;
}

double plain_iou(const ghosttrack::BBox& a, const ghosttrack::BBox& b) {
  const double aw = a.aspect * a.height, bw = b.aspect * b.height;
  const double ax0 = a.cx - aw / 2, ax1 = a.cx + aw / 2, ay0 = a.cy - a.height / 2, ay1 = a.cy + a.height / 2;
  const double bx0 = b.cx - bw / 2, bx1 = b.cx + bw / 2, by0 = b.cy - b.height / 2, by1 = b.cy + b.height / 2;
  const double iw = std::max(0.0, std::min(ax1, bx1) - std::max(ax0, bx0));
  const double ih = std::max(0.0, std::min(ay1, by1) - std::max(ay0, by0));
  const double inter = iw * ih;
  const double uni = aw * a.height + bw * b.height - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

double plain_iou_max(const ghosttrack::BBox& gt, const ghosttrack::HypothesisSet& h, int k) {
  double best = 0.0;
  for (size_t i = 0; i < h.boxes.size() && static_cast<int>(i) < k; ++i) best = std::max(best, plain_iou(gt, h.boxes[i]));
  return best;
}

double PlainCounts::f1() const {
  const double denom = 2.0 * tp + fp + fn;
  return denom == 0.0 ? 0.0 : 2.0 * tp / denom;
}

PlainCounts plain_detection_counts(const ghosttrack::GtRecord& gts, const ghosttrack::PredictionRecord& preds,
                                   double alpha) {
  PlainCounts out;
  std::set<int> frames;
  for (const auto& kv : gts) frames.insert(kv.first);
  for (const auto& kv : preds) frames.insert(kv.first);
  static const std::vector<ghosttrack::GtBox> no_gt;
  static const std::vector<ghosttrack::PredEntry> no_pred;
  for (int f : frames) {
    const auto gi = gts.find(f);
    const auto pi = preds.find(f);
    const auto& g = gi == gts.end() ? no_gt : gi->second;
    const auto& p = pi == preds.end() ? no_pred : pi->second;
    std::vector<std::vector<int>> adj(g.size());
    for (size_t i = 0; i < g.size(); ++i)
      for (size_t j = 0; j < p.size(); ++j)
        if (plain_iou(g[i].box, p[j].hypotheses.boxes.front()) >= alpha) adj[i].push_back(static_cast<int>(j));
    std::vector<int> owner(p.size(), -1);
    long matched = 0;
    for (size_t i = 0; i < g.size(); ++i) {
      std::vector<char> seen(p.size(), 0);
      std::function<bool(int)> augment = [&](int u) {
        for (int v : adj[u]) {
          if (seen[v]) continue;
          seen[v] = 1;
          if (owner[v] < 0 || augment(owner[v])) {
            owner[v] = u;
            return true;
          }
        }
        return false;
      };
      if (augment(static_cast<int>(i))) ++matched;
    }
    out.tp += matched;
    out.fp += static_cast<long>(p.size()) - matched;
    out.fn += static_cast<long>(g.size()) - matched;
  }
  return out;
}

}  // namespace gt_test
