#include "ghosttrack/hypotheses.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "ghosttrack/error.hpp"

namespace ghosttrack {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Symmetric square root of a 2x2 covariance; tiny negative eigenvalues are clipped.
Eigen::Matrix2d sqrt_psd(const Eigen::Matrix2d& cov) {
  if (!cov.allFinite()) throw NumericalError("sample_topk: non-finite covariance");
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(cov);
  if (es.info() != Eigen::Success) throw NumericalError("sample_topk: eigen decomposition failed");
  Eigen::Vector2d ev = es.eigenvalues();
  const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
  if (ev.minCoeff() < -1e-9 * scale) throw NumericalError("sample_topk: covariance is not positive semidefinite");
  ev = ev.cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal();
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  return splitmix64(splitmix64(splitmix64(seed) ^ a) ^ b);
}

HypothesisSet sample_topk(const TrackState& state, const DepthField* depth, int k, std::uint64_t seed,
                          double alpha_supp) {
  if (k < 1) throw std::invalid_argument("sample_topk: k must be at least 1");
  const BBox mean_box = state.box();
  HypothesisSet out;
  out.boxes.reserve(static_cast<size_t>(k));
  out.boxes.push_back(mean_box);
  if (k == 1) return out;

  const Eigen::Vector2d mu(state.mean[state_index::kX], state.gamma());
  const Eigen::Matrix2d a = sqrt_psd(state.xg_cov());
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  bool exhausted = false;
  for (int slot = 1; slot < k; ++slot) {
    if (exhausted) {
      out.boxes.push_back(mean_box);
      continue;
    }
    BBox chosen = mean_box;
    bool accepted = false;
    for (int attempt = 0; attempt < kMaxRejectionAttempts && !accepted; ++attempt) {
      const double n0 = normal(rng);
      const double n1 = normal(rng);
      const Eigen::Vector2d s = mu + a * Eigen::Vector2d(n0, n1);
      if (!(s[1] > 0.0)) continue;
      BBox candidate = mean_box;
      candidate.cx = s[0];
      if (depth != nullptr) {
        const double z = 1.0 / s[1];
        if (z < alpha_supp * horizon_depth(*depth, candidate)) continue;
      }
      chosen = candidate;
      accepted = true;
    }
    exhausted = !accepted;
    out.boxes.push_back(chosen);
  }
  return out;
}

HypothesisSet baseline_gauss(const BBox& box, double s_x, double s_y, int k, std::uint64_t seed) {
  if (k < 1) throw std::invalid_argument("baseline_gauss: k must be at least 1");
  if (s_x < 0.0 || s_y < 0.0) throw std::invalid_argument("baseline_gauss: negative spread");
  HypothesisSet out;
  out.boxes.reserve(static_cast<size_t>(k));
  out.boxes.push_back(box);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int i = 1; i < k; ++i) {
    BBox b = box;
    b.cx += s_x * box.height * normal(rng);
    b.cy += s_y * box.height * normal(rng);
    out.boxes.push_back(b);
  }
  return out;
}

}  // namespace ghosttrack
