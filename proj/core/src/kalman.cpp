#include "ghosttrack/kalman.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Cholesky>

#include "ghosttrack/error.hpp"

namespace ghosttrack {

namespace si = state_index;

namespace {

// Rows of the state observed by a measurement, in measurement order.
constexpr std::array<int, 5> kObservedWithGamma{si::kX, si::kY, si::kGamma, si::kAspect, si::kHeight};
constexpr std::array<int, 4> kObservedNoGamma{si::kX, si::kY, si::kAspect, si::kHeight};

std::vector<int> observed_rows(const Measurement& m) {
  if (m.gamma) return {kObservedWithGamma.begin(), kObservedWithGamma.end()};
  return {kObservedNoGamma.begin(), kObservedNoGamma.end()};
}

// Depth noise implied by an image-space noise of f_process * gamma: sigma_Z = f_process / f,
// and d(1/Z) = -dZ / Z^2.
double gamma_process_std(double gamma_hat, const KalmanParams& p) {
  return p.f_process / p.focal * gamma_hat * gamma_hat;
}

void symmetrize(StateMatrix& m) { m = 0.5 * (m + m.transpose()).eval(); }

Eigen::MatrixXd observation_noise(const TrackState& s, const Measurement& m, const KalmanParams& p) {
  const double gamma = std::max(s.gamma(), kMinGamma);
  const double pos = p.noise == NoiseModel::InverseDepth ? p.f_observation * gamma
                                                         : p.height_weight_position * s.mean[si::kHeight];
  std::vector<double> stds{pos, pos};
  if (m.gamma) stds.push_back(p.sigma_gamma);
  stds.push_back(p.aspect_obs_std);
  stds.push_back(pos);
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(static_cast<long>(stds.size()), static_cast<long>(stds.size()));
  for (size_t i = 0; i < stds.size(); ++i) r(static_cast<long>(i), static_cast<long>(i)) = stds[i] * stds[i];
  return r;
}

}  // namespace

BBox TrackState::box() const {
  return BBox{mean[si::kX], mean[si::kY], mean[si::kAspect], mean[si::kHeight]};
}

Eigen::Matrix2d TrackState::xg_cov() const {
  Eigen::Matrix2d m;
  m << cov(si::kX, si::kX), cov(si::kX, si::kGamma), cov(si::kGamma, si::kX), cov(si::kGamma, si::kGamma);
  return m;
}

Eigen::VectorXd Measurement::vector() const {
  Eigen::VectorXd z(dim());
  if (gamma)
    z << box.cx, box.cy, *gamma, box.aspect, box.height;
  else
    z << box.cx, box.cy, box.aspect, box.height;
  return z;
}

TrackState init_state(const BBox& det, double gamma_obs, const KalmanParams& p) {
  if (!det.valid()) throw std::invalid_argument("init_state: invalid box");
  if (!(gamma_obs > 0.0) || !std::isfinite(gamma_obs))
    throw std::invalid_argument("init_state: inverse depth must be positive");

  TrackState s;
  s.mean.setZero();
  s.mean[si::kX] = det.cx;
  s.mean[si::kY] = det.cy;
  s.mean[si::kGamma] = gamma_obs;
  s.mean[si::kAspect] = det.aspect;
  s.mean[si::kHeight] = det.height;

  double pos = 0.0;
  double vel = 0.0;
  if (p.noise == NoiseModel::InverseDepth) {
    pos = p.f_observation * gamma_obs;
    vel = 10.0 * pos;
  } else {
    pos = 2.0 * p.height_weight_position * det.height;
    vel = 10.0 * p.height_weight_velocity * det.height;
  }
  StateVector std;
  std[si::kX] = pos;
  std[si::kY] = pos;
  std[si::kGamma] = p.sigma_gamma;
  std[si::kAspect] = p.aspect_process_std;
  std[si::kHeight] = pos;
  std[si::kVelX] = vel;
  std[si::kVelY] = vel;
  std[si::kVelGamma] = 10.0 * gamma_process_std(gamma_obs, p);
  std[si::kVelAspect] = p.aspect_rate_process_std;
  std[si::kVelHeight] = vel;
  s.cov = std.array().square().matrix().asDiagonal();
  return s;
}

TrackState predict(const TrackState& s, bool occluded, double gamma_hat, const KalmanParams& p) {
  if (!(gamma_hat > 0.0)) throw std::invalid_argument("predict: gamma_hat must be positive");

  StateMatrix f = StateMatrix::Identity();
  f(si::kX, si::kVelX) = 1.0;
  f(si::kY, si::kVelY) = 1.0;
  f(si::kGamma, si::kVelGamma) = 1.0;
  // An occluded person is treated as a point: aspect and height are frozen.
  f(si::kAspect, si::kVelAspect) = occluded ? 0.0 : 1.0;
  f(si::kHeight, si::kVelHeight) = occluded ? 0.0 : 1.0;

  double pos = 0.0;
  double vel = 0.0;
  if (p.noise == NoiseModel::InverseDepth) {
    pos = p.f_process * gamma_hat;
    vel = p.velocity_noise_ratio * pos;
  } else {
    pos = p.height_weight_position * s.mean[si::kHeight];
    vel = p.height_weight_velocity * s.mean[si::kHeight];
  }
  const double g = gamma_process_std(gamma_hat, p);
  StateVector std;
  std[si::kX] = pos;
  std[si::kY] = pos;
  std[si::kGamma] = g;
  std[si::kAspect] = p.aspect_process_std;
  std[si::kHeight] = pos;
  std[si::kVelX] = vel;
  std[si::kVelY] = vel;
  std[si::kVelGamma] = p.velocity_noise_ratio * g;
  std[si::kVelAspect] = p.aspect_rate_process_std;
  std[si::kVelHeight] = vel;

  TrackState out;
  out.mean = f * s.mean;
  out.cov = f * s.cov * f.transpose();
  out.cov.diagonal() += std.array().square().matrix();
  symmetrize(out.cov);
  return out;
}

Innovation innovation(const TrackState& s, const Measurement& m, const KalmanParams& p) {
  const auto rows = observed_rows(m);
  const long d = static_cast<long>(rows.size());
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(d, kStateDim);
  for (long i = 0; i < d; ++i) h(i, rows[static_cast<size_t>(i)]) = 1.0;
  Innovation inn;
  inn.residual = m.vector() - h * s.mean;
  inn.cov = h * s.cov * h.transpose() + observation_noise(s, m, p);
  return inn;
}

TrackState update(const TrackState& s, const Measurement& m, const KalmanParams& p) {
  if (!m.box.valid()) throw std::invalid_argument("update: invalid measurement box");
  if (m.gamma && !(*m.gamma > 0.0)) throw std::invalid_argument("update: measured inverse depth must be positive");

  const auto rows = observed_rows(m);
  const long d = static_cast<long>(rows.size());
  const Innovation inn = innovation(s, m, p);

  // P H^T is just the observed columns of P.
  Eigen::MatrixXd pht(kStateDim, d);
  for (long i = 0; i < d; ++i) pht.col(i) = s.cov.col(rows[static_cast<size_t>(i)]);

  Eigen::LLT<Eigen::MatrixXd> llt(inn.cov);
  if (llt.info() != Eigen::Success) throw NumericalError("update: innovation covariance is not positive definite");
  // K = P H^T S^-1, computed as (S^-1 H P)^T.
  const Eigen::MatrixXd gain = llt.solve(pht.transpose()).transpose();

  TrackState out;
  out.mean = s.mean + gain * inn.residual;
  StateMatrix kh = StateMatrix::Zero();
  for (long i = 0; i < d; ++i) kh.col(rows[static_cast<size_t>(i)]) = gain.col(i);
  out.cov = (StateMatrix::Identity() - kh) * s.cov;
  symmetrize(out.cov);
  out.mean[si::kGamma] = std::max(out.mean[si::kGamma], kMinGamma);
  return out;
}

double squared_mahalanobis(const Eigen::VectorXd& residual, const Eigen::MatrixXd& cov) {
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) throw NumericalError("mahalanobis: covariance is not positive definite");
  const Eigen::VectorXd w = llt.matrixL().solve(residual);
  return w.squaredNorm();
}

double mahalanobis(const TrackState& s, const Measurement& m, const KalmanParams& p) {
  const Innovation inn = innovation(s, m, p);
  return squared_mahalanobis(inn.residual, inn.cov);
}

double chi2_95(int dof) {
  static constexpr std::array<double, 9> kTable{3.8415, 5.9915, 7.8147, 9.4877, 11.070,
                                                12.592, 14.067, 15.507, 16.919};
  if (dof < 1 || dof > 9) throw std::invalid_argument("chi2_95: dof out of range");
  return kTable[static_cast<size_t>(dof - 1)];
}

double aggregate_depth(std::span<const double> history, std::size_t window) {
  if (history.empty()) throw std::invalid_argument("aggregate_depth: empty history");
  const std::size_t n = std::min(std::max<std::size_t>(window, 1), history.size());
  std::vector<double> recent(history.end() - static_cast<long>(n), history.end());
  const auto mid = recent.begin() + static_cast<long>((n - 1) / 2);
  std::nth_element(recent.begin(), mid, recent.end());
  return *mid;
}

void DepthHistory::push(double gamma) {
  values_.push_back(gamma);
  while (values_.size() > capacity_) values_.pop_front();
}

double DepthHistory::aggregate() const {
  const std::vector<double> v(values_.begin(), values_.end());
  return aggregate_depth(v, capacity_);
}

}  // namespace ghosttrack
