#pragma once

#include <cstddef>
#include <deque>
#include <optional>
#include <span>

#include <Eigen/Core>

#include "ghosttrack/geometry.hpp"

namespace ghosttrack {

inline constexpr int kStateDim = 10;
inline constexpr int kMeasurementDim = 5;

using StateVector = Eigen::Matrix<double, kStateDim, 1>;
using StateMatrix = Eigen::Matrix<double, kStateDim, kStateDim>;

/// Layout of the filter state: image position, inverse depth, aspect, height, then rates.
namespace state_index {
inline constexpr int kX = 0;
inline constexpr int kY = 1;
inline constexpr int kGamma = 2;
inline constexpr int kAspect = 3;
inline constexpr int kHeight = 4;
inline constexpr int kVelX = 5;
inline constexpr int kVelY = 6;
inline constexpr int kVelGamma = 7;
inline constexpr int kVelAspect = 8;
inline constexpr int kVelHeight = 9;
}  // namespace state_index

/// Smallest inverse depth the filter will hold.
inline constexpr double kMinGamma = 1e-9;

struct TrackState {
  StateVector mean = StateVector::Zero();
  StateMatrix cov = StateMatrix::Identity();

  BBox box() const;
  double gamma() const { return mean[state_index::kGamma]; }
  /// Marginal covariance of (x, gamma).
  Eigen::Matrix2d xg_cov() const;
};

/// Box observation with an optional inverse-depth reading. Without gamma the
/// measurement is four-dimensional.
struct Measurement {
  BBox box;
  std::optional<double> gamma;

  int dim() const { return gamma ? 5 : 4; }
  Eigen::VectorXd vector() const;
};

enum class NoiseModel {
  InverseDepth,  // stds proportional to f * gamma
  Height,        // stds proportional to box height (base tracker)
};

struct KalmanParams {
  NoiseModel noise = NoiseModel::InverseDepth;
  double f_process = 900.0;
  double f_observation = 600.0;
  /// Observation std of inverse depth.
  double sigma_gamma = 1e-2;
  /// Camera focal length in pixels; converts image-space process noise into depth noise.
  double focal = 1000.0;
  /// Rate process std as a fraction of the matching position std.
  double velocity_noise_ratio = 0.125;
  double aspect_process_std = 1e-2;
  double aspect_rate_process_std = 1e-5;
  double aspect_obs_std = 1e-1;
  /// Base-tracker weights for NoiseModel::Height.
  double height_weight_position = 1.0 / 20.0;
  double height_weight_velocity = 1.0 / 160.0;
};

/// Throws std::invalid_argument for an invalid box or gamma_obs <= 0.
TrackState init_state(const BBox& det, double gamma_obs, const KalmanParams& params);

/// Constant-velocity prediction. When occluded, aspect and height are held fixed.
/// gamma_hat scales the process noise under NoiseModel::InverseDepth.
TrackState predict(const TrackState& s, bool occluded, double gamma_hat, const KalmanParams& params);

/// Linear-Gaussian posterior. Throws NumericalError on a singular innovation covariance.
TrackState update(const TrackState& s, const Measurement& m, const KalmanParams& params);

struct Innovation {
  Eigen::VectorXd residual;
  Eigen::MatrixXd cov;
};

/// Residual and covariance of m under the predicted measurement distribution.
Innovation innovation(const TrackState& s, const Measurement& m, const KalmanParams& params);

/// r^T S^-1 r. Throws NumericalError when S is not positive definite.
double squared_mahalanobis(const Eigen::VectorXd& residual, const Eigen::MatrixXd& cov);

double mahalanobis(const TrackState& s, const Measurement& m, const KalmanParams& params);

/// Chi-square 0.95 quantile for 1..9 degrees of freedom.
double chi2_95(int dof);

/// Median of the last `window` entries (lower median for even counts).
/// Throws std::invalid_argument on an empty history.
double aggregate_depth(std::span<const double> history, std::size_t window = 15);

/// Bounded ring of inverse-depth readings feeding aggregate_depth.
class DepthHistory {
 public:
  explicit DepthHistory(std::size_t capacity = 15) : capacity_(capacity == 0 ? 1 : capacity) {}

  void push(double gamma);
  bool empty() const { return values_.empty(); }
  std::size_t size() const { return values_.size(); }
  double aggregate() const;

 private:
  std::size_t capacity_;
  std::deque<double> values_;
};

}  // namespace ghosttrack
