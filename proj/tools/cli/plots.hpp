#pragma once

#include <string>
#include <vector>

namespace ghosttrack::cli {

struct CurvePoint {
  int n_age = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

std::string curvelet_csv(const std::vector<CurvePoint>& points);
std::string curvelet_svg(const std::vector<CurvePoint>& points);

/// One reported person seen from above: ground position and its 2x2 covariance.
struct TopdownSample {
  int frame = 0;
  int id = 0;
  bool occluded = false;
  double x = 0.0;
  double z = 0.0;
  double var_x = 0.0;
  double cov_xz = 0.0;
  double var_z = 0.0;
};

struct Ellipse {
  double major = 0.0;  // 2-sigma semi-axes
  double minor = 0.0;
  double angle_deg = 0.0;
};

Ellipse covariance_ellipse(double var_x, double cov_xz, double var_z);

std::string topdown_csv(const std::vector<TopdownSample>& samples);
std::string topdown_svg(const std::vector<TopdownSample>& samples);

}  // namespace ghosttrack::cli
