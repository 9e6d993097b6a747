#include "plots.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <sstream>

namespace ghosttrack::cli {

namespace {

std::string f3(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string f6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};

}  // namespace

std::string curvelet_csv(const std::vector<CurvePoint>& points) {
  std::ostringstream os;
  os << "n_age,precision,recall,f1\n";
  for (const CurvePoint& p : points) os << p.n_age << ',' << f6(p.precision) << ',' << f6(p.recall) << ',' << f6(p.f1) << '\n';
  return os.str();
}

std::string curvelet_svg(const std::vector<CurvePoint>& points) {
  constexpr double kSize = 400.0;
  constexpr double kMargin = 50.0;
  auto sx = [](double r) { return kMargin + r * kSize; };
  auto sy = [](double p) { return kMargin + (1.0 - p) * kSize; };
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"500\" height=\"500\" viewBox=\"0 0 500 500\">\n";
  os << "<rect x=\"" << f3(kMargin) << "\" y=\"" << f3(kMargin) << "\" width=\"" << f3(kSize) << "\" height=\"" << f3(kSize)
     << "\" fill=\"none\" stroke=\"#444\"/>\n";
  os << "<text x=\"250\" y=\"490\" text-anchor=\"middle\" font-size=\"14\">occluded recall</text>\n";
  os << "<text x=\"15\" y=\"250\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 15 250)\">occluded precision</text>\n";
  os << "<polyline class=\"curvelet\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\"";
  for (std::size_t i = 0; i < points.size(); ++i)
    os << (i ? " " : "") << f3(sx(points[i].recall)) << ',' << f3(sy(points[i].precision));
  os << "\"/>\n";
  for (const CurvePoint& p : points) {
    os << "<circle cx=\"" << f3(sx(p.recall)) << "\" cy=\"" << f3(sy(p.precision)) << "\" r=\"3\" fill=\"#1f77b4\"/>\n";
    os << "<text x=\"" << f3(sx(p.recall) + 5.0) << "\" y=\"" << f3(sy(p.precision) - 5.0)
       << "\" font-size=\"11\">N=" << p.n_age << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

Ellipse covariance_ellipse(double var_x, double cov_xz, double var_z) {
  const double tr = var_x + var_z;
  const double det = var_x * var_z - cov_xz * cov_xz;
  const double disc = std::sqrt(std::max(0.0, 0.25 * tr * tr - det));
  const double l1 = std::max(0.0, 0.5 * tr + disc);
  const double l2 = std::max(0.0, 0.5 * tr - disc);
  Ellipse e;
  e.major = 2.0 * std::sqrt(l1);
  e.minor = 2.0 * std::sqrt(l2);
  e.angle_deg = 0.5 * std::atan2(2.0 * cov_xz, var_x - var_z) * 180.0 / std::numbers::pi;
  return e;
}

std::string topdown_csv(const std::vector<TopdownSample>& samples) {
  std::ostringstream os;
  os << "frame,id,occluded,x,z,var_x,cov_xz,var_z,major,minor,angle_deg\n";
  for (const TopdownSample& s : samples) {
    const Ellipse e = covariance_ellipse(s.var_x, s.cov_xz, s.var_z);
    os << s.frame << ',' << s.id << ',' << (s.occluded ? 1 : 0) << ',' << f6(s.x) << ',' << f6(s.z) << ','
       << f6(s.var_x) << ',' << f6(s.cov_xz) << ',' << f6(s.var_z) << ',' << f6(e.major) << ',' << f6(e.minor)
       << ',' << f6(e.angle_deg) << '\n';
  }
  return os.str();
}

std::string topdown_svg(const std::vector<TopdownSample>& samples) {
  double x0 = -1.0, x1 = 1.0, z0 = 0.0, z1 = 1.0;
  if (!samples.empty()) {
    x0 = z0 = 1e300;
    x1 = z1 = -1e300;
    for (const TopdownSample& s : samples) {
      x0 = std::min(x0, s.x);
      x1 = std::max(x1, s.x);
      z0 = std::min(z0, s.z);
      z1 = std::max(z1, s.z);
    }
    const double pad = 0.1 * std::max({x1 - x0, z1 - z0, 1.0});
    x0 -= pad;
    x1 += pad;
    z0 = std::max(0.0, z0 - pad);
    z1 += pad;
  }
  constexpr double kSize = 500.0;
  const double scale = kSize / std::max(x1 - x0, z1 - z0);
  auto px = [&](double x) { return 20.0 + (x - x0) * scale; };
  auto pz = [&](double z) { return 20.0 + (z1 - z) * scale; };

  std::map<int, std::vector<const TopdownSample*>> by_id;
  for (const TopdownSample& s : samples) by_id[s.id].push_back(&s);

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"540\" height=\"540\" viewBox=\"0 0 540 540\">\n";
  std::size_t color = 0;
  for (const auto& [id, list] : by_id) {
    const char* c = kPalette[color++ % std::size(kPalette)];
    os << "<g class=\"track\" data-id=\"" << id << "\" stroke=\"" << c << "\" fill=\"none\">\n";
    os << "<polyline points=\"";
    for (std::size_t i = 0; i < list.size(); ++i) os << (i ? " " : "") << f3(px(list[i]->x)) << ',' << f3(pz(list[i]->z));
    os << "\"/>\n";
    for (const TopdownSample* s : list) {
      if (!s->occluded) continue;
      // Screen z grows downward, which flips the sense of rotation.
      const Ellipse e = covariance_ellipse(s->var_x, s->cov_xz, s->var_z);
      os << "<ellipse cx=\"" << f3(px(s->x)) << "\" cy=\"" << f3(pz(s->z)) << "\" rx=\"" << f3(e.major * scale)
         << "\" ry=\"" << f3(e.minor * scale) << "\" transform=\"rotate(" << f3(-e.angle_deg) << ' ' << f3(px(s->x))
         << ' ' << f3(pz(s->z)) << ")\" stroke-opacity=\"0.4\"/>\n";
    }
    os << "</g>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace ghosttrack::cli
