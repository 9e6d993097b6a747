#include "ghosttrack/scenarios.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace ghosttrack::scenarios {

namespace {

constexpr double kPersonHeight = 1.7;
constexpr double kPersonAspect = 0.41;

// Tracker noise scales matched to a 500 px focal length and metric depth.
const std::vector<std::pair<std::string, std::string>> kMetricOverrides{
    {"f_process", "10"},
    {"f_observation", "16"},
};

WalkerSpec walker(double x, double z, double vx, double vz, double camera_height) {
  WalkerSpec w;
  w.start = Cylinder3D{x, camera_height - 0.5 * kPersonHeight, z, kPersonHeight, kPersonAspect};
  w.velocity = Eigen::Vector3d(vx, 0.0, vz);
  return w;
}

Occluder wall(double x0, double x1, double z, double depth, double top, double ground) {
  return Occluder{Eigen::Vector3d(x0, top, z), Eigen::Vector3d(x1, ground, z + depth)};
}

}  // namespace

Scenario single_walker_occlusion() {
  Scenario sc;
  sc.name = "single-walker";
  sc.frames = 80;
  sc.seed = 7;
  sc.detector.noise_px = 0.0;
  sc.detector.miss_rate = 0.0;
  sc.detector.feature_noise = 0.0;
  sc.walkers.push_back(walker(-2.2, 8.0, 0.064, 0.0, sc.camera_height));
  sc.occluders.push_back(wall(-0.05, 0.62, 4.0, 0.2, -1.0, sc.camera_height));
  sc.tracker_overrides = kMetricOverrides;
  return sc;
}

Scenario benchmark(std::uint64_t seed) {
  Scenario sc;
  sc.name = "benchmark-" + std::to_string(seed);
  sc.frames = 300;
  sc.seed = seed;
  sc.detector.noise_px = 2.0;
  sc.detector.miss_rate = 0.05;
  sc.tracker_overrides = kMetricOverrides;

  std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ULL + 11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double half_fov = sc.camera.px / sc.camera.focal;  // X / Z at the image edge

  for (int i = 0; i < 5; ++i) {
    const double z = 6.0 + 6.0 * u(rng);
    const double speed = 0.05 + 0.04 * u(rng);
    const bool rightward = u(rng) < 0.5;
    const double vz = (u(rng) - 0.5) * 0.01;
    const int enter = 1 + 50 * i + static_cast<int>(30.0 * u(rng));
    // Start just outside the image so the walker crosses the edge at frame `enter`.
    const double edge = half_fov * z + 0.5;
    const double vx = rightward ? speed : -speed;
    const double x0 = (rightward ? -edge : edge) - vx * (enter - 1);
    sc.walkers.push_back(walker(x0, z, vx, vz, sc.camera_height));
  }
  const double slots[3] = {-0.5, 0.0, 0.5};
  for (double s : slots) {
    const double z = 3.0 + 1.5 * u(rng);
    const double width = 0.35 + 0.35 * u(rng);
    const double cx = (s + 0.1 * (u(rng) - 0.5)) * half_fov * z;
    sc.occluders.push_back(wall(cx - 0.5 * width, cx + 0.5 * width, z, 0.3, -0.6, sc.camera_height));
  }
  return sc;
}

Scenario panning(std::uint64_t seed) {
  Scenario sc = benchmark(seed);
  sc.name = "panning-" + std::to_string(seed);
  constexpr double kAmplitude = 30.0;
  constexpr double kPeriod = 60.0;
  sc.pan.resize(static_cast<std::size_t>(sc.frames));
  for (int f = 1; f <= sc.frames; ++f)
    sc.pan[static_cast<std::size_t>(f - 1)] = kAmplitude * std::sin(2.0 * std::numbers::pi * (f - 1) / kPeriod);
  return sc;
}

Scenario linear_walkers(std::uint64_t seed) {
  Scenario sc;
  sc.name = "linear-" + std::to_string(seed);
  sc.frames = 150;
  sc.seed = seed;
  sc.detector.noise_px = 0.0;
  sc.detector.miss_rate = 0.0;
  sc.detector.feature_noise = 0.0;
  sc.tracker_overrides = kMetricOverrides;

  std::mt19937_64 rng(seed * 0xbf58476d1ce4e5b9ULL + 3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const CameraModel& cam = sc.camera;
  auto to_world = [&](double image_x, double z) { return (image_x - cam.px) * z / cam.focal; };
  // Two pillars a third of the way in from each side.
  for (double image_x : {213.0, 427.0}) {
    const double x = to_world(image_x, 4.0);
    sc.occluders.push_back(wall(x - 0.25, x + 0.25, 4.0, 0.2, -1.0, sc.camera_height));
  }
  // Lateral motion at constant depth keeps every image trajectory linear, and every walker
  // stays in view from the first frame to the last.
  struct Plan {
    double z, image_x, px_per_frame;
  };
  const Plan plans[] = {{8.0, 60.0, 3.5}, {10.0, 590.0, -3.4}, {12.0, 120.0, 2.7}};
  for (const Plan& p : plans) {
    const double x0 = p.image_x + 10.0 * u(rng);
    const double speed = p.px_per_frame + 0.2 * u(rng);
    sc.walkers.push_back(walker(to_world(x0, p.z), p.z, speed * p.z / cam.focal, 0.0, sc.camera_height));
  }
  // Starts half hidden beside the first pillar and slips behind it early on.
  sc.walkers.push_back(walker(to_world(174.0, 9.0), 9.0, 1.5 * 9.0 / cam.focal, 0.0, sc.camera_height));
  return sc;
}

Scenario demo() {
  Scenario sc;
  sc.name = "demo";
  sc.width = 320;
  sc.height = 180;
  sc.camera = CameraModel{250.0, 160.0, 90.0};
  sc.frames = 60;
  sc.seed = 3;
  sc.detector.noise_px = 1.0;
  sc.tracker_overrides = {{"f_process", "5"}, {"f_observation", "8"}};
  sc.walkers.push_back(walker(-3.0, 7.0, 0.08, 0.0, sc.camera_height));
  sc.walkers.push_back(walker(3.0, 10.0, -0.07, 0.0, sc.camera_height));
  sc.occluders.push_back(wall(-0.4, 0.6, 4.0, 0.2, -1.0, sc.camera_height));
  return sc;
}

std::vector<std::string> names() { return {"demo", "single", "benchmark:<seed>", "panning:<seed>", "linear:<seed>"}; }

Scenario by_name(const std::string& name) {
  if (name == "demo") return demo();
  if (name == "single") return single_walker_occlusion();
  const auto colon = name.find(':');
  const std::string kind = name.substr(0, colon);
  std::uint64_t seed = 1;
  if (colon != std::string::npos) {
    try {
      std::size_t used = 0;
      seed = std::stoull(name.substr(colon + 1), &used);
      if (used != name.size() - colon - 1) throw std::invalid_argument(name);
    } catch (const std::logic_error&) {
      throw std::invalid_argument("unknown scenario '" + name + "'");
    }
  }
  if (kind == "benchmark") return benchmark(seed);
  if (kind == "panning") return panning(seed);
  if (kind == "linear") return linear_walkers(seed);
  throw std::invalid_argument("unknown scenario '" + name + "'");
}

}  // namespace ghosttrack::scenarios
