#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "ghosttrack/association.hpp"
#include "ghosttrack/kalman.hpp"

namespace ghosttrack {

enum class HypothesisMode {
  Auto,      // state sampling when freespace reasoning is active, else baseline Gaussian
  State,     // sample_topk
  Baseline,  // baseline_gauss
};

enum class MatchingMode { Optimal, Greedy };

/// All tunables. Stored on disk as flat `key = value` lines.
struct Config {
  // evaluation
  double alpha_iou = 0.5;
  int k = 5;
  double v_thresh = 0.10;
  MatchingMode matching = MatchingMode::Optimal;

  // lifecycle
  int n_age = 30;
  int n_init = 3;

  // freespace
  double alpha_supp = 1.06;
  double alpha_delete = 0.88;

  // filter
  double f_process = 900.0;
  double f_observation = 600.0;
  double sigma_gamma = 0.01;
  double velocity_noise_ratio = 0.125;
  /// Focal length in pixels; <= 0 means "use the image width".
  double focal = 0.0;
  int depth_window = 15;

  // association
  double min_iou = 0.3;
  double max_appearance_distance = 0.2;
  int gallery_size = 100;
  bool gate_gamma = true;
  double min_confidence = 0.0;

  // hypotheses
  double s_x = 0.25;
  double s_y = 0.10;
  HypothesisMode hypotheses = HypothesisMode::Auto;

  // components (each one is an ablation switch)
  bool forecast = true;     // report occluded forecasts
  bool egomotion = true;    // apply warps
  bool freespace = true;    // freespace suppression / deletion
  bool depth_noise = true;  // inverse-depth scaled noise instead of height scaled
  bool depth_disabled = false;

  // misc
  std::uint64_t seed = 0;
  int read_ahead = 8;

  /// Throws std::invalid_argument naming the first violated constraint.
  void validate() const;

  KalmanParams kalman_params(double focal_px) const;
  AssociationParams association_params(double focal_px) const;

  /// Apply one `key=value` override. Throws std::invalid_argument for unknown keys or bad values.
  void set(const std::string& key, const std::string& value);

  /// All keys with their current values, in a fixed order.
  std::vector<std::pair<std::string, std::string>> entries() const;

  /// Environment variable that overrides `seed` when set.
  static constexpr const char* kSeedEnv = "GHOSTTRACK_SEED";
  void apply_env();
};

/// Reads a flat key=value file (# comments, blank lines and [section] headers ignored).
Config load_config(const std::filesystem::path& path, Config base = {});
void save_config(const Config& cfg, const std::filesystem::path& path);
void print_config(const Config& cfg, std::ostream& os);

/// Parse `key=value` text lines into pairs. Throws ParseError with the line number.
std::vector<std::pair<std::string, std::string>> parse_key_values(std::istream& is,
                                                                  const std::string& origin);

}  // namespace ghosttrack
