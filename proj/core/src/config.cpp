#include "ghosttrack/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "ghosttrack/error.hpp"

namespace ghosttrack {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

double parse_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out))
    throw std::invalid_argument("config: '" + key + "' expects a finite number, got '" + v + "'");
  return out;
}

template <class Int>
Int parse_int(const std::string& key, const std::string& v) {
  Int out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw std::invalid_argument("config: '" + key + "' expects an integer, got '" + v + "'");
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  const std::string s = lower(v);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw std::invalid_argument("config: '" + key + "' expects a boolean, got '" + v + "'");
}

std::string fmt_double(double d) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, d);
  return std::string(buf, ptr);
}

std::string fmt_bool(bool b) { return b ? "true" : "false"; }

const char* hypotheses_name(HypothesisMode m) {
  switch (m) {
    case HypothesisMode::State: return "state";
    case HypothesisMode::Baseline: return "baseline";
    default: return "auto";
  }
}

struct Field {
  std::function<void(Config&, const std::string&, const std::string&)> set;
  std::function<std::string(const Config&)> get;
};

#define GT_DOUBLE(name) \
  {#name, {[](Config& c, const std::string& k, const std::string& v) { c.name = parse_double(k, v); }, \
           [](const Config& c) { return fmt_double(c.name); }}}
#define GT_INT(name) \
  {#name, {[](Config& c, const std::string& k, const std::string& v) { c.name = parse_int<int>(k, v); }, \
           [](const Config& c) { return std::to_string(c.name); }}}
#define GT_BOOL(name) \
  {#name, {[](Config& c, const std::string& k, const std::string& v) { c.name = parse_bool(k, v); }, \
           [](const Config& c) { return fmt_bool(c.name); }}}

const std::vector<std::pair<std::string, Field>>& fields() {
  static const std::vector<std::pair<std::string, Field>> table{
      GT_DOUBLE(alpha_iou),
      GT_INT(k),
      GT_DOUBLE(v_thresh),
      {"matching",
       {[](Config& c, const std::string& k, const std::string& v) {
          const std::string s = lower(v);
          if (s == "optimal")
            c.matching = MatchingMode::Optimal;
          else if (s == "greedy")
            c.matching = MatchingMode::Greedy;
          else
            throw std::invalid_argument("config: '" + k + "' expects optimal|greedy, got '" + v + "'");
        },
        [](const Config& c) { return std::string(c.matching == MatchingMode::Greedy ? "greedy" : "optimal"); }}},
      GT_INT(n_age),
      GT_INT(n_init),
      GT_DOUBLE(alpha_supp),
      GT_DOUBLE(alpha_delete),
      GT_DOUBLE(f_process),
      GT_DOUBLE(f_observation),
      GT_DOUBLE(sigma_gamma),
      GT_DOUBLE(velocity_noise_ratio),
      GT_DOUBLE(focal),
      GT_INT(depth_window),
      GT_DOUBLE(min_iou),
      GT_DOUBLE(max_appearance_distance),
      GT_INT(gallery_size),
      GT_BOOL(gate_gamma),
      GT_DOUBLE(min_confidence),
      GT_DOUBLE(s_x),
      GT_DOUBLE(s_y),
      {"hypotheses",
       {[](Config& c, const std::string& k, const std::string& v) {
          const std::string s = lower(v);
          if (s == "auto")
            c.hypotheses = HypothesisMode::Auto;
          else if (s == "state")
            c.hypotheses = HypothesisMode::State;
          else if (s == "baseline")
            c.hypotheses = HypothesisMode::Baseline;
          else
            throw std::invalid_argument("config: '" + k + "' expects auto|state|baseline, got '" + v + "'");
        },
        [](const Config& c) { return std::string(hypotheses_name(c.hypotheses)); }}},
      GT_BOOL(forecast),
      GT_BOOL(egomotion),
      GT_BOOL(freespace),
      GT_BOOL(depth_noise),
      GT_BOOL(depth_disabled),
      {"seed",
       {[](Config& c, const std::string& k, const std::string& v) { c.seed = parse_int<std::uint64_t>(k, v); },
        [](const Config& c) { return std::to_string(c.seed); }}},
      GT_INT(read_ahead),
  };
  return table;
}

#undef GT_DOUBLE
#undef GT_INT
#undef GT_BOOL

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(std::string("config: ") + what);
}

}  // namespace

void Config::validate() const {
  require(alpha_iou > 0.0 && alpha_iou <= 1.0, "alpha_iou must lie in (0, 1]");
  require(k >= 1, "k must be at least 1");
  require(v_thresh >= 0.0 && v_thresh <= 1.0, "v_thresh must lie in [0, 1]");
  require(n_age >= 0, "n_age must be nonnegative");
  require(n_init >= 1, "n_init must be at least 1");
  require(alpha_supp > 0.0, "alpha_supp must be positive");
  require(alpha_delete > 0.0, "alpha_delete must be positive");
  require(alpha_delete < alpha_supp, "alpha_delete must be below alpha_supp");
  require(f_process > 0.0, "f_process must be positive");
  require(f_observation > 0.0, "f_observation must be positive");
  require(sigma_gamma > 0.0, "sigma_gamma must be positive");
  require(velocity_noise_ratio >= 0.0, "velocity_noise_ratio must be nonnegative");
  require(depth_window >= 1, "depth_window must be at least 1");
  require(min_iou >= 0.0 && min_iou <= 1.0, "min_iou must lie in [0, 1]");
  require(max_appearance_distance >= 0.0, "max_appearance_distance must be nonnegative");
  require(gallery_size >= 1, "gallery_size must be at least 1");
  require(s_x >= 0.0 && s_y >= 0.0, "s_x and s_y must be nonnegative");
  require(read_ahead >= 0, "read_ahead must be nonnegative");
}

KalmanParams Config::kalman_params(double focal_px) const {
  KalmanParams p;
  p.noise = depth_noise && !depth_disabled ? NoiseModel::InverseDepth : NoiseModel::Height;
  p.f_process = f_process;
  p.f_observation = f_observation;
  p.sigma_gamma = sigma_gamma;
  p.focal = focal > 0.0 ? focal : focal_px;
  p.velocity_noise_ratio = velocity_noise_ratio;
  return p;
}

AssociationParams Config::association_params(double focal_px) const {
  AssociationParams p;
  p.kalman = kalman_params(focal_px);
  p.min_iou = min_iou;
  p.max_appearance_distance = max_appearance_distance;
  p.gate_gamma = gate_gamma && !depth_disabled;
  return p;
}

void Config::set(const std::string& key, const std::string& value) {
  const std::string k = trim(key);
  for (const auto& [name, field] : fields()) {
    if (name == k) {
      field.set(*this, k, trim(value));
      return;
    }
  }
  throw std::invalid_argument("config: unknown key '" + k + "'");
}

std::vector<std::pair<std::string, std::string>> Config::entries() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [name, field] : fields()) out.emplace_back(name, field.get(*this));
  return out;
}

void Config::apply_env() {
  const char* v = std::getenv(kSeedEnv);
  if (v == nullptr || *v == '\0') return;
  seed = parse_int<std::uint64_t>(kSeedEnv, trim(v));
}

namespace {

struct KeyValueLine {
  long line;
  std::string key;
  std::string value;
};

std::vector<KeyValueLine> parse_lines(std::istream& is, const std::string& origin) {
  std::vector<KeyValueLine> out;
  std::string raw;
  long n = 0;
  while (std::getline(is, raw)) {
    ++n;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty() || line.front() == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(origin, n, "expected key=value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ParseError(origin, n, "empty key");
    out.push_back({n, key, trim(line.substr(eq + 1))});
  }
  return out;
}

}  // namespace

std::vector<std::pair<std::string, std::string>> parse_key_values(std::istream& is, const std::string& origin) {
  std::vector<std::pair<std::string, std::string>> out;
  for (auto& l : parse_lines(is, origin)) out.emplace_back(std::move(l.key), std::move(l.value));
  return out;
}

Config load_config(const std::filesystem::path& path, Config base) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  for (const auto& l : parse_lines(in, path.string())) {
    try {
      base.set(l.key, l.value);
    } catch (const std::invalid_argument& e) {
      throw ParseError(path.string(), l.line, e.what());
    }
  }
  return base;
}

void save_config(const Config& cfg, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write config " + path.string());
  print_config(cfg, out);
  if (!out) throw IoError("write failed for " + path.string());
}

void print_config(const Config& cfg, std::ostream& os) {
  for (const auto& [k, v] : cfg.entries()) os << k << " = " << v << '\n';
}

}  // namespace ghosttrack
