#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <string_view>

#include <Eigen/LU>
#include <nlohmann/json.hpp>

#include "ghosttrack/error.hpp"
#include "ghosttrack/io.hpp"

namespace ghosttrack {

namespace {

class LineReader {
 public:
  explicit LineReader(const fs::path& path) : path_(path.string()), in_(path) {
    if (!in_) throw IoError("cannot open " + path_);
  }

  // Next non-blank line; false at end of file.
  bool next(std::string& line) {
    while (std::getline(in_, line)) {
      ++line_no_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.find_first_not_of(" \t") != std::string::npos) return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(path_, line_no_, what); }
  long line_no() const { return line_no_; }
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::ifstream in_;
  long line_no_ = 0;
};

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    const std::size_t b = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
    if (i > b) out.push_back(s.substr(b, i - b));
  }
  return out;
}

std::string_view strip(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

double num(const LineReader& r, std::string_view tok, const char* field) {
  tok = strip(tok);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    r.fail(std::string("field '") + field + "' is not a number: '" + std::string(tok) + "'");
  if (!std::isfinite(v)) r.fail(std::string("field '") + field + "' is not finite");
  return v;
}

int integer(const LineReader& r, std::string_view tok, const char* field) {
  const double v = num(r, tok, field);
  if (v != std::floor(v) || std::abs(v) > 2e9) r.fail(std::string("field '") + field + "' is not an integer");
  return static_cast<int>(v);
}

BBox box_from(const LineReader& r, const std::vector<std::string_view>& f, std::size_t at) {
  const double l = num(r, f[at], "left");
  const double t = num(r, f[at + 1], "top");
  const double w = num(r, f[at + 2], "width");
  const double h = num(r, f[at + 3], "height");
  if (!(w > 0.0) || !(h > 0.0)) r.fail("box width and height must be positive");
  return BBox::from_tlwh(l, t, w, h);
}

class Writer {
 public:
  explicit Writer(const fs::path& path) : path_(path.string()), out_(path, std::ios::binary) {
    if (!out_) throw IoError("cannot write " + path_);
  }
  std::ostream& stream() { return out_; }
  void close() {
    out_.close();
    if (!out_) throw IoError("write failed for " + path_);
  }

 private:
  std::string path_;
  std::ofstream out_;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  const int n = std::snprintf(buf, sizeof buf, f, args...);
  return std::string(buf, static_cast<std::size_t>(std::max(n, 0)));
}

template <class T>
void sort_frames(FrameMap<T>& rec, auto key) {
  for (auto& [frame, v] : rec) std::stable_sort(v.begin(), v.end(), [&](const T& a, const T& b) { return key(a) < key(b); });
}

}  // namespace

GtRecord read_mot_gt(const fs::path& path, bool filter_pedestrians) {
  LineReader r(path);
  GtRecord out;
  std::string line;
  while (r.next(line)) {
    const auto f = split(line, ',');
    if (f.size() < 6) r.fail("expected at least 6 comma-separated fields");
    GtBox g;
    g.frame = integer(r, f[0], "frame");
    if (g.frame < 1) r.fail("frame must be >= 1");
    g.id = integer(r, f[1], "id");
    g.box = box_from(r, f, 2);
    const double conf = f.size() > 6 ? num(r, f[6], "conf") : 1.0;
    g.cls = f.size() > 7 ? integer(r, f[7], "class") : 1;
    g.visibility = f.size() > 8 ? num(r, f[8], "visibility") : 1.0;
    if (g.visibility < 0.0 || g.visibility > 1.0) r.fail("visibility must lie in [0, 1]");
    if (filter_pedestrians && (conf == 0.0 || g.cls != 1)) continue;
    out[g.frame].push_back(g);
  }
  return out;
}

void write_mot_gt(const GtRecord& gts, const fs::path& path) {
  Writer w(path);
  for (const auto& [frame, boxes] : gts)
    for (const GtBox& g : boxes) {
      const auto b = g.box.tlwh();
      w.stream() << fmt("%d,%d,%.2f,%.2f,%.2f,%.2f,1,%d,%.6f\n", frame, g.id, b[0], b[1], b[2], b[3], g.cls,
                        g.visibility);
    }
  w.close();
}

DetectionRecord read_mot_det(const fs::path& path, double min_confidence) {
  LineReader r(path);
  DetectionRecord out;
  std::string line;
  while (r.next(line)) {
    const auto f = split(line, ',');
    if (f.size() < 7) r.fail("expected at least 7 comma-separated fields");
    DetRecord d;
    d.frame = integer(r, f[0], "frame");
    if (d.frame < 1) r.fail("frame must be >= 1");
    d.box = box_from(r, f, 2);
    d.confidence = num(r, f[6], "conf");
    if (d.confidence < min_confidence) continue;
    out[d.frame].push_back(std::move(d));
  }
  return out;
}

void write_mot_det(const DetectionRecord& dets, const fs::path& path) {
  Writer w(path);
  for (const auto& [frame, v] : dets)
    for (const DetRecord& d : v) {
      const auto b = d.box.tlwh();
      w.stream() << fmt("%d,-1,%.2f,%.2f,%.2f,%.2f,%.4f,-1,-1,-1\n", frame, b[0], b[1], b[2], b[3], d.confidence);
    }
  w.close();
}

void filter_confidence(DetectionRecord& dets, double min_confidence) {
  for (auto it = dets.begin(); it != dets.end();) {
    std::erase_if(it->second, [&](const DetRecord& d) { return d.confidence < min_confidence; });
    it = it->second.empty() ? dets.erase(it) : std::next(it);
  }
}

void write_mot_predictions(const PredictionRecord& preds, const fs::path& path) {
  Writer w(path);
  for (const auto& [frame, v] : preds)
    for (const PredEntry& e : v) {
      const auto b = e.hypotheses.top().tlwh();
      w.stream() << fmt("%d,%d,%.2f,%.2f,%.2f,%.2f,1,-1,-1,-1\n", frame, e.id, b[0], b[1], b[2], b[3]);
    }
  w.close();
}

PredictionRecord read_mot_predictions(const fs::path& path) {
  LineReader r(path);
  PredictionRecord out;
  std::string line;
  while (r.next(line)) {
    const auto f = split(line, ',');
    if (f.size() < 6) r.fail("expected at least 6 comma-separated fields");
    PredEntry e;
    e.frame = integer(r, f[0], "frame");
    if (e.frame < 1) r.fail("frame must be >= 1");
    e.id = integer(r, f[1], "id");
    e.hypotheses.boxes.push_back(box_from(r, f, 2));
    out[e.frame].push_back(std::move(e));
  }
  sort_frames(out, [](const PredEntry& e) { return e.id; });
  return out;
}

void write_hypotheses(const PredictionRecord& preds, const fs::path& path) {
  Writer w(path);
  for (const auto& [frame, v] : preds)
    for (const PredEntry& e : v) {
      nlohmann::ordered_json j;
      j["frame"] = frame;
      j["id"] = e.id;
      j["occluded"] = e.occluded;
      j["gamma"] = e.gamma;
      nlohmann::json boxes = nlohmann::json::array();
      for (const BBox& b : e.hypotheses.boxes) {
        const auto t = b.tlwh();
        boxes.push_back({t[0], t[1], t[2], t[3]});
      }
      j["hypotheses"] = std::move(boxes);
      w.stream() << j.dump() << '\n';
    }
  w.close();
}

PredictionRecord read_hypotheses(const fs::path& path) {
  LineReader r(path);
  PredictionRecord out;
  std::string line;
  while (r.next(line)) {
    PredEntry e;
    try {
      const nlohmann::json j = nlohmann::json::parse(line);
      e.frame = j.at("frame").get<int>();
      e.id = j.at("id").get<int>();
      e.occluded = j.at("occluded").get<bool>();
      e.gamma = j.at("gamma").get<double>();
      for (const auto& b : j.at("hypotheses")) {
        if (b.size() != 4) r.fail("hypothesis boxes need 4 numbers");
        const double l = b[0].get<double>(), t = b[1].get<double>(), wd = b[2].get<double>(), h = b[3].get<double>();
        if (!std::isfinite(l) || !std::isfinite(t) || !(wd > 0.0) || !(h > 0.0) || !std::isfinite(wd) ||
            !std::isfinite(h))
          r.fail("invalid hypothesis box");
        e.hypotheses.boxes.push_back(BBox::from_tlwh(l, t, wd, h));
      }
    } catch (const nlohmann::json::exception& ex) {
      r.fail(ex.what());
    }
    if (e.frame < 1) r.fail("frame must be >= 1");
    if (e.hypotheses.boxes.empty()) r.fail("empty hypothesis list");
    if (!std::isfinite(e.gamma)) r.fail("gamma is not finite");
    out[e.frame].push_back(std::move(e));
  }
  sort_frames(out, [](const PredEntry& e) { return e.id; });
  return out;
}

void write_predictions(const PredictionRecord& preds, const fs::path& path_txt, const fs::path& path_hyp) {
  write_mot_predictions(preds, path_txt);
  write_hypotheses(preds, path_hyp);
}

PredictionRecord read_predictions(const fs::path& path) {
  if (path.extension() == ".jsonl") return read_hypotheses(path);
  return read_mot_predictions(path);
}

WarpRecord read_warps(const fs::path& path) {
  WarpRecord out;
  if (!fs::exists(path)) return out;
  LineReader r(path);
  std::string line;
  while (r.next(line)) {
    const auto f = split_ws(line);
    if (f.size() != 10) r.fail("expected a frame index and 9 matrix entries");
    const int frame = integer(r, f[0], "frame");
    Warp w;
    for (int i = 0; i < 9; ++i) w(i / 3, i % 3) = num(r, f[static_cast<std::size_t>(i + 1)], "warp");
    if (!(std::abs(w.determinant()) >= 1e-12)) r.fail("warp matrix is not invertible");
    if (!out.emplace(frame, w).second) r.fail("duplicate warp for frame " + std::to_string(frame));
  }
  return out;
}

void write_warps(const WarpRecord& warps, const fs::path& path) {
  Writer w(path);
  for (const auto& [frame, m] : warps) {
    w.stream() << frame;
    for (int i = 0; i < 9; ++i) w.stream() << ' ' << fmt("%.17g", m(i / 3, i % 3));
    w.stream() << '\n';
  }
  w.close();
}

Warp warp_for(const WarpRecord& warps, int frame) {
  const auto it = warps.find(frame);
  return it == warps.end() ? Warp::Identity() : it->second;
}

void read_features(const fs::path& path, DetectionRecord& dets) {
  LineReader r(path);
  std::set<std::pair<int, int>> seen;
  std::string line;
  while (r.next(line)) {
    const auto f = split(line, ',');
    if (f.size() < 3) r.fail("expected frame,det_index,d,v1,...,vd");
    const int frame = integer(r, f[0], "frame");
    const int index = integer(r, f[1], "det_index");
    const int d = integer(r, f[2], "d");
    if (d < 1) r.fail("feature dimension must be positive");
    if (f.size() != static_cast<std::size_t>(d) + 3) r.fail("feature length does not match d");
    if (!seen.emplace(frame, index).second) r.fail("duplicate feature for this detection");
    const auto it = dets.find(frame);
    if (it == dets.end() || index < 0 || index >= static_cast<int>(it->second.size()))
      r.fail("feature refers to a detection that does not exist");
    Feature v(static_cast<std::size_t>(d));
    double norm = 0.0;
    for (int i = 0; i < d; ++i) {
      const double x = num(r, f[static_cast<std::size_t>(i + 3)], "feature");
      v[static_cast<std::size_t>(i)] = static_cast<float>(x);
      norm += x * x;
    }
    norm = std::sqrt(norm);
    if (!(norm > 0.0)) r.fail("zero feature vector");
    for (float& x : v) x = static_cast<float>(x / norm);
    it->second[static_cast<std::size_t>(index)].feature = std::move(v);
  }
  std::size_t total = 0;
  for (const auto& [frame, v] : dets) total += v.size();
  if (seen.size() != total)
    throw std::runtime_error(r.path() + ": " + std::to_string(seen.size()) + " feature records for " +
                             std::to_string(total) + " detections");
}

void write_features(const DetectionRecord& dets, const fs::path& path) {
  Writer w(path);
  for (const auto& [frame, v] : dets)
    for (std::size_t i = 0; i < v.size(); ++i) {
      const Feature& f = v[i].feature;
      w.stream() << frame << ',' << i << ',' << f.size();
      for (float x : f) w.stream() << ',' << fmt("%.9g", static_cast<double>(x));
      w.stream() << '\n';
    }
  w.close();
}

std::string frame_filename(int frame, const std::string& ext) { return fmt("frame_%06d", frame) + ext; }

}  // namespace ghosttrack
