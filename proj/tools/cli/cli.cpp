#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "ghosttrack/config.hpp"
#include "ghosttrack/error.hpp"
#include "ghosttrack/io.hpp"
#include "ghosttrack/metrics.hpp"
#include "ghosttrack/scenarios.hpp"
#include "ghosttrack/sequence.hpp"
#include "ghosttrack/synthworld.hpp"
#include "plots.hpp"

namespace ghosttrack::cli {

namespace {

struct ConfigOptions {
  std::string config_file;
  std::vector<std::string> sets;

  void attach(CLI::App& app) {
    app.add_option("--config", config_file, "Tracker/evaluation config file (key = value)")->check(CLI::ExistingFile);
    app.add_option("--set", sets, "Override one config key, as key=value (repeatable)")->take_all();
  }

  /// defaults -> <seq>/tracker.cfg -> --config -> --set -> environment.
  Config resolve(const fs::path* seq_dir) const {
    Config cfg;
    if (seq_dir && fs::exists(*seq_dir / "tracker.cfg")) cfg = load_config(*seq_dir / "tracker.cfg", cfg);
    if (!config_file.empty()) cfg = load_config(config_file, cfg);
    try {
      for (const std::string& kv : sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0) throw std::invalid_argument("expected key=value, got '" + kv + "'");
        cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
      }
      cfg.apply_env();
      cfg.validate();
    } catch (const std::invalid_argument& e) {
      throw CLI::ValidationError("--set", e.what());
    }
    return cfg;
  }
};

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << text;
  if (!os) throw IoError("write failed: " + path.string());
}

/// Runs fn(i) for i in [0, n) on up to `jobs` threads. Rethrows the first failure by index.
template <class Fn>
void parallel_for(std::size_t n, int jobs, Fn fn) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), 1, std::max<std::size_t>(n, 1));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();
  for (const std::exception_ptr& e : errors)
    if (e) std::rethrow_exception(e);
}

std::vector<int> parse_int_list(const std::string& text, const char* what) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const int v = std::stoi(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw CLI::ValidationError(what, "expected comma-separated integers, got '" + text + "'");
    }
  }
  if (out.empty()) throw CLI::ValidationError(what, "empty list");
  return out;
}

// track

struct TrackCmd {
  std::vector<std::string> sequences;
  std::string out_dir;
  int jobs = 1;
  ConfigOptions cfg;
};

int run_track(const TrackCmd& cmd, std::ostream& out, std::ostream& err) {
  std::vector<SequenceSource> sources;
  std::vector<Config> configs;
  for (const std::string& s : cmd.sequences) {
    const fs::path dir(s);
    sources.push_back(SequenceSource::open(dir));
    configs.push_back(cmd.cfg.resolve(&dir));
    err << "# config for " << sources.back().info.name << '\n';
    print_config(configs.back(), err);
  }
  fs::create_directories(cmd.out_dir);
  std::vector<std::size_t> frames(sources.size());
  parallel_for(sources.size(), cmd.jobs, [&](std::size_t i) {
    DirectoryFrameSource src(sources[i], configs[i]);
    const PredictionRecord preds = run_sequence(src, configs[i]);
    const fs::path base = fs::path(cmd.out_dir) / sources[i].info.name;
    write_predictions(preds, base.string() + ".txt", base.string() + ".hyp.jsonl");
    frames[i] = preds.size();
  });
  for (std::size_t i = 0; i < sources.size(); ++i)
    out << sources[i].info.name << ": " << frames[i] << " frames with reports -> "
        << (fs::path(cmd.out_dir) / sources[i].info.name).string() << ".{txt,hyp.jsonl}\n";
  return 0;
}

// eval

struct EvalCmd {
  std::vector<std::string> gt;
  std::vector<std::string> pred;
  std::string report;
  ConfigOptions cfg;
};

std::string sequence_name(const fs::path& pred) {
  std::string name = pred.filename().string();
  for (const char* ext : {".hyp.jsonl", ".jsonl", ".txt"}) {
    const std::string e(ext);
    if (name.size() > e.size() && name.ends_with(e)) return name.substr(0, name.size() - e.size());
  }
  return pred.stem().string();
}

int run_eval(const EvalCmd& cmd, std::ostream& out, std::ostream& err) {
  if (cmd.gt.size() != cmd.pred.size())
    throw CLI::ValidationError("eval", "--gt and --pred must be given the same number of times");
  const Config cfg = cmd.cfg.resolve(nullptr);
  print_config(cfg, err);
  const EvalParams params = EvalParams::from(cfg);
  std::vector<MetricReport> reports;
  for (std::size_t i = 0; i < cmd.gt.size(); ++i) {
    const GtRecord gts = read_mot_gt(cmd.gt[i]);
    const PredictionRecord preds = read_predictions(cmd.pred[i]);
    reports.push_back(evaluate_sequence(sequence_name(cmd.pred[i]), gts, preds, params));
  }
  if (reports.size() > 1) reports.push_back(aggregate(reports));
  out << format_table(reports);
  if (!cmd.report.empty()) {
    write_text(cmd.report, format_key_values(reports));
    err << "report written to " << cmd.report << '\n';
  }
  return 0;
}

// synth

struct SynthCmd {
  std::string scenario_file;
  std::string builtin;
  std::string out_dir;
  bool list = false;
};

int run_synth(const SynthCmd& cmd, std::ostream& out, std::ostream& err) {
  if (cmd.list) {
    for (const std::string& n : scenarios::names()) out << n << '\n';
    return 0;
  }
  if (cmd.scenario_file.empty() == cmd.builtin.empty())
    throw CLI::ValidationError("synth", "give exactly one of a scenario file or --builtin NAME");
  if (cmd.out_dir.empty()) throw CLI::ValidationError("synth", "missing output directory");
  const Scenario sc = cmd.builtin.empty() ? load_scenario(cmd.scenario_file) : scenarios::by_name(cmd.builtin);
  write_sequence(sc, cmd.out_dir);
  Config cfg = scenario_config(sc);
  cfg.apply_env();
  err << "# config for " << sc.name << '\n';
  print_config(cfg, err);
  out << sc.name << ": " << sc.frames << " frames, " << sc.walkers.size() << " walkers -> " << cmd.out_dir << '\n';
  return 0;
}

// plot

struct CurveletCmd {
  std::vector<std::string> sequences;
  std::string n_age = "5,15,30,60";
  std::string csv;
  std::string svg;
  int jobs = 1;
  ConfigOptions cfg;
};

int run_curvelet(const CurveletCmd& cmd, std::ostream& out, std::ostream& err) {
  const std::vector<int> ages = parse_int_list(cmd.n_age, "--n-age");
  std::vector<SequenceSource> sources;
  std::vector<Config> configs;
  std::vector<GtRecord> gts;
  for (const std::string& s : cmd.sequences) {
    const fs::path dir(s);
    sources.push_back(SequenceSource::open(dir));
    if (!fs::exists(sources.back().gt)) throw IoError("missing ground truth: " + sources.back().gt.string());
    configs.push_back(cmd.cfg.resolve(&dir));
    err << "# config for " << sources.back().info.name << '\n';
    print_config(configs.back(), err);
    gts.push_back(read_mot_gt(sources.back().gt));
  }
  // counts[age][sequence]
  std::vector<std::vector<DetectionCounts>> counts(ages.size(), std::vector<DetectionCounts>(sources.size()));
  parallel_for(ages.size() * sources.size(), cmd.jobs, [&](std::size_t job) {
    const std::size_t a = job / sources.size();
    const std::size_t s = job % sources.size();
    Config cfg = configs[s];
    cfg.n_age = ages[a];
    cfg.validate();
    DirectoryFrameSource src(sources[s], cfg);
    const PredictionRecord preds = run_sequence(src, cfg);
    counts[a][s] = topk_counts(gts[s], preds, EvalParams::from(cfg), true);
  });
  std::vector<CurvePoint> points;
  for (std::size_t a = 0; a < ages.size(); ++a) {
    DetectionCounts total;
    for (const DetectionCounts& c : counts[a]) total += c;
    points.push_back({ages[a], total.precision(), total.recall(), total.f1()});
  }
  const std::string csv = curvelet_csv(points);
  if (!cmd.csv.empty()) write_text(cmd.csv, csv);
  if (!cmd.svg.empty()) write_text(cmd.svg, curvelet_svg(points));
  if (cmd.csv.empty()) out << csv;
  return 0;
}

struct TopdownCmd {
  std::string sequence;
  std::string ids;
  std::string csv;
  std::string svg;
  ConfigOptions cfg;
};

int run_topdown(const TopdownCmd& cmd, std::ostream& out, std::ostream& err) {
  std::vector<int> ids;
  if (!cmd.ids.empty()) ids = parse_int_list(cmd.ids, "--ids");
  const fs::path dir(cmd.sequence);
  const Config cfg = cmd.cfg.resolve(&dir);
  print_config(cfg, err);
  std::vector<TopdownSample> samples;
  run_sequence(dir, cfg, [&](const FrameOutput& fo, const Tracker& tracker) {
    const CameraModel& cam = tracker.camera();
    for (const ReportedPerson& p : fo.people) {
      if (!ids.empty() && std::find(ids.begin(), ids.end(), p.id) == ids.end()) continue;
      const double g = p.gamma;
      if (!(g > 0.0)) continue;
      // (x, gamma) -> (X, Z) = ((x - px) / (f gamma), 1 / gamma)
      const double dx = p.box.cx - cam.px;
      Eigen::Matrix2d J;
      J << 1.0 / (cam.focal * g), -dx / (cam.focal * g * g), 0.0, -1.0 / (g * g);
      const Eigen::Matrix2d c = J * p.xg_cov * J.transpose();
      samples.push_back({fo.frame, p.id, p.occluded, dx / (cam.focal * g), 1.0 / g, c(0, 0), c(0, 1), c(1, 1)});
    }
  });
  const std::string csv = topdown_csv(samples);
  if (!cmd.csv.empty()) write_text(cmd.csv, csv);
  if (!cmd.svg.empty()) write_text(cmd.svg, topdown_svg(samples));
  if (cmd.csv.empty()) out << csv;
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Occlusion-aware multi-object tracking toolkit", "ghosttrack"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "ghosttrack 0.1.0");

  TrackCmd track;
  CLI::App* track_app = app.add_subcommand("track", "Run the tracker over sequence directories");
  track_app->add_option("sequences", track.sequences, "Sequence directories")->required()->check(CLI::ExistingDirectory);
  track_app->add_option("--out", track.out_dir, "Output directory")->required();
  track_app->add_option("--jobs,-j", track.jobs, "Sequences processed in parallel")->check(CLI::PositiveNumber);
  track.cfg.attach(*track_app);

  EvalCmd eval;
  CLI::App* eval_app = app.add_subcommand("eval", "Score predictions against ground truth");
  eval_app->add_option("--gt", eval.gt, "Ground-truth file (repeat once per sequence)")->required()->check(CLI::ExistingFile);
  eval_app->add_option("--pred", eval.pred, "Prediction file, .txt or .hyp.jsonl (paired with --gt)")->required()->check(CLI::ExistingFile);
  eval_app->add_option("--report", eval.report, "Write key=value metrics to this file");
  eval.cfg.attach(*eval_app);

  SynthCmd synth;
  CLI::App* synth_app = app.add_subcommand("synth", "Generate a synthetic sequence directory");
  std::vector<std::string> synth_args;
  synth_app->add_option("args", synth_args, "[scenario.json] <out_dir>")->expected(0, 2);
  synth_app->add_option("--builtin", synth.builtin, "Built-in scenario (demo, single, benchmark:<seed>, panning:<seed>, linear:<seed>)");
  synth_app->add_flag("--list", synth.list, "List built-in scenarios");

  CLI::App* plot_app = app.add_subcommand("plot", "Write plot data (CSV) and SVG figures");
  plot_app->require_subcommand(1);

  CurveletCmd curvelet;
  CLI::App* curvelet_app = plot_app->add_subcommand("pr_curvelet", "Occluded precision/recall as the track lifespan varies");
  curvelet_app->add_option("sequences", curvelet.sequences, "Sequence directories with ground truth")->required()->check(CLI::ExistingDirectory);
  curvelet_app->add_option("--n-age", curvelet.n_age, "Comma-separated lifespans");
  curvelet_app->add_option("--out-csv", curvelet.csv, "CSV output (stdout when absent)");
  curvelet_app->add_option("--out-svg", curvelet.svg, "SVG output");
  curvelet_app->add_option("--jobs,-j", curvelet.jobs, "Runs in parallel")->check(CLI::PositiveNumber);
  curvelet.cfg.attach(*curvelet_app);

  TopdownCmd topdown;
  CLI::App* topdown_app = plot_app->add_subcommand("topdown", "Ground-plane trajectories with forecast uncertainty");
  topdown_app->add_option("sequence", topdown.sequence, "Sequence directory")->required()->check(CLI::ExistingDirectory);
  topdown_app->add_option("--ids", topdown.ids, "Comma-separated track ids (default: all)");
  topdown_app->add_option("--out-csv", topdown.csv, "CSV output (stdout when absent)");
  topdown_app->add_option("--out-svg", topdown.svg, "SVG output");
  topdown.cfg.attach(*topdown_app);

  try {
    app.parse(argc, argv);
    if (*synth_app) {
      if (synth_args.size() == 2) {
        synth.scenario_file = synth_args[0];
        synth.out_dir = synth_args[1];
      } else if (synth_args.size() == 1) {
        synth.out_dir = synth_args[0];
      }
      if (!synth.scenario_file.empty() && !fs::exists(synth.scenario_file))
        throw CLI::ValidationError("synth", "scenario file not found: " + synth.scenario_file);
    }
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  try {
    if (*track_app) return run_track(track, out, err);
    if (*eval_app) return run_eval(eval, out, err);
    if (*synth_app) return run_synth(synth, out, err);
    if (*curvelet_app) return run_curvelet(curvelet, out, err);
    if (*topdown_app) return run_topdown(topdown, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace ghosttrack::cli
