// Command-line front end: sample fractals and trajectories, compute MSTs and
// persistence intervals, run single estimators or whole experiments.

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "fracdim/core.hpp"
#include "fracdim/dynamics.hpp"
#include "fracdim/estimators.hpp"
#include "fracdim/harness.hpp"
#include "fracdim/mst.hpp"
#include "fracdim/persistence.hpp"
#include "fracdim/samplers.hpp"

using namespace fracdim;
using nlohmann::json;

namespace {

std::string num(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::pair<double, double> parse_pair(const std::string& text, const char* what) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw Error(ErrorKind::InvalidParameter, std::string(what) + " must be lo:hi");
  try {
    return {std::stod(text.substr(0, colon)), std::stod(text.substr(colon + 1))};
  } catch (const std::exception&) {
    throw Error(ErrorKind::InvalidParameter, std::string(what) + " must be lo:hi, got " + text);
  }
}

// Writes to the named file, or stdout for "" or "-".
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty() && path != "-") {
      file_.open(path);
      if (!file_) throw Error(ErrorKind::Io, "cannot write " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

struct SourceOptions {
  std::string input;
  std::string format = "points";
  std::optional<double> min_magnitude;
  std::string fractal;
  std::string system;
  std::vector<std::string> params;
  Index n = 100'000;
  int depth = 64;
  std::optional<double> transient;

  void add(CLI::App* app, bool with_input) {
    if (with_input) {
      app->add_option("-i,--input", input, "Point file (one point per line)");
      app->add_option("--format", format, "points | xyz-km | lonlat-depth");
      app->add_option("--min-magnitude", min_magnitude, "Drop catalog rows below this magnitude");
    }
    app->add_option("--fractal", fractal, "sierpinski | cantor_dust | cantor_cross_interval | menger");
    app->add_option("--system", system, "henon | ikeda | rulkov | lorenz | mackey_glass");
    app->add_option("--param", params, "System parameter override name=value (repeatable)");
    app->add_option("-n,--points", n, "Number of generated points")->check(CLI::PositiveNumber);
    app->add_option("--depth", depth, "Digit depth for fractal samplers");
    app->add_option("--transient", transient, "Transient (steps for maps, time for flows)");
  }

  SourceConfig config() const {
    SourceConfig src;
    const int chosen = !input.empty() + !fractal.empty() + !system.empty();
    if (chosen != 1) throw Error(ErrorKind::InvalidArgument, "give exactly one of --input, --fractal, --system");
    if (!fractal.empty()) {
      const auto kind = parse_fractal_kind(fractal);
      if (!kind) throw Error(ErrorKind::InvalidParameter, "unknown fractal " + fractal);
      src.type = SourceConfig::Type::Fractal;
      src.fractal = {*kind, depth};
    } else if (!system.empty()) {
      const auto kind = parse_system_kind(system);
      if (!kind) throw Error(ErrorKind::InvalidParameter, "unknown system " + system);
      src.type = SourceConfig::Type::System;
      src.system = SystemSpec::defaults(*kind);
      ParamMap overrides;
      for (const auto& p : params) {
        const auto eq = p.find('=');
        if (eq == std::string::npos) throw Error(ErrorKind::InvalidParameter, "--param expects name=value");
        overrides[p.substr(0, eq)] = std::stod(p.substr(eq + 1));
      }
      src.system.params = merge_params(*kind, overrides);
      if (transient) src.system.transient = *transient;
    } else {
      src.type = SourceConfig::Type::File;
      src.path = input;
      if (format != "points") {
        src.catalog = parse_catalog_format(format);
        if (!src.catalog) throw Error(ErrorKind::InvalidParameter, "unknown format " + format);
      }
      src.min_magnitude = min_magnitude;
    }
    return src;
  }
};

PointCloud load(const SourceOptions& opts, std::uint64_t seed) {
  ExperimentConfig cfg;
  cfg.source = opts.config();
  cfg.n_max = cfg.source.type == SourceConfig::Type::File ? std::numeric_limits<Index>::max() : opts.n;
  cfg.seed_root = seed;
  return trial_cloud(cfg, 0);
}

int cmd_run(const std::string& config_path, const std::string& output_dir) {
  std::ifstream in(config_path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + config_path);
  std::stringstream text;
  text << in.rdbuf();
  ExperimentConfig cfg = parse_experiment_config(text.str());
  if (!output_dir.empty()) cfg.output_dir = output_dir;

  const ExperimentReport report = run_experiment(cfg);
  if (!cfg.output_dir.empty()) save_report(report, cfg.output_dir);

  std::cout << "method,size,computed,mean,std\n";
  for (const auto& m : cfg.methods) {
    if (const ReportCell* c = report.final_cell(m.label())) {
      std::cout << c->method << ',' << c->size << ',' << c->computed << '/' << c->trials.size() << ','
                << num(c->mean) << ',' << num(c->std) << '\n';
      for (std::size_t t = 0; t < c->trials.size(); ++t) {
        if (!c->trials[t].value) std::cerr << "trial " << t << ": " << c->trials[t].error << '\n';
      }
    }
  }
  return report.all_computed() ? 0 : 2;
}

struct EstimateOptions {
  std::string method = "ph";
  double alpha = 1.0;
  int degree = 0;
  std::string schedule;
  std::string eps_range;
  std::string fit_range;
  std::uint64_t seed = 0;
  Index trials = 1;
  std::string output_dir;
};

int cmd_estimate(const SourceOptions& src, const EstimateOptions& opt) {
  std::vector<Index> schedule;
  Index n_min = 1000, count = 100;
  std::optional<Index> n_max;
  if (!opt.schedule.empty()) {
    std::istringstream parts(opt.schedule);
    std::string a, b, c;
    if (!std::getline(parts, a, ':') || !std::getline(parts, b, ':') || !std::getline(parts, c)) {
      throw Error(ErrorKind::InvalidParameter, "--schedule must be n_min:n_max:count");
    }
    n_min = std::stoll(a);
    n_max = std::stoll(b);
    count = std::stoll(c);
  }

  json trials = json::array();
  std::vector<double> values;
  std::ostringstream curves;
  curves << "trial,x,y\n";
  bool all_ok = true;
  for (Index t = 0; t < opt.trials; ++t) {
    const std::uint64_t seed = opt.seed + static_cast<std::uint64_t>(t);
    json row = {{"trial", t}, {"seed", seed}};
    try {
      SourceOptions sized = src;
      if (n_max && src.input.empty()) sized.n = *n_max;
      PointCloud cloud = load(sized, seed);
      if (n_max && cloud.size() > *n_max) cloud = cloud.prefix(*n_max);
      schedule = subsample_schedule(cloud.size(), std::min(n_min, cloud.size()), count);

      const ScalingCurve* curve = nullptr;
      FitResult fit;
      double value = 0.0;
      DimensionEstimate dim;
      CorrelationEstimate corr;
      BoxEstimate box;
      ComplexityEstimate comp;
      if (opt.method == "ph") {
        dim = ph_dimension(cloud, {opt.degree, opt.alpha, schedule});
        if (dim.infinite) row["flags"] = {"infinite-dimension"};
        value = dim.dimension;
        curve = &dim.curve;
        fit = dim.fit;
      } else if (opt.method == "corr") {
        CorrDimConfig cfg;
        if (!opt.eps_range.empty()) cfg.eps_range = parse_pair(opt.eps_range, "--eps-range");
        corr = correlation_dimension(cloud, cfg);
        value = corr.dimension;
        curve = &corr.curve;
        fit = corr.fit;
        row["eps_range"] = {corr.eps_lo, corr.eps_hi};
      } else if (opt.method == "box") {
        BoxDimConfig cfg;
        cfg.prefix_sizes = schedule;
        box = box_dimension(cloud, cfg);
        value = box.dimension;
        curve = &box.curve;
        fit = box.fit;
        row["stable_index"] = box.stable_index;
      } else if (opt.method == "comp") {
        if (opt.fit_range.empty()) throw Error(ErrorKind::InvalidParameter, "comp needs --fit-range lo:hi");
        const auto [lo, hi] = parse_pair(opt.fit_range, "--fit-range");
        comp = ph_complexity(ph_intervals(PointsRef(cloud.points()), opt.degree), {lo, hi, 100});
        value = comp.complexity;
        curve = &comp.curve;
        fit = comp.fit;
      } else {
        throw Error(ErrorKind::InvalidParameter, "unknown method " + opt.method);
      }
      row["estimate"] = value;
      row["fit"] = {{"slope", fit.slope},
                    {"intercept", fit.intercept},
                    {"slope_stderr", fit.slope_stderr},
                    {"range", {fit.range_lo, fit.range_hi}},
                    {"points", fit.n_points_used}};
      values.push_back(value);
      for (const auto& e : curve->entries()) curves << t << ',' << num(e.x) << ',' << num(e.y) << '\n';
    } catch (const Error& e) {
      row["error"] = e.what();
      all_ok = false;
    }
    trials.push_back(row);
  }

  ReportCell cell;
  for (const json& row : trials) {
    cell.trials.push_back(row.contains("estimate") ? TrialValue{row["estimate"].get<double>(), {}}
                                                   : TrialValue{std::nullopt, row["error"].get<std::string>()});
  }
  summarize(cell);
  json out = {{"method", opt.method}, {"trials", trials}, {"computed", cell.computed}};
  if (cell.computed > 0) {
    out["mean"] = cell.mean;
    out["std"] = cell.std;
  }
  if (cell.single_trial) out["flags"] = {"single-trial"};
  std::cout << out.dump(2) << '\n';
  if (!opt.output_dir.empty()) {
    std::filesystem::create_directories(opt.output_dir);
    std::ofstream(std::filesystem::path(opt.output_dir) / "estimate.json") << out.dump(2) << '\n';
    std::ofstream(std::filesystem::path(opt.output_dir) / "curves.csv") << curves.str();
  }
  return all_ok ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fractal dimension estimation from point samples"};
  app.require_subcommand(1);

  std::string config_path, run_output;
  auto* run = app.add_subcommand("run", "Run an experiment described by a JSON config");
  run->add_option("-c,--config", config_path, "Experiment config")->required()->check(CLI::ExistingFile);
  run->add_option("-o,--output", run_output, "Report directory (overrides the config)");

  SourceOptions sample_src;
  std::uint64_t sample_seed = 0;
  std::string sample_out;
  auto* sample = app.add_subcommand("sample", "Sample a self-similar fractal");
  sample->add_option("--fractal", sample_src.fractal, "sierpinski | cantor_dust | cantor_cross_interval | menger")
      ->required();
  sample->add_option("-n,--points", sample_src.n, "Number of points")->check(CLI::PositiveNumber);
  sample->add_option("--depth", sample_src.depth, "Digit depth");
  sample->add_option("--seed", sample_seed, "Seed");
  sample->add_option("-o,--output", sample_out, "Output file (default stdout)");

  SourceOptions traj_src;
  std::uint64_t traj_seed = 0;
  std::string traj_out;
  auto* traj = app.add_subcommand("trajectory", "Generate an attractor trajectory");
  traj->add_option("--system", traj_src.system, "henon | ikeda | rulkov | lorenz | mackey_glass")->required();
  traj->add_option("--param", traj_src.params, "Parameter override name=value (repeatable)");
  traj->add_option("-n,--points", traj_src.n, "Number of points")->check(CLI::PositiveNumber);
  traj->add_option("--transient", traj_src.transient, "Transient (steps for maps, time for flows)");
  traj->add_option("--seed", traj_seed, "Seed for the initial condition");
  traj->add_option("-o,--output", traj_out, "Output file (default stdout)");

  std::string mst_in, mst_out;
  auto* mst = app.add_subcommand("mst", "Euclidean minimum spanning tree as CSV i,j,length");
  mst->add_option("-i,--input", mst_in, "Point file")->required()->check(CLI::ExistingFile);
  mst->add_option("-o,--output", mst_out, "Output file (default stdout)");

  std::string pers_in, pers_out;
  int pers_degree = 1;
  auto* pers = app.add_subcommand("persistence", "Persistence intervals as CSV degree,birth,death");
  pers->add_option("-i,--input", pers_in, "Point file")->required()->check(CLI::ExistingFile);
  pers->add_option("--degree", pers_degree, "0 (MST, any dimension) or 1 (planar alpha complex)")
      ->check(CLI::Range(0, 1));
  pers->add_option("-o,--output", pers_out, "Output file (default stdout)");

  SourceOptions est_src;
  EstimateOptions est;
  auto* estimate = app.add_subcommand("estimate", "Estimate a dimension, printing a JSON report");
  est_src.add(estimate, true);
  estimate->add_option("--method", est.method, "ph | corr | box | comp")
      ->check(CLI::IsMember({"ph", "corr", "box", "comp"}));
  estimate->add_option("--alpha", est.alpha, "PH weight alpha")->check(CLI::PositiveNumber);
  estimate->add_option("--degree", est.degree, "Homology degree")->check(CLI::Range(0, 1));
  estimate->add_option("--schedule", est.schedule, "Prefix sizes n_min:n_max:count");
  estimate->add_option("--eps-range", est.eps_range, "Fixed correlation range lo:hi");
  estimate->add_option("--fit-range", est.fit_range, "Complexity fit range lo:hi");
  estimate->add_option("--seed", est.seed, "Seed of the first trial");
  estimate->add_option("--trials", est.trials, "Trials (seeds seed, seed+1, ...)")->check(CLI::PositiveNumber);
  estimate->add_option("-o,--output", est.output_dir, "Directory for estimate.json and curves.csv");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(config_path, run_output);
    if (*sample) {
      Output out(sample_out);
      write_point_cloud(out.stream(), load(sample_src, sample_seed));
      return 0;
    }
    if (*traj) {
      Output out(traj_out);
      write_point_cloud(out.stream(), load(traj_src, traj_seed));
      return 0;
    }
    if (*mst) {
      const PointCloud cloud = read_point_cloud(std::filesystem::path(mst_in));
      Output out(mst_out);
      out.stream() << "i,j,length\n";
      for (const Edge& e : euclidean_mst(cloud).edges) out.stream() << e.i << ',' << e.j << ',' << num(e.length) << '\n';
      return 0;
    }
    if (*pers) {
      const PointCloud cloud = read_point_cloud(std::filesystem::path(pers_in));
      IntervalSet set;
      if (pers_degree == 0) {
        set = ph0_intervals(cloud);
      } else {
        Index duplicates = 0;
        set = ph1_intervals(cloud, &duplicates);
        if (duplicates > 0) std::cerr << "warning: removed " << duplicates << " duplicate points\n";
      }
      Output out(pers_out);
      out.stream() << "degree,birth,death\n";
      for (const Interval& I : set.intervals) {
        out.stream() << set.degree << ',' << num(I.birth) << ',' << num(I.death) << '\n';
      }
      return 0;
    }
    if (*estimate) return cmd_estimate(est_src, est);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
