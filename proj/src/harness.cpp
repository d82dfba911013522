#include "fracdim/harness.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "fracdim/persistence.hpp"

namespace fracdim {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Catalog ingestion

std::optional<CatalogFormat> parse_catalog_format(std::string_view name) {
  if (name == "xyz-km") return CatalogFormat::XyzKm;
  if (name == "lonlat-depth") return CatalogFormat::LonLatDepth;
  return std::nullopt;
}

PointCloud ingest_catalog(std::istream& in, CatalogFormat format, std::optional<double> min_magnitude,
                          std::string label) {
  std::vector<std::array<double, 3>> rows;
  std::string line;
  std::size_t line_number = 0;
  std::size_t columns = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const std::vector<double> v = parse_numeric_line(line, line_number);
    if (v.empty()) continue;
    if (columns == 0) {
      columns = v.size();
      if (columns != 3 && columns != 4) {
        throw Error(ErrorKind::Format, "line " + std::to_string(line_number) +
                                           ": catalog rows need 3 columns plus an optional magnitude, got " +
                                           std::to_string(columns));
      }
    } else if (v.size() != columns) {
      throw Error(ErrorKind::Format, "line " + std::to_string(line_number) + ": expected " +
                                         std::to_string(columns) + " columns, got " + std::to_string(v.size()));
    }
    if (columns == 4 && min_magnitude && v[3] < *min_magnitude) continue;
    rows.push_back({v[0], v[1], v[2]});
  }

  Points pts(static_cast<Index>(rows.size()), 3);
  if (format == CatalogFormat::XyzKm) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      for (int k = 0; k < 3; ++k) pts(static_cast<Index>(i), k) = rows[i][k];
    }
  } else {
    constexpr double kEarthRadiusKm = 6371.0;
    constexpr double kRad = std::numbers::pi / 180.0;
    double lon0 = 0.0, lat0 = 0.0;
    for (const auto& r : rows) {
      lon0 += r[0];
      lat0 += r[1];
    }
    if (!rows.empty()) {
      lon0 /= static_cast<double>(rows.size());
      lat0 /= static_cast<double>(rows.size());
    }
    const double coslat = std::cos(lat0 * kRad);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto ii = static_cast<Index>(i);
      pts(ii, 0) = kEarthRadiusKm * (rows[i][0] - lon0) * kRad * coslat;
      pts(ii, 1) = kEarthRadiusKm * (rows[i][1] - lat0) * kRad;
      pts(ii, 2) = rows[i][2];
    }
  }
  return PointCloud(std::move(pts), std::move(label));
}

PointCloud ingest_catalog(const std::filesystem::path& path, CatalogFormat format,
                          std::optional<double> min_magnitude) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  return ingest_catalog(in, format, min_magnitude, path.filename().string());
}

// ---------------------------------------------------------------------------
// Configuration

std::string MethodConfig::label() const {
  std::ostringstream s;
  switch (kind) {
    case Kind::PH:
      s << "ph" << degree << "_a" << alpha;
      break;
    case Kind::Correlation:
      s << "corr";
      break;
    case Kind::Box:
      s << "box";
      break;
    case Kind::Complexity:
      s << "comp" << degree;
      break;
  }
  return s.str();
}

namespace {

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  const auto it = j.find(key);
  return it == j.end() ? fallback : it->get<T>();
}

std::pair<double, double> get_range(const json& j, const char* key) {
  const json& r = j.at(key);
  if (!r.is_array() || r.size() != 2) {
    throw Error(ErrorKind::InvalidParameter, std::string(key) + " must be a [lo, hi] pair");
  }
  return {r[0].get<double>(), r[1].get<double>()};
}

SourceConfig parse_source(const json& j) {
  SourceConfig src;
  if (j.contains("fractal")) {
    src.type = SourceConfig::Type::Fractal;
    const auto kind = parse_fractal_kind(j.at("fractal").get<std::string>());
    if (!kind) throw Error(ErrorKind::InvalidParameter, "unknown fractal " + j.at("fractal").dump());
    src.fractal.kind = *kind;
    src.fractal.digit_depth = get_or(j, "digit_depth", 64);
  } else if (j.contains("system")) {
    src.type = SourceConfig::Type::System;
    const auto kind = parse_system_kind(j.at("system").get<std::string>());
    if (!kind) throw Error(ErrorKind::InvalidParameter, "unknown system " + j.at("system").dump());
    src.system = SystemSpec::defaults(*kind);
    ParamMap overrides;
    if (j.contains("params")) {
      for (const auto& [name, value] : j.at("params").items()) overrides[name] = value.get<double>();
    }
    src.system.params = merge_params(*kind, overrides);
    src.system.transient = get_or(j, "transient", src.system.transient);
    src.system.sample_interval = get_or(j, "sample_interval", src.system.sample_interval);
    src.system.integrator.rel_tol = get_or(j, "rel_tol", src.system.integrator.rel_tol);
    src.system.integrator.abs_tol = get_or(j, "abs_tol", src.system.integrator.abs_tol);
  } else if (j.contains("file")) {
    src.type = SourceConfig::Type::File;
    src.path = j.at("file").get<std::string>();
    const std::string format = get_or<std::string>(j, "format", "points");
    if (format != "points") {
      src.catalog = parse_catalog_format(format);
      if (!src.catalog) throw Error(ErrorKind::InvalidParameter, "unknown file format " + format);
    }
    if (j.contains("min_magnitude")) src.min_magnitude = j.at("min_magnitude").get<double>();
  } else {
    throw Error(ErrorKind::InvalidParameter, "source needs one of fractal, system or file");
  }
  return src;
}

MethodConfig parse_method(const json& j) {
  MethodConfig m;
  const std::string name = j.at("method").get<std::string>();
  if (name == "ph") {
    m.kind = MethodConfig::Kind::PH;
  } else if (name == "corr") {
    m.kind = MethodConfig::Kind::Correlation;
  } else if (name == "box") {
    m.kind = MethodConfig::Kind::Box;
  } else if (name == "comp") {
    m.kind = MethodConfig::Kind::Complexity;
  } else {
    throw Error(ErrorKind::InvalidParameter, "unknown method " + name);
  }
  m.degree = get_or(j, "degree", m.kind == MethodConfig::Kind::Complexity ? 1 : 0);
  m.alpha = get_or(j, "alpha", 1.0);
  m.final_only = get_or(j, "final_only", false);
  m.correlation.eps_count = get_or<Index>(j, "eps_count", m.correlation.eps_count);
  if (j.contains("eps_range")) m.correlation.eps_range = get_range(j, "eps_range");
  m.box.grid_denominator = get_or<Index>(j, "grid_denominator", m.box.grid_denominator);
  m.box.max_index = get_or<Index>(j, "max_index", m.box.max_index);
  m.box.lookback = get_or<Index>(j, "lookback", m.box.lookback);
  if (m.kind == MethodConfig::Kind::Complexity) {
    const auto [lo, hi] = get_range(j, "fit_range");
    m.complexity.eps_lo = lo;
    m.complexity.eps_hi = hi;
    m.complexity.samples = get_or<Index>(j, "samples", m.complexity.samples);
  }
  if (m.degree != 0 && m.degree != 1) throw Error(ErrorKind::InvalidParameter, "degree must be 0 or 1");
  if (!(m.alpha > 0.0)) throw Error(ErrorKind::InvalidParameter, "alpha must be positive");
  return m;
}

json source_json(const SourceConfig& src) {
  json j;
  switch (src.type) {
    case SourceConfig::Type::Fractal:
      j["fractal"] = std::string(to_string(src.fractal.kind));
      j["digit_depth"] = src.fractal.digit_depth;
      break;
    case SourceConfig::Type::System: {
      j["system"] = std::string(to_string(src.system.kind));
      json params = json::object();
      for (const auto& [name, value] : src.system.params) params[name] = value;
      j["params"] = params;
      j["transient"] = src.system.transient;
      j["sample_interval"] = src.system.sample_interval;
      j["rel_tol"] = src.system.integrator.rel_tol;
      j["abs_tol"] = src.system.integrator.abs_tol;
      break;
    }
    case SourceConfig::Type::File:
      j["file"] = src.path.string();
      j["format"] = !src.catalog ? "points" : (*src.catalog == CatalogFormat::XyzKm ? "xyz-km" : "lonlat-depth");
      if (src.min_magnitude) j["min_magnitude"] = *src.min_magnitude;
      break;
  }
  return j;
}

json method_json(const MethodConfig& m) {
  json j;
  switch (m.kind) {
    case MethodConfig::Kind::PH:
      j = {{"method", "ph"}, {"degree", m.degree}, {"alpha", m.alpha}};
      break;
    case MethodConfig::Kind::Correlation:
      j = {{"method", "corr"}, {"eps_count", m.correlation.eps_count}};
      if (m.correlation.eps_range) {
        j["eps_range"] = {m.correlation.eps_range->first, m.correlation.eps_range->second};
      }
      break;
    case MethodConfig::Kind::Box:
      j = {{"method", "box"},
           {"grid_denominator", m.box.grid_denominator},
           {"max_index", m.box.max_index},
           {"lookback", m.box.lookback}};
      break;
    case MethodConfig::Kind::Complexity:
      j = {{"method", "comp"},
           {"degree", m.degree},
           {"fit_range", {m.complexity.eps_lo, m.complexity.eps_hi}},
           {"samples", m.complexity.samples}};
      break;
  }
  j["final_only"] = m.final_only;
  return j;
}

json config_json(const ExperimentConfig& cfg) {
  json methods = json::array();
  for (const auto& m : cfg.methods) methods.push_back(method_json(m));
  return {{"source", source_json(cfg.source)},
          {"methods", methods},
          {"trials", cfg.trials},
          {"n_max", cfg.n_max},
          {"schedule", {{"n_min", cfg.n_min}, {"count", cfg.schedule_count}}},
          {"seed_root", cfg.seed_root},
          {"output_dir", cfg.output_dir.string()},
          {"threads", cfg.threads}};
}

}  // namespace

ExperimentConfig parse_experiment_config(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Parse, std::string("config: ") + e.what());
  }
  ExperimentConfig cfg;
  try {
    cfg.source = parse_source(j.at("source"));
    for (const auto& m : j.at("methods")) cfg.methods.push_back(parse_method(m));
    cfg.trials = get_or<Index>(j, "trials", cfg.trials);
    cfg.n_max = get_or<Index>(j, "n_max", cfg.n_max);
    if (j.contains("schedule")) {
      cfg.n_min = get_or<Index>(j["schedule"], "n_min", cfg.n_min);
      cfg.schedule_count = get_or<Index>(j["schedule"], "count", cfg.schedule_count);
    }
    cfg.seed_root = get_or<std::uint64_t>(j, "seed_root", cfg.seed_root);
    cfg.output_dir = get_or<std::string>(j, "output_dir", "");
    cfg.threads = get_or<unsigned>(j, "threads", 0);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidParameter, std::string("config: ") + e.what());
  }
  if (cfg.trials < 1) throw Error(ErrorKind::InvalidParameter, "trials must be at least 1");
  if (cfg.methods.empty()) throw Error(ErrorKind::InvalidParameter, "config lists no methods");
  if (cfg.n_max < 2) throw Error(ErrorKind::InvalidParameter, "n_max must be at least 2");
  return cfg;
}

std::string to_json(const ExperimentConfig& cfg) { return config_json(cfg).dump(2); }

// ---------------------------------------------------------------------------
// Reports

bool ExperimentReport::all_computed() const {
  return std::all_of(cells.begin(), cells.end(),
                     [](const ReportCell& c) { return c.computed == static_cast<Index>(c.trials.size()); });
}

const ReportCell* ExperimentReport::find(std::string_view method, Index size) const {
  for (const auto& c : cells) {
    if (c.method == method && c.size == size) return &c;
  }
  return nullptr;
}

const ReportCell* ExperimentReport::final_cell(std::string_view method) const {
  const ReportCell* best = nullptr;
  for (const auto& c : cells) {
    if (c.method == method && (!best || c.size > best->size)) best = &c;
  }
  return best;
}

void summarize(ReportCell& cell) {
  double sum = 0.0;
  Index k = 0;
  for (const auto& t : cell.trials) {
    if (t.value) {
      sum += *t.value;
      ++k;
    }
  }
  cell.computed = k;
  cell.mean = k > 0 ? sum / static_cast<double>(k) : std::numeric_limits<double>::quiet_NaN();
  cell.single_trial = k == 1;
  cell.std = 0.0;
  if (k >= 2) {
    double ss = 0.0;
    for (const auto& t : cell.trials) {
      if (t.value) ss += (*t.value - cell.mean) * (*t.value - cell.mean);
    }
    cell.std = std::sqrt(ss / static_cast<double>(k - 1));
  }
}

std::string report_to_json(const ExperimentReport& report, bool include_timings) {
  json cells = json::array();
  for (const auto& c : report.cells) {
    json values = json::array();
    json errors = json::object();
    for (std::size_t t = 0; t < c.trials.size(); ++t) {
      if (c.trials[t].value) {
        values.push_back(*c.trials[t].value);
      } else {
        values.push_back(nullptr);
        errors[std::to_string(t)] = c.trials[t].error;
      }
    }
    json cell = {{"method", c.method}, {"size", c.size}, {"computed", c.computed}, {"values", values}};
    cell["mean"] = c.computed > 0 ? json(c.mean) : json(nullptr);
    cell["std"] = c.std;
    if (c.single_trial) cell["flags"] = {"single-trial"};
    if (!errors.empty()) cell["errors"] = errors;
    cells.push_back(cell);
  }
  json out = {{"config", json::parse(report.config_json)}, {"schedule", report.schedule}, {"cells", cells}};
  if (include_timings) {
    json t = json::object();
    for (const auto& [stage, s] : report.stage_seconds) t[stage] = s;
    out["stage_seconds"] = t;
  }
  return out.dump(2);
}

void write_report_csv(std::ostream& out, const ExperimentReport& report) {
  out << "method,size,trial,estimate\n";
  char buf[32];
  for (const auto& c : report.cells) {
    for (std::size_t t = 0; t < c.trials.size(); ++t) {
      if (!c.trials[t].value) continue;
      const auto res = std::to_chars(buf, buf + sizeof buf, *c.trials[t].value);
      out << c.method << ',' << c.size << ',' << t << ',' << std::string_view(buf, res.ptr - buf) << '\n';
    }
  }
}

void save_report(const ExperimentReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream js(dir / "report.json");
  std::ofstream csv(dir / "estimates.csv");
  if (!js || !csv) throw Error(ErrorKind::Io, "cannot write report files in " + dir.string());
  js << report_to_json(report) << '\n';
  write_report_csv(csv, report);
}

// ---------------------------------------------------------------------------
// Running

PointCloud trial_cloud(const ExperimentConfig& cfg, Index trial) {
  const std::uint64_t seed = cfg.seed_root + static_cast<std::uint64_t>(trial);
  switch (cfg.source.type) {
    case SourceConfig::Type::Fractal:
      return sample_fractal(cfg.source.fractal, cfg.n_max, seed);
    case SourceConfig::Type::System: {
      SystemSpec spec = cfg.source.system;
      spec.n_points = cfg.n_max;
      return generate_trajectory(spec, seed);
    }
    case SourceConfig::Type::File: {
      PointCloud cloud = cfg.source.catalog
                             ? ingest_catalog(cfg.source.path, *cfg.source.catalog, cfg.source.min_magnitude)
                             : read_point_cloud(cfg.source.path);
      if (cloud.size() > cfg.n_max) cloud = cloud.prefix(cfg.n_max);
      return cloud;
    }
  }
  throw Error(ErrorKind::InvalidParameter, "unknown source type");
}

namespace {

using Clock = std::chrono::steady_clock;

struct Timings {
  std::mutex mutex;
  std::map<std::string, double> seconds;
  void add(const std::string& stage, Clock::time_point start) {
    const double s = std::chrono::duration<double>(Clock::now() - start).count();
    std::lock_guard lock(mutex);
    seconds[stage] += s;
  }
};

// Cell values of one trial, indexed [method][size].
using TrialGrid = std::vector<std::vector<TrialValue>>;

TrialValue failure(const std::exception& e) { return {std::nullopt, e.what()}; }

template <typename F>
TrialValue attempt(F&& f) {
  try {
    return {f(), {}};
  } catch (const std::exception& e) {
    return failure(e);
  }
}

TrialGrid run_trial(const ExperimentConfig& cfg, Index trial, const std::vector<Index>& schedule, Timings& timings) {
  const std::size_t L = schedule.size();
  TrialGrid grid(cfg.methods.size(), std::vector<TrialValue>(L));

  PointCloud cloud;
  try {
    const auto t0 = Clock::now();
    cloud = trial_cloud(cfg, trial);
    timings.add("generate", t0);
    if (cloud.size() < schedule.back()) {
      throw Error(ErrorKind::InvalidArgument, "trial cloud has " + std::to_string(cloud.size()) +
                                                  " points, schedule needs " + std::to_string(schedule.back()));
    }
  } catch (const std::exception& e) {
    for (auto& row : grid) std::fill(row.begin(), row.end(), failure(e));
    return grid;
  }

  auto wanted = [&](const MethodConfig& m, std::size_t k) { return !m.final_only || k + 1 == L; };

  // Interval lengths per degree and size, shared by PH and complexity methods.
  std::map<int, std::vector<std::optional<std::vector<double>>>> lengths;
  std::map<int, std::vector<std::string>> length_errors;
  auto ensure_lengths = [&](int degree, std::size_t k) {
    auto& per_size = lengths[degree];
    auto& errors = length_errors[degree];
    if (per_size.empty()) {
      per_size.resize(L);
      errors.resize(L);
    }
    if (per_size[k] || !errors[k].empty()) return;
    const auto t0 = Clock::now();
    try {
      per_size[k] = ph_intervals(PointsRef(cloud.head(schedule[k])), degree).finite_lengths();
    } catch (const std::exception& e) {
      errors[k] = e.what();
      if (errors[k].empty()) errors[k] = "interval computation failed";
    }
    timings.add("intervals_h" + std::to_string(degree), t0);
  };

  for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
    const MethodConfig& m = cfg.methods[mi];
    const std::string stage = m.label();
    for (std::size_t k = 0; k < L; ++k) {
      if (!wanted(m, k)) continue;
      const auto t0 = Clock::now();
      switch (m.kind) {
        case MethodConfig::Kind::PH: {
          grid[mi][k] = attempt([&] {
            std::vector<ScalingCurve::Entry> entries;
            for (std::size_t s = 0; s <= k; ++s) {
              ensure_lengths(m.degree, s);
              const auto& l = lengths[m.degree][s];
              if (!l) throw Error(ErrorKind::DegenerateData, length_errors[m.degree][s]);
              entries.push_back({static_cast<double>(schedule[s]), e_alpha(std::span<const double>(*l), m.alpha)});
            }
            const DimensionEstimate est = ph_dimension_from_curve(ScalingCurve(std::move(entries)), m.alpha);
            if (est.infinite) throw Error(ErrorKind::DegenerateData, "infinite dimension: fitted slope >= 1");
            return est.dimension;
          });
          break;
        }
        case MethodConfig::Kind::Correlation:
          grid[mi][k] = attempt([&] {
            return correlation_dimension(cloud.prefix(schedule[k]), m.correlation).dimension;
          });
          break;
        case MethodConfig::Kind::Box:
          grid[mi][k] = attempt([&] {
            BoxDimConfig box = m.box;
            box.prefix_sizes.assign(schedule.begin(), schedule.begin() + static_cast<std::ptrdiff_t>(k + 1));
            return box_dimension(cloud.prefix(schedule[k]), box).dimension;
          });
          break;
        case MethodConfig::Kind::Complexity:
          grid[mi][k] = attempt([&] {
            ensure_lengths(m.degree, k);
            const auto& l = lengths[m.degree][k];
            if (!l) throw Error(ErrorKind::DegenerateData, length_errors[m.degree][k]);
            IntervalSet set;
            set.degree = m.degree;
            for (double len : *l) set.intervals.push_back({0.0, len});
            return ph_complexity(set, m.complexity).complexity;
          });
          break;
      }
      timings.add(stage, t0);
    }
  }
  return grid;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  if (cfg.trials < 1) throw Error(ErrorKind::InvalidParameter, "trials must be at least 1");
  if (cfg.methods.empty()) throw Error(ErrorKind::InvalidParameter, "no methods configured");

  ExperimentReport report;
  report.config_json = to_json(cfg);

  Index n = cfg.n_max;
  if (cfg.source.type == SourceConfig::Type::File) n = std::min(n, trial_cloud(cfg, 0).size());
  report.schedule = subsample_schedule(n, std::min(cfg.n_min, n), cfg.schedule_count);
  const std::size_t L = report.schedule.size();

  std::vector<TrialGrid> grids(static_cast<std::size_t>(cfg.trials));
  Timings timings;
  std::atomic<Index> next{0};
  auto worker = [&] {
    for (Index t = next++; t < cfg.trials; t = next++) {
      grids[static_cast<std::size_t>(t)] = run_trial(cfg, t, report.schedule, timings);
    }
  };
  unsigned threads = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<Index>(threads, cfg.trials));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
    const MethodConfig& m = cfg.methods[mi];
    for (std::size_t k = 0; k < L; ++k) {
      if (m.final_only && k + 1 != L) continue;
      ReportCell cell;
      cell.method = m.label();
      cell.size = report.schedule[k];
      for (const auto& grid : grids) cell.trials.push_back(grid[mi][k]);
      summarize(cell);
      report.cells.push_back(std::move(cell));
    }
  }
  report.stage_seconds.assign(timings.seconds.begin(), timings.seconds.end());
  return report;
}

std::vector<ExperimentReport> alpha_sweep(const ExperimentConfig& cfg, const std::vector<double>& alphas, int degree) {
  ExperimentConfig sweep = cfg;
  sweep.methods.clear();
  for (const double a : alphas) {
    MethodConfig m;
    m.kind = MethodConfig::Kind::PH;
    m.degree = degree;
    m.alpha = a;
    sweep.methods.push_back(m);
  }
  const ExperimentReport all = run_experiment(sweep);
  std::vector<ExperimentReport> out;
  for (const MethodConfig& m : sweep.methods) {
    ExperimentReport r;
    ExperimentConfig single = sweep;
    single.methods = {m};
    r.config_json = to_json(single);
    r.schedule = all.schedule;
    r.stage_seconds = all.stage_seconds;
    for (const auto& c : all.cells) {
      if (c.method == m.label()) r.cells.push_back(c);
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace fracdim
