#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fracdim/core.hpp"
#include "fracdim/dynamics.hpp"
#include "fracdim/estimators.hpp"
#include "fracdim/samplers.hpp"

namespace fracdim {

enum class CatalogFormat { XyzKm, LonLatDepth };

std::optional<CatalogFormat> parse_catalog_format(std::string_view name);

/// Three columns (x y z, or lon lat depth) plus an optional fourth
/// magnitude column. With a threshold, rows with magnitude below it are
/// dropped. lonlat-depth is projected equirectangularly about the centroid
/// of the kept rows with R = 6371 km.
PointCloud ingest_catalog(const std::filesystem::path& path, CatalogFormat format,
                          std::optional<double> min_magnitude = std::nullopt);
PointCloud ingest_catalog(std::istream& in, CatalogFormat format,
                          std::optional<double> min_magnitude = std::nullopt, std::string label = {});

struct SourceConfig {
  enum class Type { Fractal, System, File };
  Type type = Type::Fractal;
  FractalSpec fractal;
  SystemSpec system;
  std::filesystem::path path;
  std::optional<CatalogFormat> catalog;  // unset: plain point file
  std::optional<double> min_magnitude;
};

struct MethodConfig {
  enum class Kind { PH, Correlation, Box, Complexity };
  Kind kind = Kind::PH;
  int degree = 0;      // PH, complexity
  double alpha = 1.0;  // PH
  CorrDimConfig correlation;
  BoxDimConfig box;    // prefix_sizes are taken from the schedule
  ComplexityConfig complexity;
  /// Evaluate only at the largest schedule size.
  bool final_only = false;

  /// Short name used in reports, e.g. "ph0_a1", "corr", "box", "comp1".
  std::string label() const;
};

struct ExperimentConfig {
  SourceConfig source;
  std::vector<MethodConfig> methods;
  Index trials = 10;
  Index n_max = 100'000;
  Index n_min = 1000;
  Index schedule_count = 100;
  std::uint64_t seed_root = 0;
  std::filesystem::path output_dir;
  unsigned threads = 0;  // 0: hardware concurrency
};

/// JSON mirror of ExperimentConfig. Throws Parse on malformed JSON and
/// InvalidParameter on bad values.
ExperimentConfig parse_experiment_config(std::string_view json_text);
std::string to_json(const ExperimentConfig& cfg);

struct TrialValue {
  std::optional<double> value;
  std::string error;  // set when value is empty
};

struct ReportCell {
  std::string method;
  Index size = 0;
  std::vector<TrialValue> trials;
  Index computed = 0;
  double mean = 0.0;
  double std = 0.0;  // unbiased; 0 with single_trial set when computed == 1
  bool single_trial = false;
};

struct ExperimentReport {
  std::string config_json;
  std::vector<Index> schedule;
  std::vector<ReportCell> cells;
  std::vector<std::pair<std::string, double>> stage_seconds;  // wall clock, summed over trials

  bool all_computed() const;
  const ReportCell* find(std::string_view method, Index size) const;
  /// The cell at the largest size for `method`.
  const ReportCell* final_cell(std::string_view method) const;
};

/// Per-trial point clouds come from seed_root + trial. Estimator failures are
/// stored in the affected cells; nothing aborts the run. PH estimates at the
/// k-th schedule size fit the upper half of the first k sizes, so the final
/// size reproduces ph_dimension on the whole schedule.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

/// One report per alpha, all PH of the given degree. Interval sets are
/// computed once per trial and size and shared by every alpha.
std::vector<ExperimentReport> alpha_sweep(const ExperimentConfig& cfg, const std::vector<double>& alphas,
                                          int degree = 0);

/// Recomputes mean and std of every cell from its stored trial values.
void summarize(ReportCell& cell);

std::string report_to_json(const ExperimentReport& report, bool include_timings = true);
/// Flat rows: method,size,trial,estimate (computed values only).
void write_report_csv(std::ostream& out, const ExperimentReport& report);
/// Writes report.json and estimates.csv into `dir`, creating it if needed.
void save_report(const ExperimentReport& report, const std::filesystem::path& dir);

/// The point cloud of one trial, as run_experiment builds it.
PointCloud trial_cloud(const ExperimentConfig& cfg, Index trial);

}  // namespace fracdim
