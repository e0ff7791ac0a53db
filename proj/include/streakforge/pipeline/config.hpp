#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "streakforge/detect.hpp"
#include "streakforge/pipeline/synthetic.hpp"

namespace streakforge {

enum class FieldSource { Cluster, Input };
enum class ImpactScale { Log, Linear };

struct PipelineConfig {
  std::filesystem::path papers_path;
  std::filesystem::path citations_path;
  std::filesystem::path out_dir = "out";

  std::uint64_t seed = 42;
  std::size_t workers = 1;

  // author filter
  int min_papers = 30;
  int min_years = 20;
  int cutoff_year = 2013;  // papers from this year on are dropped

  // fields
  FieldSource field_source = FieldSource::Cluster;
  double field_gamma = 1e-5;
  std::size_t field_min_size = 1000;

  double k_percent = 10.0;
  ImpactScale fit_scale = ImpactScale::Log;

  std::vector<DetectionParams> detection{{1, 1, 10.0}, {2, 3, 10.0}, {3, 5, 10.0}, {5, 9, 10.0}};
  DetectionParams primary{3, 5, 10.0};  // drives windows, fits and statistics

  bool require_first_flag = false;
  std::size_t big_project_threshold = 10;
  bool small_team_filter = true;

  std::size_t bins = 10;
  std::size_t joint_bins = 20;
  std::size_t min_field_count = 100;
  double stage_early = 0.2;  // early / late cut-offs for the overlap and disruption views
  double stage_late = 0.8;
  double top_quantile = 0.9;

  std::vector<double> wsr{0.0, 0.1};
  double lambda = 1.0;
  std::size_t restarts = 20;
  double epsilon_active = 0.1;
  double confusion_tol = 0.1;

  std::vector<std::string> report_authors;

  SyntheticSpec synth;

  void validate() const;  // throws PreconditionError
  /// Canonical JSON of everything that can change outputs (paths of the
  /// output directory and the worker count are left out).
  std::string canonical_json() const;
  std::string hash() const;
  /// Canonical JSON of the settings the cached corpus depends on.
  std::string ingest_json() const;
};

/// Reads a YAML config; missing keys keep their defaults. Throws
/// PreconditionError on unknown keys or invalid values.
PipelineConfig load_config(const std::filesystem::path& path);
PipelineConfig parse_config(const std::string& yaml_text);

}  // namespace streakforge
