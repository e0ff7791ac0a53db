#pragma once

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "streakforge/corpus.hpp"

namespace streakforge {

/// Bin of x in [0, 1] among `bins` equal bins; right-open except the last.
std::size_t bin_of(double x, std::size_t bins);

/// Histogram over [0, 1] scaled so that a uniform sample reads 1 everywhere.
struct BinnedDensity {
  std::vector<double> edges;  // bins + 1 values
  std::vector<double> density;
  std::vector<std::size_t> counts;
  std::size_t total = 0;

  std::size_t bins() const noexcept { return counts.size(); }
  double width(std::size_t b) const { return edges[b + 1] - edges[b]; }
  /// Standard error of a bin's density under a flat null: sqrt((B - 1) / n).
  double flat_standard_error() const;
};

BinnedDensity onset_density(std::span<const double> onsets, std::size_t bins = 10);

struct BinnedCurve {
  struct Bin {
    std::size_t count = 0;
    std::optional<double> mean;
    std::optional<double> standard_error;  // needs at least 2 points
    std::optional<double> ci_half_width;   // 1.96 * SE
  };
  std::vector<Bin> bins;
};

BinnedCurve binned_metric_curve(std::span<const std::pair<double, double>> points, std::size_t bins = 10);

/// P(x1, x2) / (P(x1) P(x2)) per cell, row = bin of x1; nullopt where the
/// marginal product is 0.
using RatioMatrix = std::vector<std::vector<std::optional<double>>>;
RatioMatrix joint_probability_map(std::span<const std::pair<double, double>> pairs, std::size_t bins = 20);

/// Per-bin ratio of the real and shuffled densities; nullopt where the
/// shuffled density is 0.
std::vector<std::optional<double>> temporal_distance_ratio(std::span<const double> dx_real,
                                                           std::span<const double> dx_shuffled, std::size_t bins = 10);

enum class ThresholdKind { Median, Mean, TopQuantile };

struct StreakThreshold {
  ThresholdKind kind = ThresholdKind::Median;
  double q = 0.9;  // for TopQuantile
};

/// Median (mean of the middle pair for even n), mean, or nearest-rank
/// q-quantile (value at rank ceil(q * n)).
double threshold_value(std::span<const double> values, const StreakThreshold& threshold);
/// Longest run of values strictly above the threshold.
std::size_t max_streak_length(std::span<const double> impacts, const StreakThreshold& threshold);

struct FieldEarlyLate {
  std::size_t onsets = 0;
  double early_mass = 0.0;  // share of onsets with x < early
  double late_mass = 0.0;   // share with x >= late
  double early_density = 0.0;
  double late_density = 0.0;
};

/// Fields with fewer than min_count onsets are left out.
std::map<int, FieldEarlyLate> field_early_late(const std::map<int, std::vector<double>>& onsets_by_field,
                                               std::size_t min_count = 100, double early = 0.1, double late = 0.9);

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b);

struct OnsetEvent {
  Month onset_month = 0;
  Month first_month = 0;  // career bounds
  Month last_month = 0;
};

struct YearView {
  std::map<int, std::size_t> years_from_start;
  std::map<int, std::size_t> years_to_end;
};

/// Career length group (5-year buckets: 0 = [0,5), 1 = [5,10), ...).
int career_length_bucket(Month first_month, Month last_month);
/// Per career-length group, histograms of whole years from career start to
/// onset and from onset to career end.
std::map<int, YearView> onset_year_views(std::span<const OnsetEvent> events);

}  // namespace streakforge
