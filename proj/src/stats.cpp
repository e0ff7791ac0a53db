#include "streakforge/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "streakforge/error.hpp"

namespace streakforge {

std::size_t bin_of(double x, std::size_t bins) {
  if (bins == 0) throw PreconditionError("bin_of: bins must be positive");
  if (!(x >= 0.0 && x <= 1.0)) throw PreconditionError("bin_of: value outside [0, 1]");
  const auto b = static_cast<std::size_t>(std::floor(x * static_cast<double>(bins)));
  return std::min(b, bins - 1);
}

double BinnedDensity::flat_standard_error() const {
  if (total == 0) return 0.0;
  return std::sqrt(static_cast<double>(bins() - 1) / static_cast<double>(total));
}

BinnedDensity onset_density(std::span<const double> onsets, std::size_t bins) {
  BinnedDensity d;
  d.edges.resize(bins + 1);
  for (std::size_t b = 0; b <= bins; ++b) d.edges[b] = static_cast<double>(b) / static_cast<double>(bins);
  d.counts.assign(bins, 0);
  d.density.assign(bins, 0.0);
  for (const double x : onsets) ++d.counts[bin_of(x, bins)];
  d.total = onsets.size();
  if (d.total == 0) return d;
  for (std::size_t b = 0; b < bins; ++b)
    d.density[b] = static_cast<double>(d.counts[b]) / (static_cast<double>(d.total) * d.width(b));
  return d;
}

BinnedCurve binned_metric_curve(std::span<const std::pair<double, double>> points, std::size_t bins) {
  std::vector<std::vector<double>> by_bin(bins);
  for (const auto& [t, v] : points) by_bin[bin_of(t, bins)].push_back(v);
  BinnedCurve curve;
  curve.bins.resize(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    const auto& vals = by_bin[b];
    auto& out = curve.bins[b];
    out.count = vals.size();
    if (vals.empty()) continue;
    const double n = static_cast<double>(vals.size());
    const double mean = std::accumulate(vals.begin(), vals.end(), 0.0) / n;
    out.mean = mean;
    if (vals.size() < 2) continue;
    double ss = 0.0;
    for (const double v : vals) ss += (v - mean) * (v - mean);
    const double se = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
    out.standard_error = se;
    out.ci_half_width = 1.96 * se;
  }
  return curve;
}

RatioMatrix joint_probability_map(std::span<const std::pair<double, double>> pairs, std::size_t bins) {
  std::vector<std::vector<std::size_t>> joint(bins, std::vector<std::size_t>(bins, 0));
  std::vector<std::size_t> row(bins, 0);
  std::vector<std::size_t> col(bins, 0);
  for (const auto& [x1, x2] : pairs) {
    const std::size_t i = bin_of(x1, bins);
    const std::size_t j = bin_of(x2, bins);
    ++joint[i][j];
    ++row[i];
    ++col[j];
  }
  RatioMatrix out(bins, std::vector<std::optional<double>>(bins));
  const double n = static_cast<double>(pairs.size());
  for (std::size_t i = 0; i < bins; ++i) {
    for (std::size_t j = 0; j < bins; ++j) {
      if (row[i] == 0 || col[j] == 0) continue;
      const double p = static_cast<double>(joint[i][j]) / n;
      out[i][j] = p / ((static_cast<double>(row[i]) / n) * (static_cast<double>(col[j]) / n));
    }
  }
  return out;
}

std::vector<std::optional<double>> temporal_distance_ratio(std::span<const double> dx_real,
                                                           std::span<const double> dx_shuffled, std::size_t bins) {
  const BinnedDensity real = onset_density(dx_real, bins);
  const BinnedDensity shuf = onset_density(dx_shuffled, bins);
  std::vector<std::optional<double>> out(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    if (shuf.density[b] > 0.0) out[b] = real.density[b] / shuf.density[b];
  }
  return out;
}

double threshold_value(std::span<const double> values, const StreakThreshold& threshold) {
  if (values.empty()) throw PreconditionError("threshold_value: no values");
  std::vector<double> v(values.begin(), values.end());
  const std::size_t n = v.size();
  switch (threshold.kind) {
    case ThresholdKind::Mean:
      return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(n);
    case ThresholdKind::Median: {
      std::sort(v.begin(), v.end());
      return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
    }
    case ThresholdKind::TopQuantile: {
      if (!(threshold.q > 0.0 && threshold.q <= 1.0)) throw PreconditionError("threshold_value: q outside (0, 1]");
      std::sort(v.begin(), v.end());
      const auto rank = static_cast<std::size_t>(std::ceil(threshold.q * static_cast<double>(n)));
      return v[std::clamp<std::size_t>(rank, 1, n) - 1];
    }
  }
  return 0.0;
}

std::size_t max_streak_length(std::span<const double> impacts, const StreakThreshold& threshold) {
  const double t = threshold_value(impacts, threshold);
  std::size_t best = 0;
  std::size_t run = 0;
  for (const double x : impacts) {
    run = x > t ? run + 1 : 0;
    best = std::max(best, run);
  }
  return best;
}

std::map<int, FieldEarlyLate> field_early_late(const std::map<int, std::vector<double>>& onsets_by_field,
                                               std::size_t min_count, double early, double late) {
  std::map<int, FieldEarlyLate> out;
  for (const auto& [field, onsets] : onsets_by_field) {
    if (onsets.size() < min_count || onsets.empty()) continue;
    FieldEarlyLate r;
    r.onsets = onsets.size();
    const double n = static_cast<double>(onsets.size());
    r.early_mass = static_cast<double>(std::count_if(onsets.begin(), onsets.end(), [&](double x) { return x < early; })) / n;
    r.late_mass = static_cast<double>(std::count_if(onsets.begin(), onsets.end(), [&](double x) { return x >= late; })) / n;
    r.early_density = r.early_mass / early;
    r.late_density = r.late_mass / (1.0 - late);
    out.emplace(field, r);
  }
  return out;
}

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
  if (a.empty() && b.empty()) return 0.0;
  std::size_t inter = 0;
  for (const auto& x : a) inter += b.contains(x) ? 1 : 0;
  return static_cast<double>(inter) / static_cast<double>(a.size() + b.size() - inter);
}

int career_length_bucket(Month first_month, Month last_month) {
  return (last_month - first_month) / 12 / 5;
}

std::map<int, YearView> onset_year_views(std::span<const OnsetEvent> events) {
  std::map<int, YearView> out;
  for (const auto& e : events) {
    if (e.onset_month < e.first_month || e.onset_month > e.last_month)
      throw PreconditionError("onset_year_views: onset outside the career");
    auto& view = out[career_length_bucket(e.first_month, e.last_month)];
    ++view.years_from_start[(e.onset_month - e.first_month) / 12];
    ++view.years_to_end[(e.last_month - e.onset_month) / 12];
  }
  return out;
}

}  // namespace streakforge
