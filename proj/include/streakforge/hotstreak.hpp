#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace streakforge {

/// Generative setup: impacts are Normal(gamma0, sigma), raised by delta while
/// a pulse of `duration` papers is running.
struct GenParams {
  double gamma0 = 0.0;
  double sigma = 1.0;
  double delta = 1.0;
  std::size_t duration = 12;
  std::size_t n_total = 60;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Durations given in years map to papers at a fixed publication rate.
std::size_t papers_for_years(double years, double papers_per_year = 3.0);

std::vector<double> simulate_null(const GenParams& params);
/// Pulse on [onset, onset + duration). Without an onset, one is drawn uniformly
/// from the seeded stream.
std::vector<double> simulate_hotstreak(const GenParams& params, std::optional<std::size_t> onset = std::nullopt);
/// Null sequence with `height` added at a single index.
std::vector<double> simulate_spike(const GenParams& params, std::size_t spike_idx, double height);

/// max(5, round(wsr * n_total)); wsr = 0 returns 1 (no smoothing).
std::size_t window_size(std::size_t n_total, double wsr);
/// Centred moving mean with window w: [i - h_l, i + h_r], h_l = (w-1)/2,
/// h_r = w - 1 - h_l, truncated at the sequence ends.
std::vector<double> centered_mean(std::span<const double> values, std::size_t window);
/// Gamma(N) smoothing with window_size(n, wsr); wsr = 0 passes values through.
std::vector<double> moving_average(std::span<const double> impacts, double wsr);

/// Square pulse over the inclusive index range [n_up, n_down].
struct Pulse {
  double hot = 0.0;
  std::size_t n_up = 0;
  std::size_t n_down = 0;

  std::size_t length() const noexcept { return n_down - n_up + 1; }
  bool operator==(const Pulse&) const = default;
};

struct PulseFit {
  double base = 0.0;
  std::vector<Pulse> pulses;
  double objective = 0.0;
  double wsr = 0.0;
  std::size_t restarts_used = 0;
  /// Objective after every local-search round, per restart (only when requested).
  std::vector<std::vector<double>> trace;

  std::size_t active_pulses(double epsilon_active) const;
};

/// Fitted curve value at every index.
std::vector<double> pulse_curve(const PulseFit& fit, std::size_t n);
/// Sum of squared residuals plus lambda * sum of (hot - base).
double fit_objective(std::span<const double> values, const PulseFit& fit, double lambda);

/// One pulse, exhaustive over every (n_up, n_down) that leaves at least one
/// point outside. Levels are the inside and outside means, both falling back
/// to the overall mean when the inside mean is below the outside one.
/// Ties go to the shorter pulse, then the earlier n_up.
PulseFit fit_simple(std::span<const double> values);

struct FullFitOptions {
  double lambda = 1.0;
  std::size_t restarts = 20;
  std::uint64_t seed = 0;
  bool record_trace = false;
};

/// Up to three pulses, minimising squared error plus lambda * sum(hot_j - base).
/// Breakpoints are improved by coordinate line searches and whole-pulse shifts
/// from seeded random starts plus the fit_simple solution; levels are solved
/// exactly for each breakpoint set. Pulses with hot <= base are dropped and
/// touching pulses on equal levels are merged in the result.
PulseFit fit_full(std::span<const double> values, const FullFitOptions& options = {});

enum class FitterKind { Simple, Full };

struct ArtifactOptions {
  FitterKind fitter = FitterKind::Simple;
  FullFitOptions full;
  double epsilon_active = 0.1;
};

struct ArtifactRow {
  double wsr = 0.0;
  double mean_relative_length = 0.0;
  double mean_height = 0.0;
  std::size_t careers = 0;
};

/// Relative length (n_down - n_up + 1) / n_total.
double relative_length(const Pulse& pulse, std::size_t n_total);

/// The pulse that stands for the streak in a fit: for one-pulse fits the pulse
/// itself; otherwise the run of touching active pulses with the largest
/// elevation * length, reported as one pulse with its length-weighted level.
std::optional<Pulse> dominant_pulse(const PulseFit& fit, double epsilon_active);

/// Smooths every career at each wsr, fits, and averages the dominant pulse's
/// relative length and height (hot - base). Careers with no pulse count as
/// length 0, height 0.
std::vector<ArtifactRow> wsr_artifact_study(std::span<const std::vector<double>> careers,
                                            std::span<const double> wsr_list, const ArtifactOptions& options = {});

/// Relative onsets n_up / (n_total - 1) of the active pulses.
std::vector<double> model_onsets(const PulseFit& fit, std::size_t n_total, double epsilon_active);

struct OnsetConfusion {
  std::size_t both = 0;
  std::size_t model_only = 0;
  std::size_t data_only = 0;

  OnsetConfusion& operator+=(const OnsetConfusion& o);
  bool operator==(const OnsetConfusion&) const = default;
};

/// Greedy closest-pair matching of one author's onsets, each onset used at
/// most once; a pair matches when |a - b| <= tol.
OnsetConfusion onset_confusion(std::span<const double> model, std::span<const double> data, double tol = 0.1);

/// Header "author_id,wsr,base,hot1,nu1,nd1,hot2,nu2,nd2,hot3,nu3,nd3,objective,active_pulses".
void write_fit_header(std::ostream& out);
void write_fit_row(std::ostream& out, const std::string& author_id, const PulseFit& fit, double epsilon_active);

}  // namespace streakforge
