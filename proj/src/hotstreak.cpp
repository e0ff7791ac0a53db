#include "streakforge/hotstreak.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include <fmt/format.h>

#include "streakforge/error.hpp"
#include "streakforge/random.hpp"

namespace streakforge {

void GenParams::validate() const {
  if (n_total < 1) throw PreconditionError("GenParams: n_total must be positive");
  if (duration < 1 || duration > n_total)
    throw PreconditionError(fmt::format("GenParams: duration {} must lie in [1, {}]", duration, n_total));
  if (!(sigma >= 0.0)) throw PreconditionError("GenParams: sigma must be nonnegative");
}

std::size_t papers_for_years(double years, double papers_per_year) {
  if (!(years >= 0.0) || !(papers_per_year > 0.0)) throw PreconditionError("papers_for_years: bad arguments");
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(years * papers_per_year)));
}

std::vector<double> simulate_null(const GenParams& params) {
  params.validate();
  Rng rng(params.seed);
  std::vector<double> out(params.n_total);
  for (auto& v : out) v = rng.normal(params.gamma0, params.sigma);
  return out;
}

std::vector<double> simulate_hotstreak(const GenParams& params, std::optional<std::size_t> onset) {
  params.validate();
  Rng rng(params.seed);
  const std::size_t last_start = params.n_total - params.duration;
  const std::size_t start = onset ? *onset : rng.uniform_index(last_start + 1);
  if (start > last_start)
    throw PreconditionError(fmt::format("simulate_hotstreak: onset {} + duration {} exceeds N_T = {}", start,
                                        params.duration, params.n_total));
  std::vector<double> out(params.n_total);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const bool hot = i >= start && i < start + params.duration;
    out[i] = rng.normal(params.gamma0 + (hot ? params.delta : 0.0), params.sigma);
  }
  return out;
}

std::vector<double> simulate_spike(const GenParams& params, std::size_t spike_idx, double height) {
  if (spike_idx >= params.n_total) throw PreconditionError("simulate_spike: index outside the career");
  std::vector<double> out = simulate_null(params);
  out[spike_idx] += height;
  return out;
}

std::size_t window_size(std::size_t n_total, double wsr) {
  if (!(wsr >= 0.0)) throw PreconditionError("window_size: wsr must be nonnegative");
  if (wsr == 0.0) return 1;
  const auto scaled = static_cast<std::size_t>(std::llround(wsr * static_cast<double>(n_total)));
  return std::max<std::size_t>(5, scaled);
}

std::vector<double> centered_mean(std::span<const double> values, std::size_t window) {
  if (window < 1) throw PreconditionError("centered_mean: window must be positive");
  const std::size_t n = values.size();
  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + values[i];
  const std::size_t h_l = (window - 1) / 2;
  const std::size_t h_r = window - 1 - h_l;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= h_l ? i - h_l : 0;
    const std::size_t hi = std::min(n - 1, i + h_r);
    out[i] = (prefix[hi + 1] - prefix[lo]) / static_cast<double>(hi - lo + 1);
  }
  return out;
}

std::vector<double> moving_average(std::span<const double> impacts, double wsr) {
  if (wsr == 0.0) return {impacts.begin(), impacts.end()};
  return centered_mean(impacts, window_size(impacts.size(), wsr));
}

std::size_t PulseFit::active_pulses(double epsilon_active) const {
  return static_cast<std::size_t>(
      std::count_if(pulses.begin(), pulses.end(), [&](const Pulse& p) { return p.hot - base > epsilon_active; }));
}

std::vector<double> pulse_curve(const PulseFit& fit, std::size_t n) {
  std::vector<double> out(n, fit.base);
  for (const auto& p : fit.pulses) {
    for (std::size_t i = p.n_up; i <= p.n_down && i < n; ++i) out[i] = p.hot;
  }
  return out;
}

double fit_objective(std::span<const double> values, const PulseFit& fit, double lambda) {
  const auto curve = pulse_curve(fit, values.size());
  double sse = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) sse += (values[i] - curve[i]) * (values[i] - curve[i]);
  double penalty = 0.0;
  for (const auto& p : fit.pulses) penalty += p.hot - fit.base;
  return sse + lambda * penalty;
}

namespace {

// Prefix sums of the mean-centred sequence; centring keeps the objective
// differences well conditioned.
struct Prefix {
  double mean = 0.0;
  std::vector<double> s;
  std::vector<double> q;

  explicit Prefix(std::span<const double> values) : s(values.size() + 1, 0.0), q(values.size() + 1, 0.0) {
    mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double y = values[i] - mean;
      s[i + 1] = s[i] + y;
      q[i + 1] = q[i] + y * y;
    }
  }
  std::size_t n() const { return s.size() - 1; }
  double sum(std::size_t lo, std::size_t hi) const { return s[hi] - s[lo]; }  // [lo, hi)
  double sq(std::size_t lo, std::size_t hi) const { return q[hi] - q[lo]; }
};

double tie_tolerance(const Prefix& pre) { return 1e-10 * (1.0 + pre.q.back()); }

}  // namespace

PulseFit fit_simple(std::span<const double> values) {
  if (values.size() < 3) throw PreconditionError("fit_simple: need at least 3 values");
  const Prefix pre(values);
  const std::size_t n = pre.n();
  const double s_tot = pre.s.back();
  const double q_tot = pre.q.back();
  const double flat = q_tot - s_tot * s_tot / static_cast<double>(n);
  const double tol = tie_tolerance(pre);

  double best = std::numeric_limits<double>::infinity();
  std::size_t best_u = 0;
  std::size_t best_d = 0;
  std::size_t best_len = n + 1;
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t d = u; d < n; ++d) {
      const std::size_t n_in = d - u + 1;
      if (n_in == n) continue;
      const std::size_t n_out = n - n_in;
      const double s_in = pre.sum(u, d + 1);
      const double s_out = s_tot - s_in;
      double obj = flat;
      if (s_in / static_cast<double>(n_in) >= s_out / static_cast<double>(n_out))
        obj = q_tot - s_in * s_in / static_cast<double>(n_in) - s_out * s_out / static_cast<double>(n_out);
      const bool better = obj < best - tol;
      const bool tied = !better && obj <= best + tol;
      if (better || (tied && n_in < best_len)) {
        best = obj;
        best_u = u;
        best_d = d;
        best_len = n_in;
      }
    }
  }
  const std::size_t n_in = best_d - best_u + 1;
  const double s_in = pre.sum(best_u, best_d + 1);
  double hot = s_in / static_cast<double>(n_in);
  double base = (s_tot - s_in) / static_cast<double>(n - n_in);
  if (hot < base) hot = base = s_tot / static_cast<double>(n);

  PulseFit fit;
  fit.base = pre.mean + base;
  fit.pulses.push_back({pre.mean + hot, best_u, best_d});
  fit.objective = std::max(0.0, best);
  fit.restarts_used = 1;
  return fit;
}

namespace {

// Breakpoints of three ordered pulses as six strictly increasing integers in
// [0, n + 3): u1 = q0, d1 = q1 - 1, u2 = q2 - 1, d2 = q3 - 2, u3 = q4 - 2, d3 = q5 - 3.
using Breaks = std::array<std::size_t, 6>;

struct Bounds {
  std::size_t lo[3];
  std::size_t hi[3];  // exclusive
};

Bounds pulse_bounds(const Breaks& q) {
  return {{q[0], q[2] - 1, q[4] - 2}, {q[1], q[3] - 1, q[5] - 2}};
}

Breaks breaks_from(const std::array<std::pair<std::size_t, std::size_t>, 3>& pulses) {
  return {pulses[0].first,     pulses[0].second + 1, pulses[1].first + 1,
          pulses[1].second + 2, pulses[2].first + 2,  pulses[2].second + 3};
}

struct Solution {
  double objective = std::numeric_limits<double>::infinity();
  double base = 0.0;
  std::array<double, 3> hot{};
  unsigned mask = 0;  // pulses whose level is above base
};

class FullObjective {
 public:
  FullObjective(const Prefix& pre, double lambda) : pre_(pre), lambda_(lambda) {}

  Solution solve(const Breaks& q) const {
    const Bounds b = pulse_bounds(q);
    double n_j[3];
    double s_j[3];
    double q_j[3];
    double n_o = static_cast<double>(pre_.n());
    double s_o = pre_.s.back();
    double q_o = pre_.q.back();
    for (int j = 0; j < 3; ++j) {
      n_j[j] = static_cast<double>(b.hi[j] - b.lo[j]);
      s_j[j] = pre_.sum(b.lo[j], b.hi[j]);
      q_j[j] = pre_.sq(b.lo[j], b.hi[j]);
      n_o -= n_j[j];
      s_o -= s_j[j];
      q_o -= q_j[j];
    }
    Solution best;
    for (unsigned mask = 0; mask < 8; ++mask) {
      double n_b = n_o;
      double t = s_o;
      double q_b = q_o;
      int active = 0;
      for (int j = 0; j < 3; ++j) {
        if (mask & (1u << j)) {
          ++active;
        } else {
          n_b += n_j[j];
          t += s_j[j];
          q_b += q_j[j];
        }
      }
      if (n_b == 0.0) continue;
      const double base = t / n_b + lambda_ * active / (2.0 * n_b);
      double obj = q_b - 2.0 * base * t + n_b * base * base;
      std::array<double, 3> hot{base, base, base};
      bool feasible = true;
      for (int j = 0; j < 3 && feasible; ++j) {
        if (!(mask & (1u << j))) continue;
        const double h = s_j[j] / n_j[j] - lambda_ / (2.0 * n_j[j]);
        if (h < base) {
          feasible = false;
          break;
        }
        hot[j] = h;
        obj += q_j[j] - 2.0 * h * s_j[j] + n_j[j] * h * h + lambda_ * (h - base);
      }
      if (feasible && obj < best.objective) best = {obj, base, hot, mask};
    }
    return best;
  }

 private:
  const Prefix& pre_;
  double lambda_;
};

struct SearchResult {
  Breaks q;
  Solution sol;
  std::vector<double> trace;
};

SearchResult local_search(const FullObjective& f, Breaks q, std::size_t n, bool record_trace) {
  constexpr double kMinGain = 1e-12;
  const std::size_t top = n + 2;  // largest allowed breakpoint value
  SearchResult r{q, f.solve(q), {}};
  if (record_trace) r.trace.push_back(r.sol.objective);
  bool improved = true;
  while (improved) {
    improved = false;
    for (int t = 0; t < 6; ++t) {
      const std::size_t lo = t == 0 ? 0 : r.q[t - 1] + 1;
      const std::size_t hi = t == 5 ? top : r.q[t + 1] - 1;
      Breaks trial = r.q;
      for (std::size_t v = lo; v <= hi; ++v) {
        if (v == r.q[t]) continue;
        trial[t] = v;
        const Solution s = f.solve(trial);
        if (s.objective < r.sol.objective - kMinGain) {
          r.sol = s;
          r.q = trial;
          improved = true;
        }
      }
    }
    for (int j = 0; j < 3; ++j) {
      const std::size_t a = r.q[2 * j];
      const std::size_t b = r.q[2 * j + 1];
      const std::size_t lo = j == 0 ? 0 : r.q[2 * j - 1] + 1;
      const std::size_t hi = j == 2 ? top : r.q[2 * j + 2] - 1;
      const std::ptrdiff_t d_min = static_cast<std::ptrdiff_t>(lo) - static_cast<std::ptrdiff_t>(a);
      const std::ptrdiff_t d_max = static_cast<std::ptrdiff_t>(hi) - static_cast<std::ptrdiff_t>(b);
      Breaks base_q = r.q;
      for (std::ptrdiff_t d = d_min; d <= d_max; ++d) {
        if (d == 0) continue;
        Breaks trial = base_q;
        trial[2 * j] = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(a) + d);
        trial[2 * j + 1] = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(b) + d);
        const Solution s = f.solve(trial);
        if (s.objective < r.sol.objective - kMinGain) {
          r.sol = s;
          r.q = trial;
          improved = true;
        }
      }
    }
    if (record_trace) r.trace.push_back(r.sol.objective);
  }
  return r;
}

Breaks random_breaks(Rng& rng, std::size_t n) {
  const std::size_t range = n + 3;
  Breaks q{};
  std::size_t filled = 0;
  while (filled < 6) {
    const std::size_t v = rng.uniform_index(range);
    if (std::find(q.begin(), q.begin() + static_cast<std::ptrdiff_t>(filled), v) ==
        q.begin() + static_cast<std::ptrdiff_t>(filled))
      q[filled++] = v;
  }
  std::sort(q.begin(), q.end());
  return q;
}

// Places the fit_simple pulse plus two single-point pulses on free indices.
Breaks warm_start(std::span<const double> values) {
  const PulseFit simple = fit_simple(values);
  const std::size_t n = values.size();
  const Pulse& p = simple.pulses.front();
  std::vector<std::pair<std::size_t, std::size_t>> pulses{{p.n_up, p.n_down}};
  for (std::size_t i = 0; i < n && pulses.size() < 3; ++i) {
    if (i + 1 == p.n_up || i == p.n_down + 1 || (i >= p.n_up && i <= p.n_down)) continue;
    bool clash = false;
    for (const auto& [u, d] : pulses) clash = clash || (i + 1 >= u && i <= d + 1);
    if (!clash) pulses.emplace_back(i, i);
  }
  if (pulses.size() < 3) {
    // not enough room: split the simple pulse instead
    pulses.clear();
    const std::size_t len = p.length();
    if (len >= 3) {
      pulses = {{p.n_up, p.n_up}, {p.n_up + 1, p.n_up + 1}, {p.n_up + 2, p.n_down}};
    } else {
      pulses = {{0, 0}, {1, 1}, {2, n - 1}};
    }
  }
  std::sort(pulses.begin(), pulses.end());
  return breaks_from({pulses[0], pulses[1], pulses[2]});
}

}  // namespace

PulseFit fit_full(std::span<const double> values, const FullFitOptions& options) {
  if (values.size() < 9) throw PreconditionError("fit_full: need at least 9 values");
  if (!(options.lambda >= 0.0)) throw PreconditionError("fit_full: lambda must be nonnegative");
  const Prefix pre(values);
  const std::size_t n = pre.n();
  const FullObjective f(pre, options.lambda);

  PulseFit fit;
  SearchResult best;
  best.sol.objective = std::numeric_limits<double>::infinity();
  const std::size_t runs = options.restarts + 1;  // warm start first
  for (std::size_t r = 0; r < runs; ++r) {
    Breaks start;
    if (r == 0) {
      start = warm_start(values);
    } else {
      Rng rng(derive_seed(options.seed, "fit_full", r));
      start = random_breaks(rng, n);
    }
    SearchResult res = local_search(f, start, n, options.record_trace);
    if (options.record_trace) fit.trace.push_back(res.trace);
    if (res.sol.objective < best.sol.objective - 1e-12) best = std::move(res);
  }

  fit.base = pre.mean + best.sol.base;
  fit.restarts_used = runs;
  const Bounds b = pulse_bounds(best.q);
  const double level_tol = 1e-9 * (1.0 + std::abs(best.sol.base));
  for (int j = 0; j < 3; ++j) {
    if (!(best.sol.mask & (1u << j))) continue;
    if (best.sol.hot[j] - best.sol.base <= level_tol) continue;
    Pulse pulse{pre.mean + best.sol.hot[j], b.lo[j], b.hi[j] - 1};
    if (!fit.pulses.empty() && fit.pulses.back().n_down + 1 == pulse.n_up &&
        std::abs(fit.pulses.back().hot - pulse.hot) <= level_tol) {
      fit.pulses.back().n_down = pulse.n_down;
    } else {
      fit.pulses.push_back(pulse);
    }
  }
  fit.objective = std::max(0.0, fit_objective(values, fit, options.lambda));
  return fit;
}

double relative_length(const Pulse& pulse, std::size_t n_total) {
  return static_cast<double>(pulse.length()) / static_cast<double>(n_total);
}

std::optional<Pulse> dominant_pulse(const PulseFit& fit, double epsilon_active) {
  std::optional<Pulse> best;
  double best_score = -1.0;
  std::size_t i = 0;
  const auto& ps = fit.pulses;
  while (i < ps.size()) {
    if (!(ps[i].hot - fit.base > epsilon_active)) {
      ++i;
      continue;
    }
    std::size_t j = i;
    double mass = (ps[i].hot - fit.base) * static_cast<double>(ps[i].length());
    std::size_t len = ps[i].length();
    while (j + 1 < ps.size() && ps[j + 1].n_up == ps[j].n_down + 1 && ps[j + 1].hot - fit.base > epsilon_active) {
      ++j;
      mass += (ps[j].hot - fit.base) * static_cast<double>(ps[j].length());
      len += ps[j].length();
    }
    if (mass > best_score) {
      best_score = mass;
      best = Pulse{fit.base + mass / static_cast<double>(len), ps[i].n_up, ps[j].n_down};
    }
    i = j + 1;
  }
  return best;
}

std::vector<ArtifactRow> wsr_artifact_study(std::span<const std::vector<double>> careers,
                                            std::span<const double> wsr_list, const ArtifactOptions& options) {
  std::vector<ArtifactRow> rows;
  for (const double wsr : wsr_list) {
    ArtifactRow row;
    row.wsr = wsr;
    row.careers = careers.size();
    for (std::size_t c = 0; c < careers.size(); ++c) {
      const auto smooth = moving_average(careers[c], wsr);
      PulseFit fit;
      if (options.fitter == FitterKind::Simple) {
        fit = fit_simple(smooth);
      } else {
        FullFitOptions o = options.full;
        o.seed = derive_seed(options.full.seed, "artifact", c);
        fit = fit_full(smooth, o);
      }
      if (const auto p = dominant_pulse(fit, options.epsilon_active)) {
        row.mean_relative_length += relative_length(*p, smooth.size());
        row.mean_height += p->hot - fit.base;
      }
    }
    if (!careers.empty()) {
      row.mean_relative_length /= static_cast<double>(careers.size());
      row.mean_height /= static_cast<double>(careers.size());
    }
    rows.push_back(row);
  }
  return rows;
}

std::vector<double> model_onsets(const PulseFit& fit, std::size_t n_total, double epsilon_active) {
  std::vector<double> out;
  for (const auto& p : fit.pulses) {
    if (p.hot - fit.base > epsilon_active)
      out.push_back(n_total > 1 ? static_cast<double>(p.n_up) / static_cast<double>(n_total - 1) : 0.0);
  }
  return out;
}

OnsetConfusion& OnsetConfusion::operator+=(const OnsetConfusion& o) {
  both += o.both;
  model_only += o.model_only;
  data_only += o.data_only;
  return *this;
}

OnsetConfusion onset_confusion(std::span<const double> model, std::span<const double> data, double tol) {
  struct Pair {
    double dist;
    std::size_t i;
    std::size_t j;
  };
  std::vector<Pair> pairs;
  for (std::size_t i = 0; i < model.size(); ++i) {
    for (std::size_t j = 0; j < data.size(); ++j) {
      const double d = std::abs(model[i] - data[j]);
      if (d <= tol + 1e-9) pairs.push_back({d, i, j});
    }
  }
  std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    if (a.dist != b.dist) return a.dist < b.dist;
    return a.i != b.i ? a.i < b.i : a.j < b.j;
  });
  std::vector<char> used_m(model.size(), 0);
  std::vector<char> used_d(data.size(), 0);
  OnsetConfusion c;
  for (const auto& p : pairs) {
    if (used_m[p.i] || used_d[p.j]) continue;
    used_m[p.i] = used_d[p.j] = 1;
    ++c.both;
  }
  c.model_only = model.size() - c.both;
  c.data_only = data.size() - c.both;
  return c;
}

void write_fit_header(std::ostream& out) {
  out << "author_id,wsr,base,hot1,nu1,nd1,hot2,nu2,nd2,hot3,nu3,nd3,objective,active_pulses\n";
}

void write_fit_row(std::ostream& out, const std::string& author_id, const PulseFit& fit, double epsilon_active) {
  std::string line = fmt::format("{},{},{:.6f}", author_id, fit.wsr, fit.base);
  for (std::size_t j = 0; j < 3; ++j) {
    if (j < fit.pulses.size()) {
      const auto& p = fit.pulses[j];
      line += fmt::format(",{:.6f},{},{}", p.hot, p.n_up, p.n_down);
    } else {
      line += ",,,";
    }
  }
  line += fmt::format(",{:.6f},{}\n", fit.objective, fit.active_pulses(epsilon_active));
  out << line;
}

}  // namespace streakforge
