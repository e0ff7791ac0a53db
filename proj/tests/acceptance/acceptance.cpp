// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero when any criterion fails.
//
// usage: streakforge_acceptance <work-dir>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "oracles.hpp"
#include "streakforge/collab.hpp"
#include "streakforge/detect.hpp"
#include "streakforge/error.hpp"
#include "streakforge/graphcluster.hpp"
#include "streakforge/hotstreak.hpp"
#include "streakforge/impact.hpp"
#include "streakforge/pipeline/pipeline.hpp"
#include "streakforge/pipeline/synthetic.hpp"
#include "streakforge/random.hpp"

namespace fs = std::filesystem;
using namespace streakforge;

namespace {

// Tolerances and budgets, all in one place.
constexpr double kDetectBudgetSec = 10.0;
constexpr double kUShapeBudgetSec = 120.0;
constexpr double kShuffleMaxSe = 4.0;
constexpr double kArtifactBudgetSec = 120.0;
constexpr double kArtifactLengthTol = 0.05;
constexpr double kObjectiveTol = 1e-9;
constexpr double kConfusionTol = 0.1;
constexpr double kGraphTol = 1e-9;
constexpr double kLouvainOptimumShare = 0.95;
constexpr double kNormTol = 1e-9;
constexpr double kEndToEndBudgetSec = 600.0;
constexpr std::size_t kLargeAuthors = 10000;

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

// Rows of a CSV file as column-name -> value maps.
std::vector<std::map<std::string, std::string>> read_csv(const fs::path& path) {
  std::ifstream in(path);
  std::string line;
  std::vector<std::map<std::string, std::string>> rows;
  if (!std::getline(in, line)) return rows;
  const auto header = split_csv(line);
  while (std::getline(in, line)) {
    const auto cells = split_csv(line);
    std::map<std::string, std::string> row;
    for (std::size_t i = 0; i < header.size() && i < cells.size(); ++i) row[header[i]] = cells[i];
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

PipelineConfig config_for(const fs::path& corpus, const fs::path& out) {
  PipelineConfig c;
  c.papers_path = corpus / "papers.ndjson";
  c.citations_path = corpus / "citations.ndjson";
  c.out_dir = out;
  return c;
}

// --- 1 -------------------------------------------------------------------

Outcome detection_oracle() {
  const auto t0 = Clock::now();
  Rng rng(2024);
  const std::vector<std::pair<int, int>> params{{1, 1}, {2, 3}, {3, 5}, {5, 9}};
  std::size_t mismatches = 0;
  std::size_t spans = 0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = 1 + rng.uniform_index(60);
    const double p = 0.05 + 0.55 * rng.uniform01();
    std::vector<bool> flags(n);
    for (std::size_t i = 0; i < n; ++i) flags[i] = rng.bernoulli(p);
    for (const auto& [x, w] : params) {
      const auto got = detect_streaks(flags, DetectionParams{x, w, 10.0});
      const auto want = oracle::detect(flags, x, w);
      spans += want.size();
      bool same = got.size() == want.size();
      for (std::size_t i = 0; same && i < got.size(); ++i) {
        same = got[i].start_idx == want[i].start && got[i].end_idx == want[i].end &&
               got[i].onset_relative == want[i].onset;
      }
      mismatches += same ? 0u : 1u;
    }
  }
  const double sec = seconds_since(t0);
  return {mismatches == 0 && sec < kDetectBudgetSec,
          fmt::format("4000 sequence/param cases, {} spans, {} mismatches, {:.2f}s (budget {}s)", spans, mismatches,
                      sec, kDetectBudgetSec)};
}

// --- 2 -------------------------------------------------------------------

Outcome ushape_and_shuffle(const fs::path& corpus, const fs::path& out, double generation_sec) {
  const auto t0 = Clock::now();
  const RunResult r = run_pipeline(config_for(corpus, out), {"detect"});
  if (r.exit_code != kExitOk) return {false, "detect stage failed: " + r.message};
  std::map<std::string, std::vector<double>> density;
  std::map<std::string, std::vector<double>> se;
  for (const auto& row : read_csv(out / "onset_density.csv")) {
    if (row.at("params") != "3of5_k10") continue;
    density[row.at("kind")].push_back(std::stod(row.at("density")));
    se[row.at("kind")].push_back(std::stod(row.at("se")));
  }
  const auto& real = density["real"];
  const auto& shuf = density["shuffled"];
  if (real.size() != 10 || shuf.size() != 10) return {false, "onset_density.csv lacks ten real and shuffled bins"};
  bool ushape = real[0] > 1.0 && real[9] > 1.0;
  for (std::size_t b = 3; b <= 6; ++b) ushape = ushape && real[b] < 1.0;
  double worst = 0.0;
  for (std::size_t b = 0; b < 10; ++b) worst = std::max(worst, std::abs(shuf[b] - 1.0) / se["shuffled"][b]);
  const double sec = generation_sec + seconds_since(t0);
  return {ushape && worst < kShuffleMaxSe && sec < kUShapeBudgetSec,
          fmt::format("{} authors; bins 1/10 = {:.2f}/{:.2f}, bins 4-7 max {:.2f}; shuffled max dev {:.2f} SE (< {}); "
                      "{:.1f}s incl. generation (budget {}s)",
                      r.authors, real[0], real[9], *std::max_element(real.begin() + 3, real.begin() + 7), worst,
                      kShuffleMaxSe, sec, kUShapeBudgetSec)};
}

// --- 3 -------------------------------------------------------------------

Outcome window_size_artifact() {
  const auto t0 = Clock::now();
  Rng rng(77);
  std::vector<std::vector<double>> careers;
  for (int c = 0; c < 200; ++c) {
    GenParams g;
    g.gamma0 = 1.0;
    g.sigma = 0.1;
    g.n_total = 100;
    g.seed = 1000 + static_cast<std::uint64_t>(c);
    careers.push_back(simulate_spike(g, 20 + rng.uniform_index(60), 10.0));
  }
  const std::vector<double> wsr{0.1, 0.2, 0.3};
  std::vector<std::string> parts;
  bool pass = true;
  auto check = [&](const std::string& label, const ArtifactOptions& o) {
    const auto rows = wsr_artifact_study(careers, wsr, o);
    std::string s = label + ":";
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const bool len_ok = std::abs(rows[i].mean_relative_length - wsr[i]) <= kArtifactLengthTol;
      const bool h_ok = i == 0 || rows[i].mean_height < rows[i - 1].mean_height;
      pass = pass && len_ok && h_ok;
      s += fmt::format(" L={:.3f} h={:.3f}{}", rows[i].mean_relative_length, rows[i].mean_height,
                       len_ok && h_ok ? "" : "!");
    }
    parts.push_back(s);
  };
  check("simple", ArtifactOptions{});
  for (const double lambda : {0.0, 0.5, 1.0}) {
    ArtifactOptions o;
    o.fitter = FitterKind::Full;
    o.full.lambda = lambda;
    o.full.seed = 9;
    check(fmt::format("full lambda={}", lambda), o);
  }
  const double sec = seconds_since(t0);
  std::string detail;
  for (const auto& p : parts) detail += p + "; ";
  return {pass && sec < kArtifactBudgetSec, detail + fmt::format("{:.1f}s (budget {}s)", sec, kArtifactBudgetSec)};
}

// --- 4 -------------------------------------------------------------------

Outcome noiseless_recovery() {
  Rng rng(404);
  std::size_t exact = 0;
  for (int t = 0; t < 100; ++t) {
    GenParams g;
    g.gamma0 = rng.normal(0.0, 2.0);
    g.sigma = 0.0;
    g.delta = 1.0;
    g.n_total = 10 + rng.uniform_index(91);
    g.duration = 1 + rng.uniform_index(g.n_total - 1);
    const std::size_t onset = rng.uniform_index(g.n_total - g.duration + 1);
    const PulseFit f = fit_simple(simulate_hotstreak(g, onset));
    if (f.pulses.size() == 1 && f.pulses[0].n_up == onset && f.pulses[0].n_down == onset + g.duration - 1 &&
        std::abs(f.objective) <= kObjectiveTol)
      ++exact;
  }
  return {exact == 100, fmt::format("{}/100 exact (n_up, n_down) with objective 0", exact)};
}

// --- 5 -------------------------------------------------------------------

Outcome fit_oracle() {
  Rng rng(505);
  std::size_t agree = 0;
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 3 + rng.uniform_index(28);
    std::vector<double> v(n);
    for (auto& x : v) x = rng.normal(0.0, 1.0) + (rng.bernoulli(0.3) ? 2.0 : 0.0);
    const PulseFit got = fit_simple(v);
    const oracle::SimpleFit want = oracle::fit_simple(v);
    const double d = std::abs(got.objective - want.objective);
    worst = std::max(worst, d);
    if (d <= kObjectiveTol && got.pulses.size() == 1 && got.pulses[0].n_up == want.n_up &&
        got.pulses[0].n_down == want.n_down)
      ++agree;
  }
  return {agree == 200, fmt::format("{}/200 identical breakpoints, max objective gap {:.2e}", agree, worst)};
}

// --- 6 and 8 share a mixed corpus -------------------------------------------

struct MixedCorpus {
  fs::path dir;
  SyntheticTruth truth;
  PreparedCorpus prepared;
};

MixedCorpus make_mixed(const fs::path& dir) {
  SyntheticSpec s;
  s.authors = 1000;
  s.seed = 606;
  s.placement = Placement::Uniform;
  s.streak_fraction = 0.5;
  s.single_hit_fraction = 0.5;
  write_synthetic(s, dir);
  MixedCorpus m;
  m.dir = dir;
  std::ifstream tin(dir / "truth.json");
  m.truth = read_truth(tin);
  m.prepared = prepare_corpus(config_for(dir, dir / "out"), false);
  return m;
}

Outcome confusion_mechanism(const MixedCorpus& m) {
  const PipelineConfig cfg = config_for(m.dir, m.dir / "out");
  OnsetConfusion single;
  OnsetConfusion planted;
  std::size_t n_single = 0;
  std::size_t n_planted = 0;
  for (const auto& a : m.truth.authors) {
    const AuthorCareer* c = m.prepared.store.find_career(a.author_id);
    if (c == nullptr || c->n_total() < 9) continue;
    const bool is_single = a.single_hit;
    const bool is_planted = !a.single_hit && !a.planted_spans.empty();
    if (!is_single && !is_planted) continue;
    std::vector<double> data;
    for (const auto& s : detect_streaks(c->top_flags, cfg.primary)) data.push_back(s.onset_relative);
    FullFitOptions o;
    o.lambda = cfg.lambda;
    o.restarts = cfg.restarts;
    o.seed = 17;
    const auto smoothed = moving_average(fit_input(*c, cfg.fit_scale), 0.1);
    const PulseFit f = fit_full(smoothed, o);
    const auto conf = onset_confusion(model_onsets(f, c->n_total(), cfg.epsilon_active), data, kConfusionTol);
    if (is_single) {
      single += conf;
      ++n_single;
    } else {
      planted += conf;
      ++n_planted;
    }
  }
  const bool pass = single.model_only > 0 && planted.both > 0;
  return {pass, fmt::format("single-hit authors {}: both {} model_only {} data_only {}; planted authors {}: both {} "
                            "model_only {} data_only {} (wsr 0.1, tol {})",
                            n_single, single.both, single.model_only, single.data_only, n_planted, planted.both,
                            planted.model_only, planted.data_only, kConfusionTol)};
}

// --- 7 -------------------------------------------------------------------

oracle::Matrix random_weights(Rng& rng, std::size_t n, double p) {
  oracle::Matrix w(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (rng.bernoulli(p)) w[i][j] = w[j][i] = static_cast<double>(1 + rng.uniform_index(3));
    }
  }
  return w;
}

WeightedGraph graph_of(const oracle::Matrix& w) {
  WeightedGraph::Builder b;
  for (std::size_t i = 0; i < w.size(); ++i) b.add_node("n" + std::to_string(i));
  for (std::size_t i = 0; i < w.size(); ++i) {
    for (std::size_t j = i + 1; j < w.size(); ++j) {
      if (w[i][j] > 0.0) b.add_edge(i, j, w[i][j]);
    }
  }
  return std::move(b).build();
}

Outcome graph_oracles() {
  Rng rng(707);
  std::size_t btw_bad = 0;
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 1 + rng.uniform_index(8);
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    const double p = 0.2 + 0.5 * rng.uniform01();
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (rng.bernoulli(p)) edges.emplace_back(i, j);
      }
    }
    const std::size_t focal = rng.uniform_index(n);
    const double got = focal_betweenness(CoauthorshipLocalNet::from_edges(n, focal, edges));
    if (std::abs(got - oracle::betweenness(n, focal, edges)) > kGraphTol) ++btw_bad;
  }

  std::size_t dis_bad = 0;
  std::size_t dis_defined = 0;
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 2 + rng.uniform_index(7);
    std::vector<std::vector<bool>> cites(n, std::vector<bool>(n, false));
    for (std::size_t u = 0; u < n; ++u) {
      for (std::size_t v = 0; v < n; ++v) {
        if (u != v) cites[u][v] = rng.bernoulli(0.35);
      }
    }
    std::set<std::string> refs;
    for (std::size_t r = 1; r < n; ++r) {
      if (cites[0][r]) refs.insert("n" + std::to_string(r));
    }
    std::map<std::string, std::set<std::string>> citing;
    for (std::size_t u = 1; u < n; ++u) {
      std::set<std::string> cited;
      if (cites[u][0]) cited.insert("n0");
      for (std::size_t r = 1; r < n; ++r) {
        if (r != u && cites[0][r] && cites[u][r]) cited.insert("n" + std::to_string(r));
      }
      if (!cited.empty()) citing["n" + std::to_string(u)] = cited;
    }
    const auto got = disruption_index("n0", refs, citing);
    const auto want = oracle::disruption(cites);
    if (got.has_value() != want.has_value() || (got && std::abs(*got - *want) > kGraphTol)) ++dis_bad;
    dis_defined += want.has_value() ? 1u : 0u;
  }

  std::size_t optimal = 0;
  std::size_t non_monotone = 0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 2 + rng.uniform_index(7);
    const auto w = random_weights(rng, n, 0.45);
    const Partition part = louvain(graph_of(w), QualityKind::Modularity, 1.0, static_cast<std::uint64_t>(t));
    const double best = oracle::best_partition_quality(w, oracle::Quality::Modularity, 1.0);
    if (part.quality >= best - kGraphTol) ++optimal;
    for (std::size_t i = 1; i < part.pass_qualities.size(); ++i) {
      if (part.pass_qualities[i] < part.pass_qualities[i - 1] - 1e-12) {
        ++non_monotone;
        break;
      }
    }
  }
  const bool pass = btw_bad == 0 && dis_bad == 0 &&
                    static_cast<double>(optimal) >= kLouvainOptimumShare * 100.0 && non_monotone == 0;
  return {pass, fmt::format("betweenness mismatches {}/200; disruption mismatches {}/200 ({} defined); louvain optimum "
                            "{}/100 (need {:.0f}), quality drops {}",
                            btw_bad, dis_bad, dis_defined, optimal, kLouvainOptimumShare * 100.0, non_monotone)};
}

// --- 8 -------------------------------------------------------------------

// Worst |cell mean - 1| over cells with a nonzero baseline, from the papers themselves.
std::pair<double, std::size_t> normalization_error(const PreparedCorpus& pc) {
  std::map<std::pair<int, int>, std::pair<double, std::size_t>> sums;
  for (const auto& [id, p] : pc.store.papers()) {
    if (!p.field_id || !p.c10 || !p.c10_norm) continue;
    auto& s = sums[{*p.field_id, year_of(p.pub_month)}];
    s.first += *p.c10_norm;
    ++s.second;
  }
  double worst = 0.0;
  std::size_t cells = 0;
  for (const auto& [key, cell] : pc.baseline.cells()) {
    if (cell.mean() == 0.0) continue;
    const auto it = sums.find(key);
    if (it == sums.end()) return {INFINITY, cells};
    worst = std::max(worst, std::abs(it->second.first / static_cast<double>(it->second.second) - 1.0));
    ++cells;
  }
  return {worst, cells};
}

Outcome normalization_and_topk(const MixedCorpus& m, const fs::path& large_corpus, const fs::path& large_out) {
  const auto [err_mixed, cells_mixed] = normalization_error(m.prepared);
  // the detect run of criterion 2 left a snapshot in this cache
  const PreparedCorpus large = prepare_corpus(config_for(large_corpus, large_out), true);
  const auto [err_large, cells_large] = normalization_error(large);

  Rng rng(808);
  std::size_t cases = 0;
  std::size_t bad = 0;
  const std::vector<double> ks{0.1, 1.0, 5.0, 10.0, 12.5, 33.3, 50.0, 90.0, 99.9, 100.0};
  bool empty_ok = top_k_count(0, 10.0) == 0;
  try {
    top_k_flags(std::vector<double>{}, 10.0);
    empty_ok = false;
  } catch (const PreconditionError&) {
  }
  for (std::size_t n = 1; n <= 150; ++n) {
    for (const double k : ks) {
      for (const bool ties : {false, true}) {
        std::vector<double> v(n);
        std::vector<std::uint32_t> raw(n);
        for (std::size_t i = 0; i < n; ++i) {
          v[i] = ties ? static_cast<double>(rng.uniform_index(4)) : rng.uniform01();
          raw[i] = static_cast<std::uint32_t>(rng.uniform_index(3));
        }
        const auto flags = top_k_flags(v, k, raw);
        // smallest count whose share reaches k percent, kept within [1, n]
        std::size_t want = 0;
        while (static_cast<long double>(want) * 100.0L < static_cast<long double>(k) * static_cast<long double>(n))
          ++want;
        want = std::clamp<std::size_t>(want, 1, n);
        const auto got = static_cast<std::size_t>(std::count(flags.begin(), flags.end(), true));
        bool ok = got == want && got == top_k_count(n, k);
        // every flagged paper outranks every unflagged one
        for (std::size_t i = 0; ok && i < n; ++i) {
          for (std::size_t j = 0; ok && j < n; ++j) {
            if (!flags[i] || flags[j]) continue;
            const bool outranks =
                v[i] > v[j] || (v[i] == v[j] && (raw[i] > raw[j] || (raw[i] == raw[j] && i < j)));
            ok = outranks;
          }
        }
        ++cases;
        bad += ok ? 0u : 1u;
      }
    }
  }
  const bool pass = err_mixed <= kNormTol && err_large <= kNormTol && cells_mixed > 0 && cells_large > 0 && bad == 0 && empty_ok;
  return {pass, fmt::format("cell means off by at most {:.1e} over {} cells (1k corpus), {:.1e} over {} cells (10k "
                            "corpus); top-k sweep {}/{} cases hold, empty career {}",
                            err_mixed, cells_mixed, err_large, cells_large, cases - bad, cases,
                            empty_ok ? "rejected" : "NOT rejected")};
}

// --- 9 -------------------------------------------------------------------

std::vector<AuthorList> lists_of_sizes(const std::vector<std::size_t>& sizes) {
  std::vector<AuthorList> out;
  int next = 0;
  for (const auto s : sizes) {
    AuthorList l{"F"};
    for (std::size_t i = 1; i < s; ++i) l.push_back("x" + std::to_string(next++));
    out.push_back(std::move(l));
  }
  return out;
}

Outcome metric_definitions(const MixedCorpus& m) {
  std::vector<std::string> failed;
  auto expect = [&](bool ok, const char* what) {
    if (!ok) failed.emplace_back(what);
  };
  const std::vector<AuthorList> all_b(5, AuthorList{"F", "B"});
  expect(max_coauthor_freq(all_b, "F") == 5, "freq all B");
  expect(max_coauthor_freq(lists_of_sizes({2, 3, 2, 4, 2}), "F") == 1, "freq disjoint");
  const std::vector<AuthorList> mixed{{"F", "B"}, {"F", "B", "C"}, {"F", "C"}, {"F", "B"}, {"F"}};
  expect(max_coauthor_freq(mixed, "F") == 3, "freq B124 C23");
  expect(topic_diversity(std::vector<int>{7, 7, 7, 7, 7}) == 1, "diversity same");
  expect(topic_diversity(std::vector<int>{1, 2, 3, 4, 5}) == 5, "diversity distinct");
  expect(topic_diversity(std::vector<int>{1, 1, 2, 3, 3}) == 3, "diversity 3");
  expect(is_new_topic(std::vector<int>{1, 1, 2, 2, 3}, {2, 3}), "new topic tie");
  expect(!is_new_topic(std::vector<int>{1, 1, 1, 2, 3}, {1}), "old topic");
  expect(is_new_topic(std::vector<int>{1, 1, 1, 2, 3}, {}), "empty prior");
  expect(has_big_project(lists_of_sizes({2, 3, 10, 2, 2})), "big at 10");
  expect(!has_big_project(lists_of_sizes({9, 9, 9, 9, 9})), "all 9");
  expect(has_big_project(lists_of_sizes({1, 1, 1, 1, 100})), "big 100");
  const std::vector<AuthorList> dense_small{{"F", "B"}, {"F", "B"}, {"F", "B"}, {"F", "B"}, {"F", "C"}};
  expect(classify_streak_type(dense_small, "F").name() == "dense_small", "dense/small");
  expect(classify_streak_type(lists_of_sizes({2, 3, 50, 2, 2}), "F").name() == "loose_large", "loose/large");
  std::vector<AuthorList> dense_large{{"F", "B"}, {"F", "B"}, {"F", "B"}, {"F"}, {"F"}};
  for (int i = 0; i < 9; ++i) dense_large[3].push_back("m" + std::to_string(i));
  expect(classify_streak_type(dense_large, "F").name() == "dense_large", "dense/large");

  const fs::path out = m.dir / "classify";
  const RunResult r = run_pipeline(config_for(m.dir, out), {"classify"});
  if (r.exit_code != kExitOk) return {false, "classify stage failed: " + r.message};
  std::map<std::string, std::size_t> from_windows;
  std::size_t hot = 0;
  std::size_t stray = 0;
  for (const auto& row : read_csv(out / "windows.csv")) {
    const bool is_hot = row.at("label") == "Hot";
    hot += is_hot ? 1u : 0u;
    if (is_hot) ++from_windows[row.at("type")];
    if (is_hot == row.at("type").empty()) ++stray;
  }
  std::map<std::string, std::size_t> from_table;
  std::size_t total = 0;
  for (const auto& row : read_csv(out / "streak_types.csv")) {
    if (row.at("type") == "total")
      total = std::stoul(row.at("count"));
    else
      from_table[row.at("type")] = std::stoul(row.at("count"));
  }
  std::size_t sum = 0;
  for (const auto& [k, v] : from_table) sum += v;
  const bool partition = hot > 0 && stray == 0 && sum == hot && total == hot && from_table.size() == 4 &&
                         from_windows == from_table;
  std::string bad;
  for (const auto& f : failed) bad += " " + f;
  return {failed.empty() && partition,
          fmt::format("{} worked examples failed{}; {} Hot windows, four types sum to {} (total row {})",
                      failed.size(), bad, hot, sum, total)};
}

// --- 10 ------------------------------------------------------------------

std::map<std::string, std::string> tree_contents(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), root).generic_string()] = slurp(e.path());
  }
  return out;
}

Outcome end_to_end(const fs::path& corpus, const fs::path& work) {
  std::vector<double> secs;
  std::vector<std::map<std::string, std::string>> trees;
  for (const char* name : {"run_a", "run_b"}) {
    const fs::path out = work / name;
    fs::remove_all(out);
    const auto t0 = Clock::now();
    const RunResult r = run_pipeline(config_for(corpus, out), {"all"});
    secs.push_back(seconds_since(t0));
    if (r.exit_code != kExitOk) return {false, fmt::format("{} failed in {}: {}", name, r.failed_stage, r.message)};
    trees.push_back(tree_contents(out));
  }
  std::size_t differing = 0;
  std::string first_diff;
  for (const auto& [path, body] : trees[0]) {
    const auto it = trees[1].find(path);
    if (it == trees[1].end() || it->second != body) {
      if (differing++ == 0) first_diff = path;
    }
  }
  differing += trees[1].size() > trees[0].size() ? trees[1].size() - trees[0].size() : 0;
  const bool pass = differing == 0 && secs[0] < kEndToEndBudgetSec && secs[1] < kEndToEndBudgetSec;
  return {pass, fmt::format("{} files, {} differ{}; runs took {:.1f}s and {:.1f}s (budget {}s each)", trees[0].size(),
                            differing, first_diff.empty() ? "" : " (first: " + first_diff + ")", secs[0], secs[1],
                            kEndToEndBudgetSec)};
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path work = argc > 1 ? fs::path(argv[1]) : fs::path("acceptance_work");
  fs::remove_all(work);
  fs::create_directories(work);

  int failures = 0;
  auto report = [&](int id, const char* name, const std::function<Outcome()>& fn) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::printf("%s  %2d %-28s %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  };

  report(1, "detection oracle", detection_oracle);

  const fs::path large = work / "large";
  const auto g0 = Clock::now();
  SyntheticSpec spec;
  spec.authors = kLargeAuthors;
  spec.placement = Placement::EarlyLate;
  write_synthetic(spec, large);
  const double generation_sec = seconds_since(g0);
  report(2, "u-shape and shuffle", [&] { return ushape_and_shuffle(large, large / "detect", generation_sec); });

  report(3, "window-size artifact", window_size_artifact);
  report(4, "noiseless recovery", noiseless_recovery);
  report(5, "fit oracle", fit_oracle);

  const MixedCorpus mixed = make_mixed(work / "mixed");
  report(6, "confusion mechanism", [&] { return confusion_mechanism(mixed); });
  report(7, "graph oracles", graph_oracles);
  report(8, "normalization and top-k", [&] { return normalization_and_topk(mixed, large, large / "detect"); });
  report(9, "metric definitions", [&] { return metric_definitions(mixed); });
  report(10, "end-to-end determinism", [&] { return end_to_end(large, work); });

  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
