#include "streakforge/pipeline/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <fmt/format.h>
#include <json.hpp>

#include "streakforge/collab.hpp"
#include "streakforge/detect.hpp"
#include "streakforge/error.hpp"
#include "streakforge/graphcluster.hpp"
#include "streakforge/hotstreak.hpp"
#include "streakforge/pipeline/hashing.hpp"
#include "streakforge/pipeline/report.hpp"
#include "streakforge/random.hpp"
#include "streakforge/stats.hpp"

namespace streakforge {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::vector<std::string> kSeedSlots{"clustering", "fitting", "overlap", "sampling", "shuffle", "topics"};

std::string num(double v) { return fmt::format("{:.6f}", v); }
std::string opt_num(const std::optional<double>& v) { return v ? num(*v) : std::string(); }

void log_line(const std::string& msg) { fmt::print(stderr, "[streakforge] {}\n", msg); }

class Outputs {
 public:
  explicit Outputs(fs::path dir) : dir_(std::move(dir)) {}

  void write(const std::string& rel, const std::string& content) {
    const fs::path path = dir_ / rel;
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
    if (!out.flush()) throw DataError("cannot write " + path.string());
    files_[rel] = {sha256_hex(content), stage_, true};
  }

  void set_stage(const std::string& stage) { stage_ = stage; }
  void invalidate(const std::string& stage) {
    for (auto& [path, f] : files_) {
      if (f.stage == stage) f.valid = false;
    }
  }

  json manifest_files() const {
    json out = json::array();
    for (const auto& [path, f] : files_)
      out.push_back({{"path", path}, {"sha256", f.sha}, {"stage", f.stage}, {"valid", f.valid}});
    return out;
  }

 private:
  struct File {
    std::string sha;
    std::string stage;
    bool valid = true;
  };
  fs::path dir_;
  std::string stage_;
  std::map<std::string, File> files_;
};

// ---------------------------------------------------------------------------
// Shared per-run state

struct WindowRecord {
  SequenceWindow window;
  WindowMetrics metrics;
};

struct Context {
  const PipelineConfig& cfg;
  PreparedCorpus corpus;
  std::vector<const AuthorCareer*> careers;
  std::vector<std::vector<std::uint32_t>> raw;    // raw C10 per career
  std::vector<std::vector<std::size_t>> perms;    // shuffle order per career
  std::vector<DetectionParams> params;            // detection list, primary included
  std::size_t primary = 0;

  std::vector<std::vector<std::vector<StreakSpan>>> spans;           // [param][author]
  std::vector<std::vector<std::vector<StreakSpan>>> shuffled_spans;  // [param][author]
  bool spans_ready = false;
  std::vector<std::vector<int>> topics;
  bool topics_ready = false;
  std::vector<std::vector<WindowRecord>> windows;  // per author
  bool windows_ready = false;

  explicit Context(const PipelineConfig& c) : cfg(c) {}

  std::vector<bool> flags(std::size_t a, const DetectionParams& p) const {
    const AuthorCareer& c = *careers[a];
    if (p.k_percent == cfg.k_percent) return c.top_flags;
    return top_k_flags(c.impacts, p.k_percent, raw[a]);
  }
};

void load(Context& ctx) {
  ctx.corpus = prepare_corpus(ctx.cfg, true);
  for (const auto& [id, career] : ctx.corpus.store.careers()) {
    if (career.n_total() > 0) ctx.careers.push_back(&career);
  }
  ctx.raw.resize(ctx.careers.size());
  ctx.perms.resize(ctx.careers.size());
  for (std::size_t a = 0; a < ctx.careers.size(); ++a) {
    ctx.raw[a] = career_c10(ctx.corpus.store, *ctx.careers[a]);
    ctx.perms[a] = shuffle_order(ctx.careers[a]->n_total(), derive_seed(ctx.cfg.seed, "shuffle", a));
  }
  ctx.params = ctx.cfg.detection;
  const auto it = std::find_if(ctx.params.begin(), ctx.params.end(), [&](const DetectionParams& p) {
    return p.x == ctx.cfg.primary.x && p.n == ctx.cfg.primary.n && p.k_percent == ctx.cfg.primary.k_percent;
  });
  if (it == ctx.params.end()) {
    ctx.params.push_back(ctx.cfg.primary);
    ctx.primary = ctx.params.size() - 1;
  } else {
    ctx.primary = static_cast<std::size_t>(it - ctx.params.begin());
  }
}

void ensure_spans(Context& ctx) {
  if (ctx.spans_ready) return;
  const std::size_t n_authors = ctx.careers.size();
  ctx.spans.assign(ctx.params.size(), std::vector<std::vector<StreakSpan>>(n_authors));
  ctx.shuffled_spans.assign(ctx.params.size(), std::vector<std::vector<StreakSpan>>(n_authors));
  parallel_for(n_authors, ctx.cfg.workers, [&](std::size_t a) {
    const AuthorCareer& c = *ctx.careers[a];
    for (std::size_t p = 0; p < ctx.params.size(); ++p) {
      const std::vector<bool> f = ctx.flags(a, ctx.params[p]);
      ctx.spans[p][a] = detect_streaks(f, ctx.params[p], c.pub_months);
      std::vector<bool> shuffled(f.size());
      for (std::size_t i = 0; i < f.size(); ++i) shuffled[i] = f[ctx.perms[a][i]];
      ctx.shuffled_spans[p][a] = detect_streaks(shuffled, ctx.params[p]);
    }
  });
  ctx.spans_ready = true;
}

void ensure_topics(Context& ctx) {
  if (ctx.topics_ready) return;
  ctx.topics.assign(ctx.careers.size(), {});
  parallel_for(ctx.careers.size(), ctx.cfg.workers, [&](std::size_t a) {
    const AuthorCareer& c = *ctx.careers[a];
    ctx.topics[a] = author_topics(c, ctx.corpus.store, topic_seed(ctx.cfg, c.author_id));
  });
  ctx.topics_ready = true;
}

std::vector<AuthorList> window_lists(const Context& ctx, const SequenceWindow& w) {
  std::vector<AuthorList> lists;
  for (const auto& id : w.papers) lists.push_back(ctx.corpus.store.paper(id).author_ids);
  return lists;
}

void ensure_windows(Context& ctx) {
  if (ctx.windows_ready) return;
  ensure_spans(ctx);
  ensure_topics(ctx);
  ctx.windows.assign(ctx.careers.size(), {});
  parallel_for(ctx.careers.size(), ctx.cfg.workers, [&](std::size_t a) {
    AuthorCareer c = *ctx.careers[a];
    const DetectionParams& primary = ctx.params[ctx.primary];
    c.top_flags = ctx.flags(a, primary);
    std::vector<SequenceWindow> windows;
    const auto& spans = ctx.spans[ctx.primary][a];
    if (!spans.empty()) {
      windows = extract_hot_windows(c, spans);
    } else if (c.n_total() >= kWindowLength) {
      if (auto w = sample_nonhot_window(c, derive_seed(ctx.cfg.seed, "sampling", a), ctx.cfg.require_first_flag))
        windows.push_back(std::move(*w));
    }
    const auto& topics = ctx.topics[a];
    for (auto& w : windows) {
      const std::set<int> prior(topics.begin(), topics.begin() + static_cast<std::ptrdiff_t>(w.start_idx));
      const std::span<const int> wt(topics.data() + w.start_idx, kWindowLength);
      const auto lists = window_lists(ctx, w);
      WindowRecord r{std::move(w), window_metrics(lists, c.author_id, wt, prior, ctx.cfg.big_project_threshold)};
      ctx.windows[a].push_back(std::move(r));
    }
  });
  ctx.windows_ready = true;
}

// ---------------------------------------------------------------------------
// Stages

void stage_ingest(Context& ctx, Outputs& out) {
  const CorpusStore& store = ctx.corpus.store;
  std::map<int, std::size_t> field_sizes;
  std::size_t without_field = 0;
  for (const auto& [id, p] : store.papers()) {
    if (p.field_id) {
      ++field_sizes[*p.field_id];
    } else {
      ++without_field;
    }
  }
  std::string summary = "metric,value\n";
  summary += fmt::format("papers,{}\n", store.papers().size());
  summary += fmt::format("citations,{}\n", store.citations().size());
  summary += fmt::format("authors,{}\n", ctx.careers.size());
  summary += fmt::format("fields,{}\n", field_sizes.size());
  summary += fmt::format("papers_without_field,{}\n", without_field);
  summary += fmt::format("baseline_cells,{}\n", ctx.corpus.baseline.cells().size());
  out.write("corpus_summary.csv", summary);

  std::string sizes = "field_id,papers\n";
  for (const auto& [f, n] : field_sizes) sizes += fmt::format("{},{}\n", f, n);
  out.write("field_sizes.csv", sizes);

  std::ostringstream baseline;
  ctx.corpus.baseline.write_csv(baseline);
  out.write("baseline.csv", baseline.str());
}

void stage_detect(Context& ctx, Outputs& out) {
  ensure_spans(ctx);
  const std::size_t bins = ctx.cfg.bins;
  std::string density = "params,kind,bin,lo,hi,count,density,se\n";
  std::string counts = "params,authors,with_streak,multi_streak\n";
  std::string hist = "params,spans,authors\n";
  for (std::size_t p = 0; p < ctx.params.size(); ++p) {
    const std::string label = ctx.params[p].label();
    std::ostringstream report;
    write_streak_header(report);
    std::vector<double> real;
    std::vector<double> shuffled;
    for (std::size_t a = 0; a < ctx.careers.size(); ++a) {
      write_streak_rows(report, ctx.careers[a]->author_id, ctx.spans[p][a]);
      for (const auto& s : ctx.spans[p][a]) real.push_back(s.onset_relative);
      for (const auto& s : ctx.shuffled_spans[p][a]) shuffled.push_back(s.onset_relative);
    }
    out.write(fmt::format("streaks_{}.csv", label), report.str());
    for (const auto& [kind, onsets] : {std::pair{"real", &real}, std::pair{"shuffled", &shuffled}}) {
      const BinnedDensity d = onset_density(*onsets, bins);
      for (std::size_t b = 0; b < bins; ++b) {
        density += fmt::format("{},{},{},{},{},{},{},{}\n", label, kind, b + 1, num(d.edges[b]), num(d.edges[b + 1]),
                               d.counts[b], num(d.density[b]), num(d.flat_standard_error()));
      }
    }
    const StreakCountStats s = streak_count_stats(ctx.spans[p]);
    counts += fmt::format("{},{},{},{}\n", label, s.authors, num(s.with_streak), num(s.multi_streak));
    for (const auto& [k, v] : s.histogram) hist += fmt::format("{},{},{}\n", label, k, v);
  }
  out.write("onset_density.csv", density);
  out.write("streak_counts.csv", counts);
  out.write("streak_hist.csv", hist);
}

void stage_classify(Context& ctx, Outputs& out) {
  ensure_windows(ctx);
  std::string rows =
      "author_id,start_idx,label,onset_relative,mean_team_size,big_project,max_freq,dense,betweenness,diversity,"
      "new_topic,type\n";
  std::map<std::string, std::size_t> types{{"dense_small", 0}, {"dense_large", 0}, {"loose_small", 0}, {"loose_large", 0}};
  std::size_t hot = 0;
  for (const auto& per_author : ctx.windows) {
    for (const auto& r : per_author) {
      const auto& w = r.window;
      const auto& m = r.metrics;
      const bool is_hot = w.label == SequenceLabel::Hot;
      rows += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{}\n", w.author_id, w.start_idx, to_string(w.label),
                          num(w.onset_relative), num(m.mean_team_size), m.big_project ? 1 : 0, m.max_freq,
                          m.dense ? 1 : 0, num(m.betweenness), m.diversity, m.new_topic ? 1 : 0,
                          is_hot ? m.type.name() : std::string());
      if (is_hot) {
        ++hot;
        ++types[m.type.name()];
      }
    }
  }
  out.write("windows.csv", rows);
  std::size_t total = 0;
  std::string t = "type,count,share\n";
  for (const auto& [name, n] : types) {
    total += n;
    t += fmt::format("{},{},{}\n", name, n, num(hot == 0 ? 0.0 : static_cast<double>(n) / static_cast<double>(hot)));
  }
  if (total != hot) throw std::logic_error("streak types do not partition the Hot windows");
  t += fmt::format("total,{},{}\n", hot, num(hot == 0 ? 0.0 : 1.0));
  out.write("streak_types.csv", t);
}

void stage_metrics(Context& ctx, Outputs& out) {
  ensure_windows(ctx);
  struct Metric {
    const char* name;
    bool small_team_only;
    double (*value)(const WindowMetrics&);
  };
  const Metric metrics[] = {
      {"team_size", true, [](const WindowMetrics& m) { return m.mean_team_size; }},
      {"big_project", false, [](const WindowMetrics& m) { return m.big_project ? 1.0 : 0.0; }},
      {"max_freq", true, [](const WindowMetrics& m) { return static_cast<double>(m.max_freq); }},
      {"dense", true, [](const WindowMetrics& m) { return m.dense ? 1.0 : 0.0; }},
      {"betweenness", true, [](const WindowMetrics& m) { return m.betweenness; }},
      {"diversity", true, [](const WindowMetrics& m) { return static_cast<double>(m.diversity); }},
      {"new_topic", true, [](const WindowMetrics& m) { return m.new_topic ? 1.0 : 0.0; }},
  };
  const SequenceLabel labels[] = {SequenceLabel::Hot, SequenceLabel::Top, SequenceLabel::Ordinary};
  const std::size_t bins = ctx.cfg.bins;
  for (const auto& metric : metrics) {
    std::string csv = "label,bin,lo,hi,count,mean,se,ci95\n";
    for (const auto label : labels) {
      std::vector<std::pair<double, double>> points;
      for (const auto& per_author : ctx.windows) {
        for (const auto& r : per_author) {
          if (r.window.label != label) continue;
          if (metric.small_team_only && ctx.cfg.small_team_filter && !r.metrics.all_small_teams) continue;
          points.emplace_back(r.window.onset_relative, metric.value(r.metrics));
        }
      }
      const BinnedCurve curve = binned_metric_curve(points, bins);
      for (std::size_t b = 0; b < bins; ++b) {
        const auto& bin = curve.bins[b];
        csv += fmt::format("{},{},{},{},{},{},{},{}\n", to_string(label), b + 1,
                           num(static_cast<double>(b) / static_cast<double>(bins)),
                           num(static_cast<double>(b + 1) / static_cast<double>(bins)), bin.count, opt_num(bin.mean),
                           opt_num(bin.standard_error), opt_num(bin.ci_half_width));
      }
    }
    out.write(fmt::format("curve_{}.csv", metric.name), csv);
  }
  std::string hist = "label,team_size,papers\n";
  for (const auto label : labels) {
    std::map<std::size_t, std::size_t> sizes;
    for (const auto& per_author : ctx.windows) {
      for (const auto& r : per_author) {
        if (r.window.label != label) continue;
        for (const auto& id : r.window.papers) ++sizes[ctx.corpus.store.paper(id).author_ids.size()];
      }
    }
    for (const auto& [s, n] : sizes) hist += fmt::format("{},{},{}\n", to_string(label), s, n);
  }
  out.write("teamsize_hist.csv", hist);
}

void stage_fit(Context& ctx, Outputs& out) {
  ensure_spans(ctx);
  const auto& cfg = ctx.cfg;
  const std::size_t n_authors = ctx.careers.size();
  std::vector<std::vector<PulseFit>> fits(n_authors, std::vector<PulseFit>(cfg.wsr.size()));
  parallel_for(n_authors, cfg.workers, [&](std::size_t a) {
    const AuthorCareer& c = *ctx.careers[a];
    if (c.n_total() < 9) return;
    const std::vector<double> input = fit_input(c, cfg.fit_scale);
    for (std::size_t w = 0; w < cfg.wsr.size(); ++w) {
      FullFitOptions o;
      o.lambda = cfg.lambda;
      o.restarts = cfg.restarts;
      o.seed = derive_seed(cfg.seed, "fitting", a * cfg.wsr.size() + w);
      PulseFit f = fit_full(moving_average(input, cfg.wsr[w]), o);
      f.wsr = cfg.wsr[w];
      fits[a][w] = std::move(f);
    }
  });
  std::ostringstream report;
  write_fit_header(report);
  std::vector<OnsetConfusion> confusion(cfg.wsr.size());
  for (std::size_t a = 0; a < n_authors; ++a) {
    const AuthorCareer& c = *ctx.careers[a];
    if (c.n_total() < 9) continue;
    std::vector<double> data;
    for (const auto& s : ctx.spans[ctx.primary][a]) data.push_back(s.onset_relative);
    for (std::size_t w = 0; w < cfg.wsr.size(); ++w) {
      write_fit_row(report, c.author_id, fits[a][w], cfg.epsilon_active);
      const auto model = model_onsets(fits[a][w], c.n_total(), cfg.epsilon_active);
      confusion[w] += onset_confusion(model, data, cfg.confusion_tol);
    }
  }
  out.write("fit_report.csv", report.str());
  std::string conf = "wsr,both,model_only,data_only\n";
  for (std::size_t w = 0; w < cfg.wsr.size(); ++w)
    conf += fmt::format("{},{},{},{}\n", cfg.wsr[w], confusion[w].both, confusion[w].model_only, confusion[w].data_only);
  out.write("confusion.csv", conf);
}

// Indices of the five highest-impact papers (impact, then raw C10, then position).
std::vector<std::size_t> top_five(std::span<const double> impacts, std::span<const std::uint32_t> raw) {
  std::vector<std::size_t> order(impacts.size());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t m = std::min<std::size_t>(5, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(m), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (impacts[a] != impacts[b]) return impacts[a] > impacts[b];
                      if (raw[a] != raw[b]) return raw[a] > raw[b];
                      return a < b;
                    });
  order.resize(m);
  return order;
}

std::string ratio_matrix_csv(const RatioMatrix& m) {
  std::string csv = "row,col,ratio\n";
  for (std::size_t i = 0; i < m.size(); ++i) {
    for (std::size_t j = 0; j < m[i].size(); ++j) csv += fmt::format("{},{},{}\n", i + 1, j + 1, opt_num(m[i][j]));
  }
  return csv;
}

int home_field(const CorpusStore& store, const AuthorCareer& c) {
  std::map<int, std::size_t> count;
  for (const auto& id : c.papers) {
    if (const auto f = store.paper(id).field_id) ++count[*f];
  }
  int best = -1;
  std::size_t best_n = 0;
  for (const auto& [f, n] : count) {
    if (n > best_n) {
      best = f;
      best_n = n;
    }
  }
  return best;
}

void timing_views(Context& ctx, Outputs& out) {
  const std::size_t n_authors = ctx.careers.size();
  std::vector<std::pair<double, double>> joint_real;
  std::vector<std::pair<double, double>> joint_shuf;
  std::vector<double> dx_real;
  std::vector<double> dx_shuf;
  std::map<std::size_t, std::array<std::size_t, 2>> lengths[3];
  const StreakThreshold thresholds[3] = {
      {ThresholdKind::Median, 0.0}, {ThresholdKind::Mean, 0.0}, {ThresholdKind::TopQuantile, ctx.cfg.top_quantile}};
  for (std::size_t a = 0; a < n_authors; ++a) {
    const AuthorCareer& c = *ctx.careers[a];
    const std::size_t n = c.n_total();
    std::vector<double> simp(n);
    std::vector<std::uint32_t> sraw(n);
    for (std::size_t i = 0; i < n; ++i) {
      simp[i] = c.impacts[ctx.perms[a][i]];
      sraw[i] = ctx.raw[a][ctx.perms[a][i]];
    }
    for (int t = 0; t < 3; ++t) {
      ++lengths[t][max_streak_length(c.impacts, thresholds[t])][0];
      ++lengths[t][max_streak_length(simp, thresholds[t])][1];
    }
    if (n < 5) continue;
    const double nt = static_cast<double>(n);
    for (int pass = 0; pass < 2; ++pass) {
      const auto top = pass == 0 ? top_five(c.impacts, ctx.raw[a]) : top_five(simp, sraw);
      std::vector<double> x;
      for (const auto i : top) x.push_back(static_cast<double>(i + 1) / nt);
      (pass == 0 ? joint_real : joint_shuf).emplace_back(x[0], x[1]);
      auto& dx = pass == 0 ? dx_real : dx_shuf;
      for (std::size_t i = 0; i < x.size(); ++i) {
        for (std::size_t j = i + 1; j < x.size(); ++j) dx.push_back(std::abs(x[i] - x[j]));
      }
    }
  }
  out.write("jointmap.csv", ratio_matrix_csv(joint_probability_map(joint_real, ctx.cfg.joint_bins)));
  out.write("jointmap_shuffled.csv", ratio_matrix_csv(joint_probability_map(joint_shuf, ctx.cfg.joint_bins)));

  const std::size_t bins = ctx.cfg.bins;
  const BinnedDensity dr = onset_density(dx_real, bins);
  const BinnedDensity ds = onset_density(dx_shuf, bins);
  const auto ratio = temporal_distance_ratio(dx_real, dx_shuf, bins);
  std::string tdr = "bin,lo,hi,real_density,shuffled_density,ratio\n";
  for (std::size_t b = 0; b < bins; ++b)
    tdr += fmt::format("{},{},{},{},{},{}\n", b + 1, num(dr.edges[b]), num(dr.edges[b + 1]), num(dr.density[b]),
                       num(ds.density[b]), opt_num(ratio[b]));
  out.write("temporal_distance.csv", tdr);

  const char* names[3] = {"median", "mean", "top_quantile"};
  std::string sl = "threshold,L,real,shuffled\n";
  for (int t = 0; t < 3; ++t) {
    for (const auto& [len, c] : lengths[t]) sl += fmt::format("{},{},{},{}\n", names[t], len, c[0], c[1]);
  }
  out.write("streak_length.csv", sl);
}

void onset_views(Context& ctx, Outputs& out) {
  const auto& spans = ctx.spans[ctx.primary];
  std::map<int, std::vector<double>> by_field;
  std::vector<OnsetEvent> events;
  for (std::size_t a = 0; a < ctx.careers.size(); ++a) {
    const AuthorCareer& c = *ctx.careers[a];
    const int field = home_field(ctx.corpus.store, c);
    for (const auto& s : spans[a]) {
      by_field[field].push_back(s.onset_relative);
      events.push_back({s.onset_month.value_or(c.pub_months[s.start_idx]), c.pub_months.front(), c.pub_months.back()});
    }
  }
  std::string fel = "field,onsets,early_mass,late_mass,early_density,late_density\n";
  for (const auto& [f, r] : field_early_late(by_field, ctx.cfg.min_field_count))
    fel += fmt::format("{},{},{},{},{},{}\n", f, r.onsets, num(r.early_mass), num(r.late_mass), num(r.early_density),
                       num(r.late_density));
  out.write("field_early_late.csv", fel);

  std::string yv = "career_years,view,years,count\n";
  for (const auto& [group, view] : onset_year_views(events)) {
    for (const auto& [y, n] : view.years_from_start) yv += fmt::format("{},from_start,{},{}\n", group * 5, y, n);
    for (const auto& [y, n] : view.years_to_end) yv += fmt::format("{},to_end,{},{}\n", group * 5, y, n);
  }
  out.write("year_views.csv", yv);
}

void overlap_view(Context& ctx, Outputs& out) {
  ensure_windows(ctx);
  std::set<std::string> early;
  std::set<std::string> late;
  std::set<std::string> all;
  for (const auto& per_author : ctx.windows) {
    for (const auto& r : per_author) {
      if (r.window.label != SequenceLabel::Hot) continue;
      for (const auto& p : r.window.papers) {
        all.insert(p);
        if (r.window.onset_relative < ctx.cfg.stage_early) early.insert(p);
        if (r.window.onset_relative > ctx.cfg.stage_late) late.insert(p);
      }
    }
  }
  const std::vector<std::string> pool(all.begin(), all.end());
  Rng rng(derive_seed(ctx.cfg.seed, "overlap", 0));
  auto sample = [&](std::size_t k) {
    std::vector<std::string> v = pool;
    std::set<std::string> s;
    for (std::size_t i = 0; i < k && i < v.size(); ++i) {
      const std::size_t j = i + rng.uniform_index(v.size() - i);
      std::swap(v[i], v[j]);
      s.insert(v[i]);
    }
    return s;
  };
  const auto ra = sample(early.size());
  const auto rb = sample(late.size());
  std::string csv = "comparison,size_a,size_b,jaccard\n";
  csv += fmt::format("early_vs_late,{},{},{}\n", early.size(), late.size(), num(jaccard(early, late)));
  csv += fmt::format("random_vs_random,{},{},{}\n", ra.size(), rb.size(), num(jaccard(ra, rb)));
  out.write("jaccard.csv", csv);
}

void disruption_view(Context& ctx, Outputs& out) {
  ensure_windows(ctx);
  const CorpusStore& store = ctx.corpus.store;
  // every career paper and its references, with the papers citing them
  std::unordered_map<std::string_view, std::vector<std::string_view>> citers;
  for (const auto* c : ctx.careers) {
    for (const auto& id : c->papers) {
      citers.try_emplace(id);
      for (const auto& r : store.paper(id).reference_ids) citers.try_emplace(r);
    }
  }
  for (const auto& [id, p] : store.papers()) {
    for (const auto& r : p.reference_ids) {
      const auto it = citers.find(r);
      if (it != citers.end()) it->second.push_back(id);
    }
  }
  for (const auto& e : store.citations()) {
    const auto it = citers.find(e.cited_id);
    if (it != citers.end()) it->second.push_back(e.citing_id);
  }
  for (auto& [k, v] : citers) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }

  struct Ranked {
    std::string_view paper;
    double d;
    RankGroupKey key;
  };
  std::vector<std::string_view> ids;
  std::vector<double> values;
  std::vector<double> c10s;
  std::vector<int> years;
  std::vector<int> fields;
  for (const auto* c : ctx.careers) {
    for (const auto& id : c->papers) {
      const PaperRecord& p = store.paper(id);
      std::map<std::string, std::set<std::string>> citing;
      for (const auto& who : citers.at(id)) citing[std::string(who)].insert(id);
      std::set<std::string> refs;
      for (const auto& r : p.reference_ids) {
        refs.insert(r);
        for (const auto& who : citers.at(r)) citing[std::string(who)].insert(r);
      }
      const auto d = disruption_index(id, refs, citing);
      if (!d) continue;
      ids.push_back(id);
      values.push_back(*d);
      c10s.push_back(static_cast<double>(p.c10.value_or(0)));
      years.push_back(year_of(p.pub_month));
      fields.push_back(p.field_id.value_or(-1));
    }
  }
  // a paper can appear in several careers; keep its first occurrence
  std::vector<std::size_t> keep;
  {
    std::unordered_set<std::string_view> seen;
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (seen.insert(ids[i]).second) keep.push_back(i);
    }
  }
  std::vector<double> v;
  std::vector<double> cc;
  for (const auto i : keep) {
    v.push_back(values[i]);
    cc.push_back(c10s[i]);
  }
  const std::vector<int> quint = quintiles(cc);
  std::vector<RankGroupKey> keys;
  for (std::size_t k = 0; k < keep.size(); ++k) keys.emplace_back(years[keep[k]] / 5, quint[k], fields[keep[k]]);
  const std::vector<double> ranks = rank_within_groups(v, keys);
  std::unordered_map<std::string_view, double> rank_of;
  for (std::size_t k = 0; k < keep.size(); ++k) rank_of.emplace(ids[keep[k]], ranks[k]);

  const char* groups[3] = {"early", "middle", "late"};
  auto group_of = [&](double x) { return x < ctx.cfg.stage_early ? 0 : (x >= ctx.cfg.stage_late ? 2 : 1); };
  std::vector<std::pair<double, double>> points[3][2];  // [group][hot|all] -> (0, rank)
  for (std::size_t a = 0; a < ctx.careers.size(); ++a) {
    std::set<int> author_groups;
    for (const auto& r : ctx.windows[a]) {
      if (r.window.label != SequenceLabel::Hot) continue;
      const int g = group_of(r.window.onset_relative);
      author_groups.insert(g);
      for (const auto& p : r.window.papers) {
        if (const auto it = rank_of.find(p); it != rank_of.end()) points[g][0].emplace_back(0.0, it->second);
      }
    }
    for (const int g : author_groups) {
      for (const auto& p : ctx.careers[a]->papers) {
        if (const auto it = rank_of.find(p); it != rank_of.end()) points[g][1].emplace_back(0.0, it->second);
      }
    }
  }
  std::string csv = "group,series,count,mean_rank,se,ci95\n";
  for (int g = 0; g < 3; ++g) {
    for (int s = 0; s < 2; ++s) {
      const auto curve = binned_metric_curve(points[g][s], 1);
      const auto& b = curve.bins[0];
      csv += fmt::format("{},{},{},{},{},{}\n", groups[g], s == 0 ? "hot_papers" : "all_papers", b.count,
                         opt_num(b.mean), opt_num(b.standard_error), opt_num(b.ci_half_width));
    }
  }
  out.write("disruption.csv", csv);
}

void stage_stats(Context& ctx, Outputs& out) {
  ensure_spans(ctx);
  timing_views(ctx, out);
  onset_views(ctx, out);
  overlap_view(ctx, out);
  disruption_view(ctx, out);
}

void stage_report(Context& ctx, Outputs& out) {
  for (const auto& author : ctx.cfg.report_authors)
    out.write(fmt::format("reports/{}.json", author), author_dossier(ctx.corpus.store, author, ctx.cfg));
}

void run_stage(const std::string& name, Context& ctx, Outputs& out) {
  if (name == "ingest") return stage_ingest(ctx, out);
  if (name == "detect") return stage_detect(ctx, out);
  if (name == "classify") return stage_classify(ctx, out);
  if (name == "metrics") return stage_metrics(ctx, out);
  if (name == "fit") return stage_fit(ctx, out);
  if (name == "stats") return stage_stats(ctx, out);
  if (name == "report") return stage_report(ctx, out);
  throw PreconditionError("unknown stage " + name);
}

}  // namespace

std::vector<double> fit_input(const AuthorCareer& career, ImpactScale scale) {
  std::vector<double> out(career.impacts.begin(), career.impacts.end());
  if (scale == ImpactScale::Log) {
    for (auto& v : out) v = std::log10(v + 1.0);
  }
  return out;
}

PreparedCorpus prepare_corpus(const PipelineConfig& cfg, bool use_cache) {
  if (cfg.papers_path.empty() || cfg.citations_path.empty())
    throw PreconditionError("config: input.papers and input.citations must be set");
  const std::string key =
      sha256_hex(cfg.ingest_json() + "\n" + sha256_file(cfg.papers_path) + "\n" + sha256_file(cfg.citations_path));
  const fs::path cache = cfg.out_dir / "cache" / fmt::format("corpus-{}.snapshot", key.substr(0, 24));
  PreparedCorpus out;
  if (use_cache && fs::exists(cache)) {
    std::ifstream in(cache, std::ios::binary);
    out.store = read_snapshot(in);
    out.baseline = FieldYearBaseline::build(out.store);
    out.from_cache = true;
    log_line("corpus loaded from cache " + cache.filename().string());
    return out;
  }
  CorpusStore store;
  {
    std::ifstream papers(cfg.papers_path, std::ios::binary);
    std::ifstream citations(cfg.citations_path, std::ios::binary);
    if (!papers) throw DataError("cannot read " + cfg.papers_path.string());
    if (!citations) throw DataError("cannot read " + cfg.citations_path.string());
    store = ingest(papers, citations);
  }
  log_line(fmt::format("ingested {} papers, {} citations", store.papers().size(), store.citations().size()));
  store = annotate_c10(std::move(store));
  if (cfg.field_source == FieldSource::Cluster) {
    std::map<std::string, int> fields;
    {
      const WeightedGraph g = citation_graph(store);
      fields = assign_fields(g, cfg.field_gamma, cfg.field_min_size, derive_seed(cfg.seed, "clustering", 0));
    }
    store = apply_fields(std::move(store), fields);
    log_line(fmt::format("assigned fields to {} papers", fields.size()));
  }
  store = filter_authors(store, cfg.min_papers, cfg.min_years, month_of(cfg.cutoff_year, 1));
  if (cfg.field_source == FieldSource::Input) {
    for (const auto& [author, c] : store.careers()) {
      for (const auto& id : c.papers) {
        if (!store.paper(id).field_id) throw DataError(fmt::format("paper {} of author {} has no field_id", id, author));
      }
    }
  }
  store = annotate_impacts(std::move(store), cfg.k_percent, &out.baseline);
  out.store = std::move(store);
  if (use_cache) {
    fs::create_directories(cache.parent_path());
    const fs::path tmp = cache.string() + ".tmp";
    {
      std::ofstream o(tmp, std::ios::binary | std::ios::trunc);
      write_snapshot(out.store, o);
      if (!o.flush()) throw DataError("cannot write cache " + tmp.string());
    }
    fs::rename(tmp, cache);
  }
  return out;
}

RunResult run_pipeline(const PipelineConfig& config, const std::vector<std::string>& stages) {
  RunResult result;
  std::vector<std::string> order;
  for (const auto& s : stages) {
    if (s == "all") {
      order = kStages;
      break;
    }
    if (std::find(kStages.begin(), kStages.end(), s) == kStages.end()) {
      result.exit_code = kExitUsage;
      result.message = "unknown stage " + s;
      return result;
    }
  }
  if (order.empty()) {
    for (const auto& s : kStages) {
      if (std::find(stages.begin(), stages.end(), s) != stages.end()) order.push_back(s);
    }
  }

  Outputs out(config.out_dir);
  Context ctx(config);
  json stage_log = json::array();
  std::string current = "load";
  try {
    config.validate();
    fs::create_directories(config.out_dir);
    out.set_stage(current);
    auto t0 = std::chrono::steady_clock::now();
    load(ctx);
    result.authors = ctx.careers.size();
    log_line(fmt::format("{} authors after filtering ({:.1f}s)", ctx.careers.size(),
                         std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()));
    for (const auto& s : order) {
      current = s;
      out.set_stage(s);
      t0 = std::chrono::steady_clock::now();
      run_stage(s, ctx, out);
      stage_log.push_back({{"name", s}, {"status", "ok"}});
      log_line(fmt::format("stage {} done ({:.1f}s)", s,
                           std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()));
    }
  } catch (const PreconditionError& e) {
    result.exit_code = current == "load" ? kExitUsage : kExitData;
    result.message = e.what();
  } catch (const DataError& e) {
    result.exit_code = kExitData;
    result.message = e.what();
  } catch (const std::exception& e) {
    result.exit_code = kExitInternal;
    result.message = e.what();
  }
  if (result.exit_code != kExitOk) {
    result.failed_stage = current;
    out.invalidate(current);
    stage_log.push_back({{"name", current}, {"status", "failed"}, {"error", result.message}});
    log_line(fmt::format("stage {} failed: {}", current, result.message));
  }

  json seeds = json::object();
  for (const auto& slot : kSeedSlots) seeds[slot] = derive_seed(config.seed, slot, 0);
  json manifest = {{"config_hash", config.hash()},
                   {"seed", config.seed},
                   {"seed_slots", seeds},
                   {"authors", result.authors},
                   {"stages", stage_log},
                   {"failed_stage", result.failed_stage.empty() ? json(nullptr) : json(result.failed_stage)},
                   {"files", out.manifest_files()}};
  try {
    fs::create_directories(config.out_dir);
    std::ofstream m(config.out_dir / "manifest.json", std::ios::binary | std::ios::trunc);
    m << manifest.dump(2) << '\n';
  } catch (const std::exception& e) {
    if (result.exit_code == kExitOk) {
      result.exit_code = kExitInternal;
      result.message = std::string("cannot write manifest: ") + e.what();
    }
  }
  return result;
}

}  // namespace streakforge
