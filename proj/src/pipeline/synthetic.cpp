#include "streakforge/pipeline/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <set>

#include <fmt/format.h>
#include <json.hpp>

#include "streakforge/error.hpp"
#include "streakforge/random.hpp"

namespace streakforge {

using nlohmann::json;

const char* to_string(Placement p) {
  switch (p) {
    case Placement::None:
      return "none";
    case Placement::Early:
      return "early";
    case Placement::Late:
      return "late";
    case Placement::EarlyLate:
      return "early_late";
    case Placement::Uniform:
      return "uniform";
  }
  return "none";
}

Placement parse_placement(std::string_view text) {
  for (const Placement p : {Placement::None, Placement::Early, Placement::Late, Placement::EarlyLate, Placement::Uniform}) {
    if (text == to_string(p)) return p;
  }
  throw PreconditionError(fmt::format("unknown placement '{}'", text));
}

void SyntheticSpec::validate() const {
  auto fail = [](const std::string& what) { throw PreconditionError("synthetic spec: " + what); };
  if (n_min < 9 || n_max < n_min || n_max > 999) fail("need 9 <= n_min <= n_max <= 999");
  if (min_career_years < 1 || max_career_years < min_career_years) fail("bad career year range");
  if (last_year - first_year < max_career_years) fail("year range shorter than the longest career");
  if (first_year < kEpochYear || last_year > 2012) fail("careers must lie within 1970..2012");
  if (fields < 1) fail("fields must be positive");
  if (streak_fraction < 0.0 || single_hit_fraction < 0.0 || streak_fraction + single_hit_fraction > 1.0)
    fail("streak and single-hit fractions must be nonnegative and sum to at most 1");
  if (hits_per_window < 1 || hits_per_window > static_cast<int>(kWindowLength)) fail("hits_per_window must lie in [1, 5]");
  if (refs_per_paper < 1 || ref_pool < refs_per_paper) fail("ref_pool must hold refs_per_paper references");
  if (coauthor_pool < 1) fail("coauthor_pool must be positive");
  if (big_team_min < 2 || big_team_max < big_team_min) fail("bad big-team size range");
}

std::string synthetic_author_id(std::size_t index) { return fmt::format("A{:06}", index); }

namespace {

constexpr int kSlotsPerMonth = 4;
constexpr int kDataEndYear = 2022;

class CiterPool {
 public:
  CiterPool(int fields, Month end) : fields_(fields), end_(end), refs_(static_cast<std::size_t>(fields) * (end + 1) * kSlotsPerMonth) {}

  Month end() const { return end_; }

  /// Picks a citing paper of `field` at `month` (or the next free month) that
  /// does not yet cite `cited`, records the reference and returns its token.
  std::optional<std::pair<std::string, Month>> cite(int field, Month month, const std::string& cited,
                                                    std::set<std::size_t>& used) {
    for (Month m = month; m <= end_; ++m) {
      for (int j = 0; j < kSlotsPerMonth; ++j) {
        const std::size_t idx = slot(field, m, j);
        if (used.insert(idx).second) {
          refs_[idx].push_back(cited);
          return std::make_pair(token(field, m, j), m);
        }
      }
    }
    return std::nullopt;
  }

  void write(std::ostream& out, bool emit_fields) const {
    for (int f = 0; f < fields_; ++f) {
      for (Month m = 0; m <= end_; ++m) {
        for (int j = 0; j < kSlotsPerMonth; ++j) {
          const auto& refs = refs_[slot(f, m, j)];
          if (refs.empty()) continue;
          PaperRecord p;
          p.paper_id = token(f, m, j);
          p.pub_month = m;
          p.author_ids = {fmt::format("ext.f{}.{}", f, year_of(m))};
          p.reference_ids = refs;
          std::sort(p.reference_ids.begin(), p.reference_ids.end());
          if (emit_fields) p.field_id = f;
          out << paper_to_ndjson(p, emit_fields) << '\n';
        }
      }
    }
  }

 private:
  std::size_t slot(int field, Month m, int j) const {
    return (static_cast<std::size_t>(field) * static_cast<std::size_t>(end_ + 1) + static_cast<std::size_t>(m)) *
               kSlotsPerMonth +
           static_cast<std::size_t>(j);
  }
  static std::string token(int field, Month m, int j) { return fmt::format("E.f{}.m{:04}.{}", field, m, j); }

  int fields_;
  Month end_;
  std::vector<std::vector<std::string>> refs_;
};

// k distinct values from [0, n), in draw order.
std::vector<int> draw_distinct(Rng& rng, int n, int k) {
  std::vector<int> all(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) all[static_cast<std::size_t>(i)] = i;
  for (int i = 0; i < k; ++i) {
    const auto j = static_cast<std::size_t>(i) + rng.uniform_index(static_cast<std::uint64_t>(n - i));
    std::swap(all[static_cast<std::size_t>(i)], all[j]);
  }
  all.resize(static_cast<std::size_t>(k));
  return all;
}

std::size_t planted_start(Rng& rng, Placement placement, std::size_t n) {
  const std::size_t last = n - kWindowLength;
  const auto early_hi = [&] {
    const auto c = static_cast<std::size_t>(std::ceil(0.1 * static_cast<double>(last)));
    return c == 0 ? 0 : c - 1;
  };
  const auto late_lo = [&] { return static_cast<std::size_t>(std::ceil(0.9 * static_cast<double>(last))); };
  switch (placement) {
    case Placement::Early:
      return rng.uniform_index(early_hi() + 1);
    case Placement::Late:
      return late_lo() + rng.uniform_index(last - late_lo() + 1);
    case Placement::EarlyLate:
      return rng.bernoulli(0.5) ? rng.uniform_index(early_hi() + 1) : late_lo() + rng.uniform_index(last - late_lo() + 1);
    case Placement::Uniform:
      return rng.uniform_index(last + 1);
    case Placement::None:
      break;
  }
  throw PreconditionError("planted_start: no placement");
}

}  // namespace

SyntheticTruth generate_synthetic(const SyntheticSpec& spec, std::ostream& papers, std::ostream& citations) {
  spec.validate();
  SyntheticTruth truth;
  truth.authors.reserve(spec.authors);
  const Month data_end = month_of(kDataEndYear, 12);
  CiterPool pool(spec.fields, data_end);
  const Month first_start = month_of(spec.first_year, 1);
  const Month last_end = month_of(spec.last_year, 12);
  const DetectionParams truth_params{3, 5, 10.0};

  for (std::size_t a = 0; a < spec.authors; ++a) {
    Rng rng(derive_seed(spec.seed, "synthesis", a));
    PlantedAuthor pa;
    pa.author_id = synthetic_author_id(a);
    const auto n = static_cast<std::size_t>(
        rng.uniform_int(static_cast<std::int64_t>(spec.n_min), static_cast<std::int64_t>(spec.n_max)));
    pa.n_total = n;
    const auto span_months = static_cast<Month>(12 * rng.uniform_int(spec.min_career_years, spec.max_career_years));
    const auto start = static_cast<Month>(rng.uniform_int(first_start, last_end - span_months));
    std::vector<Month> months(n);
    months.front() = start;
    months.back() = start + span_months;
    for (std::size_t k = 1; k + 1 < n; ++k) months[k] = static_cast<Month>(rng.uniform_int(start, start + span_months));
    std::sort(months.begin(), months.end());

    const int home = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(spec.fields)));
    pa.fields.resize(n);
    for (auto& f : pa.fields) {
      f = home;
      if (spec.fields > 1 && rng.bernoulli(spec.cross_field_prob)) {
        f = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(spec.fields - 1)));
        if (f >= home) ++f;
      }
    }

    // role: planted window, single hit, or plain
    const double role = rng.uniform01();
    std::optional<std::size_t> window;
    if (spec.placement != Placement::None && role < spec.streak_fraction) {
      const std::size_t s = planted_start(rng, spec.placement, n);
      window = s;
      const double rel = relative_timing(s, n, kWindowLength);
      pa.placement = rel < 0.5 ? Placement::Early : Placement::Late;
      if (spec.placement == Placement::Uniform) pa.placement = Placement::Uniform;
      pa.hits.push_back(s);
      for (const int off : draw_distinct(rng, 4, spec.hits_per_window - 1)) pa.hits.push_back(s + 1 + static_cast<std::size_t>(off));
      std::sort(pa.hits.begin(), pa.hits.end());
      pa.dense_window = rng.bernoulli(spec.p_dense);
      pa.big_window = rng.bernoulli(spec.p_big);
    } else if (role < spec.streak_fraction + spec.single_hit_fraction) {
      pa.single_hit = true;
      pa.hits.push_back(rng.uniform_index(n));
    }
    const auto in_window = [&](std::size_t k) { return window && k >= *window && k < *window + kWindowLength; };
    const std::size_t skip_dense = rng.uniform_index(kWindowLength);
    const std::size_t big_pos = rng.uniform_index(kWindowLength);

    // topics: Markov switching with revisits; the planted window keeps one topic
    pa.topics.resize(n);
    int next_topic = 1;
    for (std::size_t k = 1; k < n; ++k) {
      int t = pa.topics[k - 1];
      if (in_window(k) && k != *window) {
        pa.topics[k] = t;
        continue;
      }
      if (rng.bernoulli(spec.topic_switch)) {
        if (next_topic > 1 && rng.bernoulli(spec.topic_revisit)) {
          int r = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(next_topic - 1)));
          if (r >= t) ++r;
          t = r;
        } else {
          t = next_topic++;
        }
      }
      pa.topics[k] = t;
    }

    std::vector<bool> hit_flags(n, false);
    for (const auto h : pa.hits) hit_flags[h] = true;
    if (window) pa.planted_spans = detect_streaks(hit_flags, truth_params);

    for (std::size_t k = 0; k < n; ++k) {
      PaperRecord p;
      p.paper_id = fmt::format("P{:06}.{:03}", a, k);
      p.pub_month = months[k];
      p.field_id = pa.fields[k];
      p.author_ids.push_back(pa.author_id);
      const auto extra = std::min<std::uint32_t>(static_cast<std::uint32_t>(spec.coauthor_pool),
                                                 rng.poisson(spec.mean_extra_authors));
      if (in_window(k)) {
        const std::size_t pos = k - *window;
        if (pa.dense_window && pos != skip_dense) p.author_ids.push_back(pa.author_id + ".d0");
        for (std::uint32_t j = 0; j < extra; ++j) p.author_ids.push_back(fmt::format("{}.w{:03}.{}", pa.author_id, k, j));
      } else {
        const int offset = static_cast<int>(k / 5) * 2;
        for (const int c : draw_distinct(rng, spec.coauthor_pool, static_cast<int>(extra)))
          p.author_ids.push_back(fmt::format("{}.c{}", pa.author_id, offset + c));
      }
      const bool big = in_window(k) ? (pa.big_window && k - *window == big_pos) : rng.bernoulli(spec.p_big_background);
      if (big) {
        const auto size = rng.uniform_int(spec.big_team_min, spec.big_team_max);
        for (std::int64_t j = static_cast<std::int64_t>(p.author_ids.size()); j < size; ++j)
          p.author_ids.push_back(fmt::format("{}.p{:03}.m{:02}", pa.author_id, k, j));
      }
      for (const int r : draw_distinct(rng, spec.ref_pool, spec.refs_per_paper))
        p.reference_ids.push_back(fmt::format("{}.t{}.r{}", pa.author_id, pa.topics[k], r));
      std::sort(p.reference_ids.begin(), p.reference_ids.end());
      papers << paper_to_ndjson(p, spec.emit_fields) << '\n';

      double latent = rng.normal(0.0, spec.latent_sd);
      if (hit_flags[k]) latent += pa.single_hit ? spec.single_hit_boost : spec.hit_boost;
      const double rate = std::exp(spec.log_rate + latent);
      const std::uint32_t in10 = rng.poisson(rate);
      const std::uint32_t late = rng.poisson(rate * spec.late_citation_fraction);
      std::set<std::size_t> used;
      auto emit = [&](Month m) {
        if (m > pool.end()) return;
        if (const auto c = pool.cite(pa.fields[k], m, p.paper_id, used)) {
          CitationEvent e{c->first, p.paper_id, c->second};
          citations << citation_to_ndjson(e) << '\n';
        }
      };
      for (std::uint32_t c = 0; c < in10; ++c) emit(months[k] + static_cast<Month>(rng.uniform_int(0, 119)));
      for (std::uint32_t c = 0; c < late; ++c) emit(months[k] + static_cast<Month>(rng.uniform_int(120, 239)));
    }
    truth.authors.push_back(std::move(pa));
  }
  pool.write(papers, spec.emit_fields);
  return truth;
}

void write_truth(const SyntheticTruth& truth, std::ostream& out) {
  json authors = json::array();
  for (const auto& a : truth.authors) {
    json spans = json::array();
    for (const auto& s : a.planted_spans) spans.push_back({s.start_idx, s.end_idx});
    authors.push_back({{"author_id", a.author_id},
                       {"n_total", a.n_total},
                       {"placement", to_string(a.placement)},
                       {"single_hit", a.single_hit},
                       {"hits", a.hits},
                       {"planted_spans", spans},
                       {"topics", a.topics},
                       {"fields", a.fields},
                       {"dense_window", a.dense_window},
                       {"big_window", a.big_window}});
  }
  out << json{{"authors", authors}}.dump() << '\n';
}

SyntheticTruth read_truth(std::istream& in) {
  SyntheticTruth truth;
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw DataError(std::string("truth file: ") + e.what());
  }
  for (const auto& a : doc.at("authors")) {
    PlantedAuthor pa;
    pa.author_id = a.at("author_id").get<std::string>();
    pa.n_total = a.at("n_total").get<std::size_t>();
    pa.placement = parse_placement(a.at("placement").get<std::string>());
    pa.single_hit = a.at("single_hit").get<bool>();
    pa.hits = a.at("hits").get<std::vector<std::size_t>>();
    for (const auto& s : a.at("planted_spans")) {
      const auto start = s.at(0).get<std::size_t>();
      pa.planted_spans.push_back(
          {start, s.at(1).get<std::size_t>(), relative_timing(start, pa.n_total, kWindowLength), std::nullopt});
    }
    pa.topics = a.at("topics").get<std::vector<int>>();
    pa.fields = a.at("fields").get<std::vector<int>>();
    pa.dense_window = a.at("dense_window").get<bool>();
    pa.big_window = a.at("big_window").get<bool>();
    truth.authors.push_back(std::move(pa));
  }
  return truth;
}

SyntheticFiles write_synthetic(const SyntheticSpec& spec, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  SyntheticFiles files{dir / "papers.ndjson", dir / "citations.ndjson", dir / "truth.json"};
  std::ofstream papers(files.papers, std::ios::binary);
  std::ofstream citations(files.citations, std::ios::binary);
  std::ofstream truth_out(files.truth, std::ios::binary);
  if (!papers || !citations || !truth_out) throw DataError("cannot write synthetic corpus into " + dir.string());
  const SyntheticTruth truth = generate_synthetic(spec, papers, citations);
  write_truth(truth, truth_out);
  if (!papers.flush() || !citations.flush() || !truth_out.flush())
    throw DataError("failed writing synthetic corpus into " + dir.string());
  return files;
}

}  // namespace streakforge
