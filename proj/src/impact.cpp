#include "streakforge/impact.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include <fmt/format.h>

#include "streakforge/error.hpp"
#include "streakforge/random.hpp"

namespace streakforge {

std::uint32_t compute_c10(Month pub_month, std::span<const Month> citing_months) {
  std::uint32_t n = 0;
  for (const Month m : citing_months) {
    if (m >= pub_month && m < pub_month + kCitationWindowMonths) ++n;
  }
  return n;
}

FieldYearBaseline FieldYearBaseline::build(const CorpusStore& store) {
  FieldYearBaseline baseline;
  for (const auto& [id, paper] : store.papers()) {
    if (paper.field_id && paper.c10) baseline.add(*paper.field_id, year_of(paper.pub_month), *paper.c10);
  }
  return baseline;
}

void FieldYearBaseline::add(int field_id, int year, std::uint32_t c10) {
  auto& c = cells_[{field_id, year}];
  c.sum += static_cast<double>(c10);
  ++c.count;
}

bool FieldYearBaseline::contains(int field_id, int year) const { return cells_.contains({field_id, year}); }

const FieldYearBaseline::Cell& FieldYearBaseline::cell(int field_id, int year) const {
  const auto it = cells_.find({field_id, year});
  if (it == cells_.end()) throw DataError(fmt::format("no baseline cell for field {} year {}", field_id, year));
  return it->second;
}

double FieldYearBaseline::mean(int field_id, int year) const { return cell(field_id, year).mean(); }

std::size_t FieldYearBaseline::count(int field_id, int year) const { return cell(field_id, year).count; }

void FieldYearBaseline::write_csv(std::ostream& out) const {
  out << "field_id,year,mean_c10,count\n";
  for (const auto& [key, c] : cells_) out << fmt::format("{},{},{},{}\n", key.first, key.second, c.mean(), c.count);
}

double normalize_impact(std::uint32_t c10, int field_id, int year, const FieldYearBaseline& baseline) {
  const double mean = baseline.mean(field_id, year);
  if (mean == 0.0) return 0.0;
  return static_cast<double>(c10) / mean;
}

std::size_t top_k_count(std::size_t n, double k_percent) {
  if (n == 0) return 0;
  const auto m = static_cast<std::size_t>(std::ceil(k_percent * static_cast<double>(n) / 100.0));
  return std::clamp<std::size_t>(m, 1, n);
}

std::vector<bool> top_k_flags(std::span<const double> impacts, double k_percent, std::span<const std::uint32_t> raw_c10) {
  if (!(k_percent > 0.0 && k_percent <= 100.0)) throw PreconditionError("top_k_flags: k_percent must be in (0, 100]");
  if (impacts.empty()) throw PreconditionError("top_k_flags: impacts must be non-empty");
  if (!raw_c10.empty() && raw_c10.size() != impacts.size())
    throw PreconditionError("top_k_flags: raw_c10 must parallel impacts");
  std::vector<std::size_t> order(impacts.size());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t m = top_k_count(impacts.size(), k_percent);
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(m), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (impacts[a] != impacts[b]) return impacts[a] > impacts[b];
                      if (!raw_c10.empty() && raw_c10[a] != raw_c10[b]) return raw_c10[a] > raw_c10[b];
                      return a < b;
                    });
  std::vector<bool> flags(impacts.size(), false);
  for (std::size_t i = 0; i < m; ++i) flags[order[i]] = true;
  return flags;
}

std::vector<std::size_t> shuffle_order(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(perm));
  return perm;
}

AuthorCareer shuffle_career(const AuthorCareer& career, std::uint64_t seed) {
  const std::vector<std::size_t> perm = shuffle_order(career.n_total(), seed);
  AuthorCareer out = career;
  for (std::size_t i = 0; i < perm.size(); ++i) {
    out.impacts[i] = career.impacts[perm[i]];
    out.top_flags[i] = career.top_flags[perm[i]];
  }
  return out;
}

std::vector<std::uint32_t> career_c10(const CorpusStore& store, const AuthorCareer& career) {
  std::vector<std::uint32_t> out;
  out.reserve(career.n_total());
  for (const auto& id : career.papers) out.push_back(store.paper(id).c10.value_or(0));
  return out;
}

CorpusStore annotate_c10(CorpusStore store) {
  std::vector<Month> months;
  for (const auto& [id, paper] : store.papers()) {
    months.clear();
    for (const auto* c : store.citations_of(id)) months.push_back(c->citing_month);
    store.mutable_paper(id).c10 = compute_c10(paper.pub_month, months);
  }
  return store;
}

CorpusStore apply_fields(CorpusStore store, const std::map<std::string, int>& fields) {
  for (const auto& [id, field] : fields) {
    if (store.find_paper(id) != nullptr) store.mutable_paper(id).field_id = field;
  }
  return store;
}

CorpusStore annotate_impacts(CorpusStore store, double k_percent, FieldYearBaseline* baseline_out) {
  const FieldYearBaseline baseline = FieldYearBaseline::build(store);
  std::vector<std::string> ids;
  ids.reserve(store.papers().size());
  for (const auto& [id, paper] : store.papers()) ids.push_back(id);
  for (const auto& id : ids) {
    auto& p = store.mutable_paper(id);
    if (p.field_id && p.c10) {
      p.c10_norm = normalize_impact(*p.c10, *p.field_id, year_of(p.pub_month), baseline);
    } else {
      p.c10_norm.reset();
    }
  }
  for (auto& [author, career] : store.mutable_careers()) {
    std::vector<std::uint32_t> raw;
    raw.reserve(career.n_total());
    career.impacts.clear();
    for (const auto& id : career.papers) {
      const auto& p = store.paper(id);
      career.impacts.push_back(p.c10_norm.value_or(0.0));
      raw.push_back(p.c10.value_or(0));
    }
    if (career.n_total() > 0) career.top_flags = top_k_flags(career.impacts, k_percent, raw);
  }
  if (baseline_out != nullptr) *baseline_out = baseline;
  return store;
}

}  // namespace streakforge
