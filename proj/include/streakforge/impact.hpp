#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "streakforge/corpus.hpp"

namespace streakforge {

/// Citations counted toward C10 fall in [pub_month, pub_month + 120).
inline constexpr Month kCitationWindowMonths = 120;

std::uint32_t compute_c10(Month pub_month, std::span<const Month> citing_months);

/// Mean C10 per (field, publication year) over all corpus papers that carry
/// both a field and a C10 value.
class FieldYearBaseline {
 public:
  struct Cell {
    double sum = 0.0;
    std::size_t count = 0;
    double mean() const { return count == 0 ? 0.0 : sum / static_cast<double>(count); }
  };
  using Key = std::pair<int, int>;  // (field_id, year)

  static FieldYearBaseline build(const CorpusStore& store);

  void add(int field_id, int year, std::uint32_t c10);
  bool contains(int field_id, int year) const;
  double mean(int field_id, int year) const;  // throws DataError naming the cell
  std::size_t count(int field_id, int year) const;
  const std::map<Key, Cell>& cells() const noexcept { return cells_; }

  /// CSV with header field_id,year,mean_c10,count.
  void write_csv(std::ostream& out) const;

 private:
  const Cell& cell(int field_id, int year) const;
  std::map<Key, Cell> cells_;
};

/// c10 / cell mean; 0 when the cell mean is 0.
double normalize_impact(std::uint32_t c10, int field_id, int year, const FieldYearBaseline& baseline);

/// ceil(k_percent * n / 100), at least 1 and at most n.
std::size_t top_k_count(std::size_t n, double k_percent);

/// Flags the top_k_count(n, k) papers by impact. Ties go to the higher raw
/// C10 (when given), then the earlier position in the career.
std::vector<bool> top_k_flags(std::span<const double> impacts, double k_percent,
                              std::span<const std::uint32_t> raw_c10 = {});

/// Seeded Fisher-Yates permutation of 0..n-1; position i takes item perm[i].
std::vector<std::size_t> shuffle_order(std::size_t n, std::uint64_t seed);

/// Jointly permutes impacts and top flags with a seeded Fisher-Yates shuffle.
/// Paper order and dates are untouched.
AuthorCareer shuffle_career(const AuthorCareer& career, std::uint64_t seed);

/// Raw C10 values along a career (0 for papers without one).
std::vector<std::uint32_t> career_c10(const CorpusStore& store, const AuthorCareer& career);

/// Computes C10 for every paper from the store's citation events.
CorpusStore annotate_c10(CorpusStore store);

/// Overwrites field ids; papers absent from the mapping keep their field.
CorpusStore apply_fields(CorpusStore store, const std::map<std::string, int>& fields);

/// Builds the field-year baseline, writes c10_norm on every paper with a field
/// and C10, then fills career impacts and top-k flags.
CorpusStore annotate_impacts(CorpusStore store, double k_percent, FieldYearBaseline* baseline_out = nullptr);

}  // namespace streakforge
