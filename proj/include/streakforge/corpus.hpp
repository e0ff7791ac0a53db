#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace streakforge {

/// Months since 1970-01 (month 0).
using Month = std::int32_t;

inline constexpr int kEpochYear = 1970;
inline constexpr std::string_view kSnapshotHeader = "STREAKFORGE-CORPUS-v1";

/// Calendar year of a month index (floor division, so negative months work).
int year_of(Month month);
Month month_of(int year, int month_in_year = 1);

struct PaperRecord {
  std::string paper_id;
  Month pub_month = 0;
  std::vector<std::string> author_ids;
  std::vector<std::string> reference_ids;
  std::optional<int> field_id;
  std::optional<std::uint32_t> c10;
  std::optional<double> c10_norm;

  bool operator==(const PaperRecord&) const = default;
};

struct CitationEvent {
  std::string citing_id;
  std::string cited_id;
  Month citing_month = 0;

  bool operator==(const CitationEvent&) const = default;
};

/// One author's publications ordered by (pub_month, paper_id), with parallel
/// impact values and top-k flags. pub_months caches the paper dates.
struct AuthorCareer {
  std::string author_id;
  std::vector<std::string> papers;
  std::vector<Month> pub_months;
  std::vector<double> impacts;
  std::vector<bool> top_flags;

  std::size_t n_total() const noexcept { return papers.size(); }
  bool operator==(const AuthorCareer&) const = default;
};

struct FilterRecord {
  int min_papers = 1;
  int min_years = 0;
  Month cutoff_month = 0;

  bool operator==(const FilterRecord&) const = default;
};

/// Papers, citation events and assembled careers.
///
/// Built once by ingest()/from_records() and treated as read-only afterwards;
/// annotation passes (impact, fields) work on a copy and return it.
class CorpusStore {
 public:
  CorpusStore() = default;

  /// Validates records and assembles careers. Throws DataError on invariant
  /// violations (duplicate ids, empty author lists, self-citations, ...).
  static CorpusStore from_records(std::vector<PaperRecord> papers, std::vector<CitationEvent> citations);

  const std::map<std::string, PaperRecord>& papers() const noexcept { return papers_; }
  const std::map<std::string, AuthorCareer>& careers() const noexcept { return careers_; }
  const std::vector<CitationEvent>& citations() const noexcept { return citations_; }
  const std::optional<FilterRecord>& filters() const noexcept { return filters_; }

  const PaperRecord* find_paper(std::string_view id) const;
  const PaperRecord& paper(std::string_view id) const;  // throws DataError
  const AuthorCareer* find_career(std::string_view author) const;

  /// Citation events whose cited_id equals the given paper.
  std::vector<const CitationEvent*> citations_of(std::string_view cited_id) const;

  // Annotation hooks used by the impact and field passes.
  PaperRecord& mutable_paper(std::string_view id);
  std::map<std::string, AuthorCareer>& mutable_careers() noexcept { return careers_; }

  bool operator==(const CorpusStore& other) const;

 private:
  friend CorpusStore filter_authors(const CorpusStore&, int, int, Month);
  friend CorpusStore read_snapshot(std::istream&);

  void rebuild_citation_index();

  std::map<std::string, PaperRecord> papers_;
  std::map<std::string, AuthorCareer> careers_;
  std::vector<CitationEvent> citations_;
  std::vector<std::uint32_t> by_cited_;  // citation indices sorted by cited_id
  std::optional<FilterRecord> filters_;
};

/// Parses newline-delimited JSON streams. Papers carry {paper_id, pub_month,
/// authors, references} and optionally field_id; citations carry
/// {citing_id, cited_id, citing_month}. Blank lines are skipped.
/// Throws IngestError naming the stream and line number.
CorpusStore ingest(std::istream& papers, std::istream& citations);

/// Keeps papers with pub_month < cutoff_month in each career, then retains
/// authors with at least min_papers papers spanning at least 12*min_years months.
CorpusStore filter_authors(const CorpusStore& store, int min_papers, int min_years, Month cutoff_month);

void write_snapshot(const CorpusStore& store, std::ostream& out);
CorpusStore read_snapshot(std::istream& in);

/// One ingest-format line for a paper (used by the synthetic generator).
std::string paper_to_ndjson(const PaperRecord& paper, bool with_field);
std::string citation_to_ndjson(const CitationEvent& event);

}  // namespace streakforge
