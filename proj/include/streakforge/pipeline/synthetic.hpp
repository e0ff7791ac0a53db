#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "streakforge/detect.hpp"

namespace streakforge {

enum class Placement { None, Early, Late, EarlyLate, Uniform };
const char* to_string(Placement p);
Placement parse_placement(std::string_view text);

/// Knobs of the synthetic corpus generator. Careers are drawn independently
/// per author from seeded streams, so adding authors never changes earlier ones.
struct SyntheticSpec {
  std::size_t authors = 1000;
  std::uint64_t seed = 1;

  std::size_t n_min = 40;  // papers per career, uniform in [n_min, n_max]
  std::size_t n_max = 120;
  int min_career_years = 21;
  int max_career_years = 35;
  int first_year = 1975;
  int last_year = 2012;  // no paper after this year

  int fields = 8;
  double cross_field_prob = 0.1;

  Placement placement = Placement::EarlyLate;
  double streak_fraction = 1.0;      // authors with one planted 3-of-5 window
  double single_hit_fraction = 0.0;  // authors with one isolated hit instead
  int hits_per_window = 3;
  double hit_boost = 1.5;         // added to the log citation rate of a hit
  double single_hit_boost = 2.5;

  double log_rate = 1.25;  // log of the typical 10-year citation count
  double latent_sd = 0.6;
  double late_citation_fraction = 0.15;

  double topic_switch = 0.15;
  double topic_revisit = 0.4;
  int refs_per_paper = 3;
  int ref_pool = 10;

  double p_dense = 0.8;  // planted windows with a recurring co-author
  double p_big = 0.4;    // planted windows containing a big team
  double p_big_background = 0.02;
  int big_team_min = 12;
  int big_team_max = 40;
  int coauthor_pool = 10;
  double mean_extra_authors = 2.0;

  bool emit_fields = false;

  void validate() const;  // throws PreconditionError
};

struct PlantedAuthor {
  std::string author_id;
  std::size_t n_total = 0;
  Placement placement = Placement::None;
  bool single_hit = false;
  std::vector<std::size_t> hits;
  std::vector<StreakSpan> planted_spans;  // detect_streaks(3, 5) on hit-only flags
  std::vector<int> topics;
  std::vector<int> fields;
  bool dense_window = false;
  bool big_window = false;
};

struct SyntheticTruth {
  std::vector<PlantedAuthor> authors;
};

struct SyntheticFiles {
  std::filesystem::path papers;
  std::filesystem::path citations;
  std::filesystem::path truth;
};

/// Streams the corpus in the ingest format and returns the planted truth.
SyntheticTruth generate_synthetic(const SyntheticSpec& spec, std::ostream& papers, std::ostream& citations);

/// Writes papers.ndjson, citations.ndjson and truth.json into dir.
SyntheticFiles write_synthetic(const SyntheticSpec& spec, const std::filesystem::path& dir);

void write_truth(const SyntheticTruth& truth, std::ostream& out);
SyntheticTruth read_truth(std::istream& in);

/// Author token of the i-th synthetic author.
std::string synthetic_author_id(std::size_t index);

}  // namespace streakforge
