#pragma once

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "streakforge/detect.hpp"

namespace streakforge {

using AuthorList = std::vector<std::string>;

inline constexpr std::size_t kBigProjectThreshold = 10;

double mean_team_size(std::span<const AuthorList> author_lists);
/// True iff some list has at least `threshold` authors.
bool has_big_project(std::span<const AuthorList> author_lists, std::size_t threshold = kBigProjectThreshold);
/// Largest number of lists shared by the focal author and any one co-author;
/// 0 when every paper is single-authored. Throws DataError if the focal
/// author is missing from a list.
int max_coauthor_freq(std::span<const AuthorList> author_lists, const std::string& focal);
bool is_dense_ties(std::span<const AuthorList> author_lists, const std::string& focal);

/// Co-authorship network of a window: nodes are all authors, edge weight is
/// the number of papers a pair shares.
class CoauthorshipLocalNet {
 public:
  static CoauthorshipLocalNet build(std::span<const AuthorList> author_lists, const std::string& focal);
  /// Explicit construction; node 0..n-1, focal index given. Edges are unordered pairs.
  static CoauthorshipLocalNet from_edges(std::size_t nodes, std::size_t focal,
                                         std::span<const std::pair<std::size_t, std::size_t>> edges);

  std::size_t node_count() const noexcept { return adjacency_.size(); }
  std::size_t focal() const noexcept { return focal_; }
  const std::vector<std::size_t>& neighbors(std::size_t u) const { return adjacency_.at(u); }
  int weight(std::size_t u, std::size_t v) const;
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::vector<std::vector<std::size_t>> adjacency_;
  std::map<std::pair<std::size_t, std::size_t>, int> weights_;
  std::size_t focal_ = 0;
};

/// Unweighted shortest-path betweenness of the focal node, normalised by
/// (n-1)(n-2)/2; 0 for fewer than 3 nodes.
double focal_betweenness(const CoauthorshipLocalNet& net);

int topic_diversity(std::span<const int> topics);
/// Most frequent topic, ties to the one seen first.
int dominant_topic(std::span<const int> topics);
bool is_new_topic(std::span<const int> topics, const std::set<int>& prior_topics);

enum class TieKind { Dense, Loose };
enum class TeamKind { Small, Large };

struct StreakTypeLabel {
  TieKind tie = TieKind::Loose;
  TeamKind team = TeamKind::Small;

  std::string name() const;  // "dense_small", ...
  bool operator==(const StreakTypeLabel&) const = default;
};

StreakTypeLabel classify_streak_type(std::span<const AuthorList> author_lists, const std::string& focal,
                                     std::size_t big_threshold = kBigProjectThreshold);

struct DisruptionCounts {
  std::size_t n_i = 0;  // cite the focal paper only
  std::size_t n_j = 0;  // cite the focal paper and a reference
  std::size_t n_k = 0;  // cite a reference but not the focal paper
};

/// citing maps each citer to the papers it cites among the focal paper and
/// its references.
DisruptionCounts disruption_counts(const std::string& focal, const std::set<std::string>& focal_refs,
                                   const std::map<std::string, std::set<std::string>>& citing);
/// (n_i - n_j) / (n_i + n_j + n_k); nullopt when no citer qualifies.
std::optional<double> disruption_index(const DisruptionCounts& counts);
std::optional<double> disruption_index(const std::string& focal, const std::set<std::string>& focal_refs,
                                       const std::map<std::string, std::set<std::string>>& citing);

/// (publication year bucket of 5 years, citation quintile 0..4, field).
using RankGroupKey = std::tuple<int, int, int>;

/// Mid-rank within each group: (strictly smaller + 0.5 * equal others) / (size - 1).
/// Singleton groups get 0.5.
std::vector<double> rank_within_groups(std::span<const double> values, std::span<const RankGroupKey> keys);

/// Quintile 0..4 of each value within its population: floor(5 * r / n), where
/// r counts strictly smaller values, so ties share a quintile.
std::vector<int> quintiles(std::span<const double> values);

/// Everything measured on one 5-paper window.
struct WindowMetrics {
  double mean_team_size = 0.0;
  bool big_project = false;
  int max_freq = 0;
  bool dense = false;
  double betweenness = 0.0;
  int diversity = 0;
  bool new_topic = false;
  StreakTypeLabel type;
  bool all_small_teams = false;  // every paper below the big-project threshold
};

WindowMetrics window_metrics(std::span<const AuthorList> author_lists, const std::string& focal,
                             std::span<const int> topics, const std::set<int>& prior_topics,
                             std::size_t big_threshold = kBigProjectThreshold);

}  // namespace streakforge
