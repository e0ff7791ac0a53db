#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "streakforge/corpus.hpp"

namespace streakforge {

/// X flags within N consecutive papers, with flags taken from the top k percent.
struct DetectionParams {
  int x = 3;
  int n = 5;
  double k_percent = 10.0;

  void validate() const;  // throws PreconditionError unless 1 <= x <= n and 0 < k <= 100
  std::string label() const;  // "3of5_k10"
};

struct StreakSpan {
  std::size_t start_idx = 0;
  std::size_t end_idx = 0;  // inclusive
  double onset_relative = 0.0;
  std::optional<Month> onset_month;

  std::size_t length() const noexcept { return end_idx - start_idx + 1; }
  bool operator==(const StreakSpan&) const = default;
};

/// Relative position of a window start: start / (n_total - n), or 0 when n_total <= n.
double relative_timing(std::size_t start_idx, std::size_t n_total, std::size_t n);

/// Marks every window [i, i+N) holding at least X flags and merges marked
/// windows whose index ranges intersect. Spans come back disjoint and sorted.
/// months, when given, must parallel flags and fills onset_month.
std::vector<StreakSpan> detect_streaks(std::span<const bool> flags, const DetectionParams& params,
                                       std::span<const Month> months = {});
std::vector<StreakSpan> detect_streaks(const std::vector<bool>& flags, const DetectionParams& params,
                                       std::span<const Month> months = {});

inline constexpr std::size_t kWindowLength = 5;

enum class SequenceLabel { Hot, Top, Ordinary };
const char* to_string(SequenceLabel label);

struct SequenceWindow {
  std::string author_id;
  std::size_t start_idx = 0;
  SequenceLabel label = SequenceLabel::Ordinary;
  std::vector<std::string> papers;
  double onset_relative = 0.0;
  int flag_count = 0;

  bool operator==(const SequenceWindow&) const = default;
};

/// First five papers of each span, labelled Hot.
std::vector<SequenceWindow> extract_hot_windows(const AuthorCareer& career, std::span<const StreakSpan> spans);

/// Five consecutive papers from a uniformly drawn start, labelled Top (1-2 flags)
/// or Ordinary (0 flags). The career must have no 3-of-5 streak.
/// With require_first_flag, a window whose first paper is unflagged yields
/// nullopt instead of a Top or Ordinary label.
std::optional<SequenceWindow> sample_nonhot_window(const AuthorCareer& career, std::uint64_t seed,
                                                   bool require_first_flag = false);

struct StreakCountStats {
  std::size_t authors = 0;
  double with_streak = 0.0;
  double multi_streak = 0.0;
  std::map<std::size_t, std::size_t> histogram;  // spans per author -> authors
};

StreakCountStats streak_count_stats(std::span<const std::vector<StreakSpan>> per_author);

/// Header "author_id,start_idx,end_idx,onset_relative,onset_month"; indices
/// are 0-based, onset_month is months since 1970-01 (empty when unknown).
void write_streak_header(std::ostream& out);
void write_streak_rows(std::ostream& out, const std::string& author_id, std::span<const StreakSpan> spans);

}  // namespace streakforge
