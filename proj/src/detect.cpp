#include "streakforge/detect.hpp"

#include <memory>
#include <ostream>

#include <fmt/format.h>

#include "streakforge/error.hpp"
#include "streakforge/random.hpp"

namespace streakforge {

void DetectionParams::validate() const {
  if (n < 1 || x < 1 || x > n) throw PreconditionError(fmt::format("detection params need 1 <= X <= N, got X={} N={}", x, n));
  if (!(k_percent > 0.0 && k_percent <= 100.0))
    throw PreconditionError(fmt::format("detection k must lie in (0, 100], got {}", k_percent));
}

std::string DetectionParams::label() const { return fmt::format("{}of{}_k{}", x, n, k_percent); }

double relative_timing(std::size_t start_idx, std::size_t n_total, std::size_t n) {
  if (n_total <= n) return 0.0;
  return static_cast<double>(start_idx) / static_cast<double>(n_total - n);
}

std::vector<StreakSpan> detect_streaks(std::span<const bool> flags, const DetectionParams& params,
                                       std::span<const Month> months) {
  params.validate();
  if (!months.empty() && months.size() != flags.size())
    throw PreconditionError("detect_streaks: months must parallel flags");
  const std::size_t n_total = flags.size();
  const auto n = static_cast<std::size_t>(params.n);
  std::vector<StreakSpan> spans;
  if (n_total < n) return spans;

  // sliding count over [i, i+n)
  int count = 0;
  for (std::size_t i = 0; i < n; ++i) count += flags[i] ? 1 : 0;
  for (std::size_t i = 0; i + n <= n_total; ++i) {
    if (i > 0) count += (flags[i + n - 1] ? 1 : 0) - (flags[i - 1] ? 1 : 0);
    if (count < params.x) continue;
    const std::size_t end = i + n - 1;
    if (!spans.empty() && spans.back().end_idx >= i) {
      spans.back().end_idx = end;
    } else {
      spans.push_back({i, end, relative_timing(i, n_total, n), std::nullopt});
    }
  }
  if (!months.empty()) {
    for (auto& s : spans) s.onset_month = months[s.start_idx];
  }
  return spans;
}

std::vector<StreakSpan> detect_streaks(const std::vector<bool>& flags, const DetectionParams& params,
                                       std::span<const Month> months) {
  const std::unique_ptr<bool[]> buf(new bool[flags.size()]);
  for (std::size_t i = 0; i < flags.size(); ++i) buf[i] = flags[i];
  return detect_streaks(std::span<const bool>(buf.get(), flags.size()), params, months);
}

const char* to_string(SequenceLabel label) {
  switch (label) {
    case SequenceLabel::Hot:
      return "Hot";
    case SequenceLabel::Top:
      return "Top";
    case SequenceLabel::Ordinary:
      return "Ordinary";
  }
  return "?";
}

namespace {

SequenceWindow make_window(const AuthorCareer& career, std::size_t start) {
  SequenceWindow w;
  w.author_id = career.author_id;
  w.start_idx = start;
  w.papers.assign(career.papers.begin() + static_cast<std::ptrdiff_t>(start),
                  career.papers.begin() + static_cast<std::ptrdiff_t>(start + kWindowLength));
  w.onset_relative = relative_timing(start, career.n_total(), kWindowLength);
  for (std::size_t i = start; i < start + kWindowLength; ++i) w.flag_count += career.top_flags[i] ? 1 : 0;
  return w;
}

}  // namespace

std::vector<SequenceWindow> extract_hot_windows(const AuthorCareer& career, std::span<const StreakSpan> spans) {
  if (career.top_flags.size() != career.n_total()) throw PreconditionError("extract_hot_windows: career has no flags");
  std::vector<SequenceWindow> out;
  out.reserve(spans.size());
  for (const auto& s : spans) {
    if (s.length() < kWindowLength || s.start_idx + kWindowLength > career.n_total())
      throw PreconditionError(fmt::format("extract_hot_windows: span {}..{} is shorter than {} papers", s.start_idx,
                                          s.end_idx, kWindowLength));
    SequenceWindow w = make_window(career, s.start_idx);
    w.label = SequenceLabel::Hot;
    out.push_back(std::move(w));
  }
  return out;
}

std::optional<SequenceWindow> sample_nonhot_window(const AuthorCareer& career, std::uint64_t seed,
                                                   bool require_first_flag) {
  if (career.n_total() < kWindowLength)
    throw PreconditionError(fmt::format("sample_nonhot_window: career {} has {} papers, need {}", career.author_id,
                                        career.n_total(), kWindowLength));
  if (career.top_flags.size() != career.n_total()) throw PreconditionError("sample_nonhot_window: career has no flags");
  Rng rng(seed);
  const std::size_t start = rng.uniform_index(career.n_total() - kWindowLength + 1);
  SequenceWindow w = make_window(career, start);
  if (w.flag_count >= 3)
    throw PreconditionError(fmt::format("sample_nonhot_window: career {} has a 3-of-5 streak at {}", career.author_id,
                                        start));
  if (require_first_flag && !career.top_flags[start]) return std::nullopt;
  w.label = w.flag_count > 0 ? SequenceLabel::Top : SequenceLabel::Ordinary;
  return w;
}

StreakCountStats streak_count_stats(std::span<const std::vector<StreakSpan>> per_author) {
  StreakCountStats s;
  s.authors = per_author.size();
  std::size_t with = 0;
  std::size_t multi = 0;
  for (const auto& spans : per_author) {
    ++s.histogram[spans.size()];
    with += spans.empty() ? 0 : 1;
    multi += spans.size() > 1 ? 1 : 0;
  }
  if (s.authors > 0) {
    s.with_streak = static_cast<double>(with) / static_cast<double>(s.authors);
    s.multi_streak = static_cast<double>(multi) / static_cast<double>(s.authors);
  }
  return s;
}

void write_streak_header(std::ostream& out) { out << "author_id,start_idx,end_idx,onset_relative,onset_month\n"; }

void write_streak_rows(std::ostream& out, const std::string& author_id, std::span<const StreakSpan> spans) {
  for (const auto& s : spans) {
    out << fmt::format("{},{},{},{:.6f},{}\n", author_id, s.start_idx, s.end_idx, s.onset_relative,
                       s.onset_month ? fmt::format("{}", *s.onset_month) : std::string());
  }
}

}  // namespace streakforge
