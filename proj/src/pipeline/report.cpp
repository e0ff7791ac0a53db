#include "streakforge/pipeline/report.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <json.hpp>

#include "streakforge/collab.hpp"
#include "streakforge/detect.hpp"
#include "streakforge/error.hpp"
#include "streakforge/graphcluster.hpp"
#include "streakforge/hotstreak.hpp"
#include "streakforge/impact.hpp"
#include "streakforge/random.hpp"

namespace streakforge {

using nlohmann::json;

std::size_t dossier_window(std::size_t n_total) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(0.05 * static_cast<double>(n_total))));
}

std::uint64_t topic_seed(const PipelineConfig& config, const std::string& author_id) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const unsigned char c : author_id) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return derive_seed(config.seed, "topics", h);
}

namespace {

json rounded(const std::vector<double>& v) {
  json out = json::array();
  for (const double x : v) out.push_back(std::round(x * 1e6) / 1e6);
  return out;
}

}  // namespace

std::string author_dossier(const CorpusStore& store, const std::string& author_id, const PipelineConfig& config) {
  const AuthorCareer* career = store.find_career(author_id);
  if (career == nullptr) throw DataError("report: unknown author " + author_id);
  const std::size_t n = career->n_total();

  std::vector<AuthorList> lists;
  lists.reserve(n);
  for (const auto& id : career->papers) lists.push_back(store.paper(id).author_ids);
  const std::vector<int> topics = author_topics(*career, store, topic_seed(config, author_id));

  json papers = json::array();
  std::vector<double> team(n);
  std::vector<double> freq(n);
  std::vector<double> diversity(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = store.paper(career->papers[i]);
    team[i] = static_cast<double>(p.author_ids.size());
    // forward window of up to five papers starting here
    const std::size_t end = std::min(n, i + kWindowLength);
    const std::span<const AuthorList> w(lists.data() + i, end - i);
    freq[i] = max_coauthor_freq(w, author_id);
    diversity[i] = topic_diversity(std::span<const int>(topics.data() + i, end - i));
    papers.push_back({{"paper_id", p.paper_id},
                      {"pub_month", p.pub_month},
                      {"c10", p.c10 ? json(*p.c10) : json(nullptr)},
                      {"impact", std::round(career->impacts[i] * 1e6) / 1e6},
                      {"top_flag", static_cast<bool>(career->top_flags[i])},
                      {"team_size", p.author_ids.size()},
                      {"topic", topics[i]}});
  }

  json spans = json::array();
  if (!career->top_flags.empty()) {
    std::vector<bool> flags = career->top_flags;
    if (config.primary.k_percent != config.k_percent) {
      std::vector<std::uint32_t> raw;
      for (const auto& id : career->papers) raw.push_back(store.paper(id).c10.value_or(0));
      flags = top_k_flags(career->impacts, config.primary.k_percent, raw);
    }
    for (const auto& s : detect_streaks(flags, config.primary, career->pub_months)) {
      spans.push_back({{"start_idx", s.start_idx},
                       {"end_idx", s.end_idx},
                       {"onset_relative", std::round(s.onset_relative * 1e6) / 1e6},
                       {"onset_month", s.onset_month.value_or(0)}});
    }
  }

  const std::size_t window = dossier_window(n);
  json doc = {{"author_id", author_id},
              {"n_total", n},
              {"detection", config.primary.label()},
              {"smoothing_window", window},
              {"papers", papers},
              {"spans", spans},
              {"tracks",
               {{"team_size", rounded(centered_mean(team, window))},
                {"max_coauthor_freq", rounded(centered_mean(freq, window))},
                {"topic_diversity", rounded(centered_mean(diversity, window))}}}};
  return doc.dump(2) + "\n";
}

}  // namespace streakforge
