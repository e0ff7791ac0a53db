#include "streakforge/collab.hpp"

#include <algorithm>
#include <deque>
#include <numeric>
#include <unordered_map>

#include <fmt/format.h>

#include "streakforge/error.hpp"

namespace streakforge {

double mean_team_size(std::span<const AuthorList> author_lists) {
  if (author_lists.empty()) throw PreconditionError("mean_team_size: no author lists");
  double total = 0.0;
  for (const auto& l : author_lists) {
    if (l.empty()) throw DataError("mean_team_size: empty author list");
    total += static_cast<double>(l.size());
  }
  return total / static_cast<double>(author_lists.size());
}

bool has_big_project(std::span<const AuthorList> author_lists, std::size_t threshold) {
  return std::any_of(author_lists.begin(), author_lists.end(),
                     [&](const AuthorList& l) { return l.size() >= threshold; });
}

int max_coauthor_freq(std::span<const AuthorList> author_lists, const std::string& focal) {
  std::map<std::string_view, int> freq;
  for (std::size_t i = 0; i < author_lists.size(); ++i) {
    const auto& l = author_lists[i];
    if (std::find(l.begin(), l.end(), focal) == l.end())
      throw DataError(fmt::format("max_coauthor_freq: author {} missing from paper {} of the window", focal, i));
    for (const auto& a : l) {
      if (a != focal) ++freq[a];
    }
  }
  int best = 0;
  for (const auto& [a, f] : freq) best = std::max(best, f);
  return best;
}

bool is_dense_ties(std::span<const AuthorList> author_lists, const std::string& focal) {
  return max_coauthor_freq(author_lists, focal) >= 3;
}

CoauthorshipLocalNet CoauthorshipLocalNet::build(std::span<const AuthorList> author_lists, const std::string& focal) {
  CoauthorshipLocalNet net;
  std::map<std::string, std::size_t> index;
  auto node = [&](const std::string& a) {
    const auto [it, inserted] = index.try_emplace(a, net.tokens_.size());
    if (inserted) net.tokens_.push_back(a);
    return it->second;
  };
  node(focal);
  for (const auto& l : author_lists) {
    std::vector<std::size_t> ids;
    for (const auto& a : l) ids.push_back(node(a));
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    for (std::size_t x = 0; x < ids.size(); ++x) {
      for (std::size_t y = x + 1; y < ids.size(); ++y) ++net.weights_[{ids[x], ids[y]}];
    }
  }
  net.adjacency_.resize(net.tokens_.size());
  for (const auto& [e, w] : net.weights_) {
    net.adjacency_[e.first].push_back(e.second);
    net.adjacency_[e.second].push_back(e.first);
  }
  net.focal_ = 0;
  return net;
}

CoauthorshipLocalNet CoauthorshipLocalNet::from_edges(std::size_t nodes, std::size_t focal,
                                                      std::span<const std::pair<std::size_t, std::size_t>> edges) {
  if (focal >= nodes) throw PreconditionError("CoauthorshipLocalNet: focal outside the node range");
  CoauthorshipLocalNet net;
  for (std::size_t i = 0; i < nodes; ++i) net.tokens_.push_back(std::to_string(i));
  net.adjacency_.resize(nodes);
  for (auto [u, v] : edges) {
    if (u == v || u >= nodes || v >= nodes) throw PreconditionError("CoauthorshipLocalNet: bad edge");
    if (u > v) std::swap(u, v);
    if (net.weights_[{u, v}]++ == 0) {
      net.adjacency_[u].push_back(v);
      net.adjacency_[v].push_back(u);
    }
  }
  net.focal_ = focal;
  return net;
}

int CoauthorshipLocalNet::weight(std::size_t u, std::size_t v) const {
  if (u > v) std::swap(u, v);
  const auto it = weights_.find({u, v});
  return it == weights_.end() ? 0 : it->second;
}

double focal_betweenness(const CoauthorshipLocalNet& net) {
  const std::size_t n = net.node_count();
  if (n < 3) return 0.0;
  const std::size_t f = net.focal();
  double acc = 0.0;
  std::vector<double> sigma(n);
  std::vector<int> dist(n);
  std::vector<double> delta(n);
  std::vector<std::size_t> order;
  for (std::size_t s = 0; s < n; ++s) {
    if (s == f) continue;
    std::fill(sigma.begin(), sigma.end(), 0.0);
    std::fill(dist.begin(), dist.end(), -1);
    std::fill(delta.begin(), delta.end(), 0.0);
    order.clear();
    sigma[s] = 1.0;
    dist[s] = 0;
    std::deque<std::size_t> queue{s};
    while (!queue.empty()) {
      const std::size_t v = queue.front();
      queue.pop_front();
      order.push_back(v);
      for (const std::size_t w : net.neighbors(v)) {
        if (dist[w] < 0) {
          dist[w] = dist[v] + 1;
          queue.push_back(w);
        }
        if (dist[w] == dist[v] + 1) sigma[w] += sigma[v];
      }
    }
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const std::size_t w = *it;
      for (const std::size_t v : net.neighbors(w)) {
        if (dist[v] == dist[w] - 1) delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
      }
    }
    acc += delta[f];
  }
  // every unordered pair was visited from both ends
  const double pairs = static_cast<double>(n - 1) * static_cast<double>(n - 2) / 2.0;
  return acc / 2.0 / pairs;
}

int topic_diversity(std::span<const int> topics) {
  std::set<int> distinct(topics.begin(), topics.end());
  return static_cast<int>(distinct.size());
}

int dominant_topic(std::span<const int> topics) {
  if (topics.empty()) throw PreconditionError("dominant_topic: no topics");
  std::map<int, int> count;
  for (const int t : topics) ++count[t];
  int best = topics.front();
  for (const int t : topics) {
    if (count[t] > count[best]) best = t;
  }
  return best;
}

bool is_new_topic(std::span<const int> topics, const std::set<int>& prior_topics) {
  return !prior_topics.contains(dominant_topic(topics));
}

std::string StreakTypeLabel::name() const {
  return fmt::format("{}_{}", tie == TieKind::Dense ? "dense" : "loose", team == TeamKind::Large ? "large" : "small");
}

StreakTypeLabel classify_streak_type(std::span<const AuthorList> author_lists, const std::string& focal,
                                     std::size_t big_threshold) {
  return {is_dense_ties(author_lists, focal) ? TieKind::Dense : TieKind::Loose,
          has_big_project(author_lists, big_threshold) ? TeamKind::Large : TeamKind::Small};
}

DisruptionCounts disruption_counts(const std::string& focal, const std::set<std::string>& focal_refs,
                                   const std::map<std::string, std::set<std::string>>& citing) {
  DisruptionCounts c;
  for (const auto& [citer, cited] : citing) {
    if (citer == focal) continue;
    const bool cites_focal = cited.contains(focal);
    const bool cites_ref = std::any_of(cited.begin(), cited.end(), [&](const std::string& p) {
      return p != focal && focal_refs.contains(p);
    });
    if (cites_focal && !cites_ref) ++c.n_i;
    if (cites_focal && cites_ref) ++c.n_j;
    if (!cites_focal && cites_ref) ++c.n_k;
  }
  return c;
}

std::optional<double> disruption_index(const DisruptionCounts& c) {
  const std::size_t denom = c.n_i + c.n_j + c.n_k;
  if (denom == 0) return std::nullopt;
  return (static_cast<double>(c.n_i) - static_cast<double>(c.n_j)) / static_cast<double>(denom);
}

std::optional<double> disruption_index(const std::string& focal, const std::set<std::string>& focal_refs,
                                       const std::map<std::string, std::set<std::string>>& citing) {
  return disruption_index(disruption_counts(focal, focal_refs, citing));
}

std::vector<double> rank_within_groups(std::span<const double> values, std::span<const RankGroupKey> keys) {
  if (values.size() != keys.size()) throw PreconditionError("rank_within_groups: values and keys differ in length");
  std::map<RankGroupKey, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < values.size(); ++i) groups[keys[i]].push_back(i);
  std::vector<double> ranks(values.size(), 0.5);
  for (const auto& [key, idx] : groups) {
    if (idx.size() < 2) continue;
    std::vector<double> sorted;
    sorted.reserve(idx.size());
    for (const auto i : idx) sorted.push_back(values[i]);
    std::sort(sorted.begin(), sorted.end());
    for (const auto i : idx) {
      const auto lo = std::lower_bound(sorted.begin(), sorted.end(), values[i]);
      const auto hi = std::upper_bound(sorted.begin(), sorted.end(), values[i]);
      const double smaller = static_cast<double>(lo - sorted.begin());
      const double ties = static_cast<double>(hi - lo) - 1.0;
      ranks[i] = std::clamp((smaller + 0.5 * ties) / static_cast<double>(idx.size() - 1), 0.0, 1.0);
    }
  }
  return ranks;
}

std::vector<int> quintiles(std::span<const double> values) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<int> out(values.size());
  const double n = static_cast<double>(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double r = static_cast<double>(std::lower_bound(sorted.begin(), sorted.end(), values[i]) - sorted.begin());
    out[i] = std::min(4, static_cast<int>(5.0 * r / n));
  }
  return out;
}

WindowMetrics window_metrics(std::span<const AuthorList> author_lists, const std::string& focal,
                             std::span<const int> topics, const std::set<int>& prior_topics,
                             std::size_t big_threshold) {
  WindowMetrics m;
  m.mean_team_size = mean_team_size(author_lists);
  m.big_project = has_big_project(author_lists, big_threshold);
  m.all_small_teams = std::all_of(author_lists.begin(), author_lists.end(),
                                  [&](const AuthorList& l) { return l.size() < big_threshold; });
  m.max_freq = max_coauthor_freq(author_lists, focal);
  m.dense = m.max_freq >= 3;
  m.betweenness = focal_betweenness(CoauthorshipLocalNet::build(author_lists, focal));
  m.diversity = topic_diversity(topics);
  m.new_topic = is_new_topic(topics, prior_topics);
  m.type = {m.dense ? TieKind::Dense : TieKind::Loose, m.big_project ? TeamKind::Large : TeamKind::Small};
  return m;
}

}  // namespace streakforge
