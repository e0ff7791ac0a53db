#include "streakforge/graphcluster.hpp"

#include <algorithm>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "streakforge/error.hpp"
#include "streakforge/random.hpp"

namespace streakforge {

// ---------------------------------------------------------------------------
// WeightedGraph

std::size_t WeightedGraph::Builder::add_node(std::string_view token) {
  const auto [it, inserted] = index_.try_emplace(std::string(token), tokens_.size());
  if (inserted) tokens_.emplace_back(token);
  return it->second;
}

void WeightedGraph::Builder::add_edge(std::size_t u, std::size_t v, double weight) {
  if (u >= tokens_.size() || v >= tokens_.size()) throw PreconditionError("add_edge: unknown node index");
  if (u == v) throw PreconditionError("add_edge: self-loop on " + tokens_[u]);
  if (!(weight > 0.0)) throw PreconditionError("add_edge: weight must be positive");
  if (u > v) std::swap(u, v);
  edges_.push_back({u, v, weight});
}

void WeightedGraph::Builder::add_edge(std::string_view u, std::string_view v, double weight) {
  const std::size_t a = add_node(u);
  const std::size_t b = add_node(v);
  add_edge(a, b, weight);
}

WeightedGraph WeightedGraph::Builder::build() && {
  std::sort(edges_.begin(), edges_.end(), [](const Edge& a, const Edge& b) {
    return a.u != b.u ? a.u < b.u : a.v < b.v;
  });
  std::vector<Edge> merged;
  merged.reserve(edges_.size());
  for (const auto& e : edges_) {
    if (!merged.empty() && merged.back().u == e.u && merged.back().v == e.v) {
      merged.back().w += e.w;
    } else {
      merged.push_back(e);
    }
  }
  edges_.clear();
  edges_.shrink_to_fit();

  WeightedGraph g;
  const std::size_t n = tokens_.size();
  g.tokens_ = std::move(tokens_);
  g.index_ = std::move(index_);
  g.degree_.assign(n, 0.0);
  std::vector<std::size_t> counts(n, 0);
  for (const auto& e : merged) {
    ++counts[e.u];
    ++counts[e.v];
  }
  g.offsets_.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) g.offsets_[i + 1] = g.offsets_[i] + counts[i];
  g.adjacency_.resize(g.offsets_[n]);
  std::vector<std::size_t> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
  for (const auto& e : merged) {
    g.adjacency_[cursor[e.u]++] = {e.v, e.w};
    g.adjacency_[cursor[e.v]++] = {e.u, e.w};
    g.degree_[e.u] += e.w;
    g.degree_[e.v] += e.w;
    g.total_weight_ += e.w;
  }
  g.edge_count_ = merged.size();
  return g;
}

std::optional<std::size_t> WeightedGraph::index_of(std::string_view token) const {
  const auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

double WeightedGraph::edge_weight(std::size_t u, std::size_t v) const {
  for (const auto& nb : neighbors(u)) {
    if (nb.node == v) return nb.weight;
  }
  return 0.0;
}

void WeightedGraph::write_edge_csv(std::ostream& out) const {
  out << "u,v,weight\n";
  for (std::size_t u = 0; u < node_count(); ++u) {
    for (const auto& nb : neighbors(u)) {
      if (u < nb.node) out << fmt::format("{},{},{}\n", tokens_[u], tokens_[nb.node], nb.weight);
    }
  }
}

WeightedGraph WeightedGraph::read_edge_csv(std::istream& in) {
  Builder b;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || (line_no == 1 && line == "u,v,weight")) continue;
    std::stringstream ss(line);
    std::string u;
    std::string v;
    std::string w;
    if (!std::getline(ss, u, ',') || !std::getline(ss, v, ',') || !std::getline(ss, w))
      throw IngestError("edges", line_no, "expected u,v,weight");
    try {
      b.add_edge(u, v, std::stod(w));
    } catch (const std::exception& e) {
      throw IngestError("edges", line_no, e.what());
    }
  }
  return std::move(b).build();
}

// ---------------------------------------------------------------------------
// Quality

double partition_quality(const WeightedGraph& graph, std::span<const std::size_t> membership, QualityKind kind,
                         double gamma) {
  if (membership.size() != graph.node_count()) throw PreconditionError("partition_quality: membership size mismatch");
  const std::size_t n_comm = membership.empty() ? 0 : *std::max_element(membership.begin(), membership.end()) + 1;
  std::vector<double> internal(n_comm, 0.0);
  std::vector<double> degree(n_comm, 0.0);
  std::vector<double> size(n_comm, 0.0);
  for (std::size_t u = 0; u < graph.node_count(); ++u) {
    const std::size_t c = membership[u];
    degree[c] += graph.degree(u);
    size[c] += 1.0;
    for (const auto& nb : graph.neighbors(u)) {
      if (u < nb.node && membership[nb.node] == c) internal[c] += nb.weight;
    }
  }
  double q = 0.0;
  if (kind == QualityKind::Modularity) {
    const double m = graph.total_weight();
    if (m == 0.0) return 0.0;
    for (std::size_t c = 0; c < n_comm; ++c) {
      const double frac = degree[c] / (2.0 * m);
      q += internal[c] / m - gamma * frac * frac;
    }
  } else {
    for (std::size_t c = 0; c < n_comm; ++c) q += internal[c] - gamma * size[c] * (size[c] - 1.0) / 2.0;
  }
  return q;
}

std::vector<std::size_t> canonical_labels(std::span<const std::size_t> membership) {
  std::unordered_map<std::size_t, std::size_t> remap;
  std::vector<std::size_t> out(membership.size());
  for (std::size_t i = 0; i < membership.size(); ++i) {
    const auto [it, inserted] = remap.try_emplace(membership[i], remap.size());
    out[i] = it->second;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Louvain

namespace {

// Graph at one aggregation level. Self weight holds the edge weight already
// internal to a node; neither it nor the node weight depends on the partition.
struct LevelGraph {
  std::vector<std::size_t> offsets;
  std::vector<Neighbor> adjacency;
  std::vector<double> node_weight;  // degree (modularity) or size (CPM)
  std::vector<double> self_weight;

  std::size_t size() const { return node_weight.size(); }
  std::span<const Neighbor> neighbors(std::size_t u) const {
    return {adjacency.data() + offsets[u], adjacency.data() + offsets[u + 1]};
  }
};

LevelGraph level_from(const WeightedGraph& g, QualityKind kind) {
  LevelGraph lg;
  const std::size_t n = g.node_count();
  lg.offsets.assign(n + 1, 0);
  for (std::size_t u = 0; u < n; ++u) lg.offsets[u + 1] = lg.offsets[u] + g.neighbors(u).size();
  lg.adjacency.reserve(lg.offsets[n]);
  for (std::size_t u = 0; u < n; ++u) {
    for (const auto& nb : g.neighbors(u)) lg.adjacency.push_back(nb);
  }
  lg.node_weight.resize(n);
  for (std::size_t u = 0; u < n; ++u) lg.node_weight[u] = kind == QualityKind::Modularity ? g.degree(u) : 1.0;
  lg.self_weight.assign(n, 0.0);
  return lg;
}

// Moves nodes between communities until a full sweep makes no move, starting
// from singletons or, with reset = false, from the labels already in comm
// (which must be < g.size()). Returns true if any node changed community.
bool local_moves(const LevelGraph& g, double resolution, std::vector<std::size_t>& comm, Rng& rng,
                 bool reset = true) {
  const std::size_t n = g.size();
  if (reset) {
    comm.resize(n);
    std::iota(comm.begin(), comm.end(), 0);
  }
  std::vector<double> total(n, 0.0);
  std::vector<std::size_t> members(n, 0);
  for (std::size_t u = 0; u < n; ++u) {
    total[comm[u]] += g.node_weight[u];
    ++members[comm[u]];
  }
  std::vector<std::size_t> empty_ids;
  for (std::size_t c = n; c-- > 0;) {
    if (members[c] == 0) empty_ids.push_back(c);
  }
  std::vector<double> link(n, 0.0);
  std::vector<char> touched(n, 0);
  std::vector<std::size_t> candidates;
  std::vector<std::size_t> order(n);
  constexpr double kMinGain = 1e-12;

  bool any_move = false;
  while (true) {
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(std::span<std::size_t>(order));
    std::size_t moves = 0;
    for (const std::size_t u : order) {
      const std::size_t own = comm[u];
      candidates.clear();
      for (const auto& nb : g.neighbors(u)) {
        const std::size_t c = comm[nb.node];
        if (!touched[c]) {
          touched[c] = 1;
          candidates.push_back(c);
        }
        link[c] += nb.weight;
      }
      const double w = g.node_weight[u];
      total[own] -= w;
      --members[own];

      auto gain = [&](std::size_t c) { return link[c] - resolution * w * total[c]; };
      std::size_t best = own;
      double best_gain = gain(own);
      for (const std::size_t c : candidates) {
        if (c == own) continue;
        const double gc = gain(c);
        if (gc > best_gain + kMinGain) {
          best = c;
          best_gain = gc;
        }
      }
      if (members[own] > 0 && 0.0 > best_gain + kMinGain) {
        while (!empty_ids.empty() && members[empty_ids.back()] != 0) empty_ids.pop_back();
        if (!empty_ids.empty()) {
          best = empty_ids.back();
          empty_ids.pop_back();
        }
      }

      total[best] += w;
      ++members[best];
      comm[u] = best;
      if (best != own) {
        ++moves;
        if (members[own] == 0) empty_ids.push_back(own);
      }
      for (const std::size_t c : candidates) {
        link[c] = 0.0;
        touched[c] = 0;
      }
    }
    if (moves == 0) break;
    any_move = true;
  }
  return any_move;
}

LevelGraph aggregate(const LevelGraph& g, std::span<const std::size_t> comm, std::size_t n_comm) {
  struct Edge {
    std::size_t u;
    std::size_t v;
    double w;
  };
  LevelGraph out;
  out.node_weight.assign(n_comm, 0.0);
  out.self_weight.assign(n_comm, 0.0);
  std::vector<Edge> edges;
  for (std::size_t u = 0; u < g.size(); ++u) {
    const std::size_t cu = comm[u];
    out.node_weight[cu] += g.node_weight[u];
    out.self_weight[cu] += g.self_weight[u];
    for (const auto& nb : g.neighbors(u)) {
      if (nb.node <= u) continue;
      const std::size_t cv = comm[nb.node];
      if (cu == cv) {
        out.self_weight[cu] += nb.weight;
      } else {
        edges.push_back({std::min(cu, cv), std::max(cu, cv), nb.weight});
      }
    }
  }
  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) { return a.u != b.u ? a.u < b.u : a.v < b.v; });
  std::vector<Edge> merged;
  for (const auto& e : edges) {
    if (!merged.empty() && merged.back().u == e.u && merged.back().v == e.v) {
      merged.back().w += e.w;
    } else {
      merged.push_back(e);
    }
  }
  std::vector<std::size_t> counts(n_comm, 0);
  for (const auto& e : merged) {
    ++counts[e.u];
    ++counts[e.v];
  }
  out.offsets.assign(n_comm + 1, 0);
  for (std::size_t i = 0; i < n_comm; ++i) out.offsets[i + 1] = out.offsets[i] + counts[i];
  out.adjacency.resize(out.offsets[n_comm]);
  std::vector<std::size_t> cursor(out.offsets.begin(), out.offsets.end() - 1);
  for (const auto& e : merged) {
    out.adjacency[cursor[e.u]++] = {e.v, e.w};
    out.adjacency[cursor[e.v]++] = {e.u, e.w};
  }
  return out;
}

Partition make_partition(const WeightedGraph& graph, std::vector<std::size_t> membership, QualityKind kind,
                         double gamma) {
  Partition p;
  p.membership = canonical_labels(membership);
  const std::size_t n_comm =
      p.membership.empty() ? 0 : *std::max_element(p.membership.begin(), p.membership.end()) + 1;
  p.sizes.assign(n_comm, 0);
  for (const std::size_t c : p.membership) ++p.sizes[c];
  p.kind = kind;
  p.gamma = gamma;
  p.quality = partition_quality(graph, p.membership, kind, gamma);
  return p;
}

}  // namespace

Partition louvain(const WeightedGraph& graph, QualityKind kind, double gamma, std::uint64_t seed) {
  if (graph.node_count() == 0) throw PreconditionError("louvain: graph is empty");
  if (!(gamma > 0.0)) throw PreconditionError("louvain: gamma must be positive");

  std::vector<std::size_t> membership(graph.node_count());
  std::iota(membership.begin(), membership.end(), 0);
  std::vector<double> pass_qualities{partition_quality(graph, membership, kind, gamma)};

  const double m = graph.total_weight();
  if (kind == QualityKind::Modularity && m == 0.0) {
    Partition p = make_partition(graph, std::move(membership), kind, gamma);
    p.pass_qualities = std::move(pass_qualities);
    return p;
  }
  // Gains are expressed in edge-weight units: modularity gain times m.
  const double resolution = kind == QualityKind::Modularity ? gamma / (2.0 * m) : gamma;

  Rng rng(seed);
  const LevelGraph base = level_from(graph, kind);
  LevelGraph level = base;
  std::vector<std::size_t> comm;
  while (true) {
    while (true) {
      if (!local_moves(level, resolution, comm, rng)) break;
      const std::vector<std::size_t> labels = canonical_labels(comm);
      const std::size_t n_comm = *std::max_element(labels.begin(), labels.end()) + 1;
      for (auto& c : membership) c = labels[c];
      pass_qualities.push_back(partition_quality(graph, membership, kind, gamma));
      if (n_comm == level.size()) break;
      level = aggregate(level, labels, n_comm);
    }
    // Aggregation freezes early mistakes; single-node moves on the original
    // graph from the final partition undo them, and a fresh round of
    // aggregation follows whenever one of those moves pays off.
    if (level.size() == base.size()) break;
    comm = membership;
    if (!local_moves(base, resolution, comm, rng, false)) break;
    membership = canonical_labels(comm);
    pass_qualities.push_back(partition_quality(graph, membership, kind, gamma));
    level = aggregate(base, membership, *std::max_element(membership.begin(), membership.end()) + 1);
  }
  Partition p = make_partition(graph, std::move(membership), kind, gamma);
  p.pass_qualities = std::move(pass_qualities);
  return p;
}

// ---------------------------------------------------------------------------
// Fields

std::vector<std::size_t> merge_small_clusters(const WeightedGraph& graph, std::span<const std::size_t> membership,
                                              std::size_t min_size) {
  if (min_size < 1) throw PreconditionError("merge_small_clusters: min_size must be >= 1");
  std::vector<std::size_t> labels = canonical_labels(membership);
  const std::size_t n_comm = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
  std::vector<std::size_t> size(n_comm, 0);
  for (const std::size_t c : labels) ++size[c];
  std::vector<std::map<std::size_t, double>> links(n_comm);
  for (std::size_t u = 0; u < graph.node_count(); ++u) {
    for (const auto& nb : graph.neighbors(u)) {
      const std::size_t a = labels[u];
      const std::size_t b = labels[nb.node];
      if (a != b) links[a][b] += nb.weight;  // each direction visited once per endpoint
    }
  }
  std::vector<std::size_t> parent(n_comm);
  std::iota(parent.begin(), parent.end(), 0);
  std::set<std::pair<std::size_t, std::size_t>> by_size;  // (size, id) of live clusters
  for (std::size_t c = 0; c < n_comm; ++c) by_size.insert({size[c], c});

  while (by_size.size() > 1) {
    const auto [small_size, small] = *by_size.begin();
    if (small_size >= min_size) break;
    std::size_t target = small;
    double best = 0.0;
    for (const auto& [other, w] : links[small]) {
      if (w > best || (w == best && target != small &&
                       (size[other] > size[target] || (size[other] == size[target] && other < target)))) {
        best = w;
        target = other;
      }
    }
    if (target == small) {
      // no outside edges: join the largest other cluster (lowest id on ties)
      auto it = std::prev(by_size.end());
      while (it->second == small) --it;
      std::size_t largest = it->first;
      target = it->second;
      for (auto jt = by_size.begin(); jt != by_size.end(); ++jt) {
        if (jt->first == largest && jt->second != small && jt->second < target) target = jt->second;
      }
    }
    by_size.erase({size[small], small});
    by_size.erase({size[target], target});
    size[target] += size[small];
    size[small] = 0;
    by_size.insert({size[target], target});
    parent[small] = target;
    for (const auto& [other, w] : links[small]) {
      links[other].erase(small);
      if (other == target) continue;
      links[other][target] += w;
      links[target][other] += w;
    }
    links[target].erase(small);
    links[small].clear();
  }
  auto root = [&](std::size_t c) {
    while (parent[c] != c) c = parent[c];
    return c;
  };
  for (auto& c : labels) c = root(c);
  return canonical_labels(labels);
}

std::map<std::string, int> assign_fields(const WeightedGraph& citation_graph, double gamma, std::size_t min_size,
                                         std::uint64_t seed) {
  std::map<std::string, int> out;
  if (citation_graph.node_count() == 0) return out;
  const Partition p = louvain(citation_graph, QualityKind::CPM, gamma, seed);
  const auto merged = merge_small_clusters(citation_graph, p.membership, min_size);
  for (std::size_t u = 0; u < citation_graph.node_count(); ++u)
    out.emplace(citation_graph.token(u), static_cast<int>(merged[u]));
  return out;
}

WeightedGraph citation_graph(const CorpusStore& store) {
  WeightedGraph::Builder b;
  for (const auto& [id, paper] : store.papers()) b.add_node(id);
  // collect unordered pairs, then add each once with unit weight
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  auto link = [&](const std::string& a, const std::string& c) {
    if (a == c || store.find_paper(c) == nullptr || store.find_paper(a) == nullptr) return;
    std::size_t u = b.add_node(a);
    std::size_t v = b.add_node(c);
    if (u > v) std::swap(u, v);
    pairs.emplace_back(u, v);
  };
  for (const auto& [id, paper] : store.papers()) {
    for (const auto& ref : paper.reference_ids) link(id, ref);
  }
  for (const auto& c : store.citations()) link(c.citing_id, c.cited_id);
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  for (const auto& [u, v] : pairs) b.add_edge(u, v, 1.0);
  return std::move(b).build();
}

// ---------------------------------------------------------------------------
// Topics

WeightedGraph shared_reference_graph(std::span<const std::string> papers,
                                     std::span<const std::vector<std::string>> references) {
  if (papers.size() != references.size()) throw PreconditionError("shared_reference_graph: size mismatch");
  WeightedGraph::Builder b;
  for (const auto& p : papers) b.add_node(p);
  std::map<std::string_view, std::vector<std::size_t>> citing;
  for (std::size_t i = 0; i < references.size(); ++i) {
    for (const auto& r : references[i]) citing[r].push_back(i);
  }
  for (const auto& [ref, idx] : citing) {
    for (std::size_t a = 0; a < idx.size(); ++a) {
      for (std::size_t c = a + 1; c < idx.size(); ++c) {
        if (idx[a] != idx[c]) b.add_edge(idx[a], idx[c], 1.0);
      }
    }
  }
  return std::move(b).build();
}

std::vector<int> author_topics(std::span<const std::string> papers,
                               std::span<const std::vector<std::string>> references, std::uint64_t seed) {
  if (papers.empty()) throw PreconditionError("author_topics: career has no papers");
  const WeightedGraph g = shared_reference_graph(papers, references);
  const Partition p = louvain(g, QualityKind::Modularity, 1.0, seed);
  std::vector<int> topics(papers.size());
  for (std::size_t i = 0; i < papers.size(); ++i) topics[i] = static_cast<int>(p.membership[i]);
  return topics;
}

std::vector<int> author_topics(const AuthorCareer& career, const CorpusStore& store, std::uint64_t seed) {
  std::vector<std::vector<std::string>> refs;
  refs.reserve(career.n_total());
  for (const auto& id : career.papers) refs.push_back(store.paper(id).reference_ids);
  return author_topics(career.papers, refs, seed);
}

void write_partition_csv(std::ostream& out, const WeightedGraph& graph, std::span<const std::size_t> membership) {
  out << "node,community\n";
  for (std::size_t u = 0; u < graph.node_count(); ++u) out << graph.token(u) << ',' << membership[u] << '\n';
}

}  // namespace streakforge
