#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "streakforge/corpus.hpp"

namespace streakforge {

struct Neighbor {
  std::size_t node;
  double weight;
};

/// Undirected graph with positive edge weights, stored as CSR adjacency.
/// Immutable once built; every edge appears in both endpoints' lists.
class WeightedGraph {
 public:
  class Builder {
   public:
    std::size_t add_node(std::string_view token);
    /// Adds weight to the (u, v) edge; repeated calls accumulate.
    /// Throws PreconditionError on self-loops and non-positive weights.
    void add_edge(std::size_t u, std::size_t v, double weight);
    void add_edge(std::string_view u, std::string_view v, double weight);
    std::size_t node_count() const noexcept { return tokens_.size(); }
    WeightedGraph build() &&;

   private:
    struct Edge {
      std::size_t u;
      std::size_t v;
      double w;
    };
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, std::size_t> index_;
    std::vector<Edge> edges_;
  };

  WeightedGraph() = default;

  std::size_t node_count() const noexcept { return tokens_.size(); }
  std::size_t edge_count() const noexcept { return edge_count_; }
  const std::string& token(std::size_t node) const { return tokens_.at(node); }
  std::optional<std::size_t> index_of(std::string_view token) const;
  std::span<const Neighbor> neighbors(std::size_t node) const {
    return {adjacency_.data() + offsets_[node], adjacency_.data() + offsets_[node + 1]};
  }
  double degree(std::size_t node) const { return degree_[node]; }
  double total_weight() const noexcept { return total_weight_; }
  double edge_weight(std::size_t u, std::size_t v) const;

  /// Edge list CSV: header "u,v,weight", one edge per line (u < v by index).
  void write_edge_csv(std::ostream& out) const;
  static WeightedGraph read_edge_csv(std::istream& in);

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::size_t> offsets_{0};
  std::vector<Neighbor> adjacency_;
  std::vector<double> degree_;
  double total_weight_ = 0.0;
  std::size_t edge_count_ = 0;
};

enum class QualityKind { Modularity, CPM };

struct Partition {
  std::vector<std::size_t> membership;  // node -> community, ids 0..C-1 by first appearance
  std::vector<std::size_t> sizes;
  double quality = 0.0;
  QualityKind kind = QualityKind::Modularity;
  double gamma = 1.0;
  /// Quality of the singleton start followed by the quality after each
  /// local-move + aggregation pass.
  std::vector<double> pass_qualities;

  std::size_t community_count() const noexcept { return sizes.size(); }
};

/// Modularity: sum_c [ w_c/m - gamma (K_c / 2m)^2 ] (0 on an edgeless graph).
/// CPM: sum_c [ w_c - gamma n_c (n_c - 1) / 2 ].
/// w_c is the total weight of edges inside c, K_c its total degree, n_c its size.
double partition_quality(const WeightedGraph& graph, std::span<const std::size_t> membership, QualityKind kind,
                         double gamma);

/// Louvain-style optimization: seeded random-order single-node moves until no
/// move improves quality, then aggregation, repeated until a pass moves nothing.
/// The result is then refined by node moves on the original graph, and the
/// whole cycle restarts from it until that refinement moves nothing either.
Partition louvain(const WeightedGraph& graph, QualityKind kind, double gamma, std::uint64_t seed);

/// Relabels communities 0..C-1 in order of first appearance.
std::vector<std::size_t> canonical_labels(std::span<const std::size_t> membership);

/// Repeatedly merges the smallest cluster below min_size into the cluster it
/// shares the most edge weight with; a cluster with no outside edges joins the
/// largest other cluster. Stops when all clusters reach min_size or one remains.
std::vector<std::size_t> merge_small_clusters(const WeightedGraph& graph, std::span<const std::size_t> membership,
                                              std::size_t min_size);

/// CPM clustering followed by small-cluster merging; returns node token -> field id.
std::map<std::string, int> assign_fields(const WeightedGraph& citation_graph, double gamma, std::size_t min_size,
                                         std::uint64_t seed);

/// Undirected citation graph over corpus papers, from reference lists and
/// citation events whose endpoints are both in the store (unit weight per pair).
WeightedGraph citation_graph(const CorpusStore& store);

/// Paper graph of one author: nodes are the papers (tokens given), edge weight
/// is the number of shared references.
WeightedGraph shared_reference_graph(std::span<const std::string> papers,
                                     std::span<const std::vector<std::string>> references);

/// Topic id per paper position: modularity Louvain (gamma = 1) over the
/// shared-reference graph. Papers without shared references get singleton topics.
std::vector<int> author_topics(std::span<const std::string> papers,
                               std::span<const std::vector<std::string>> references, std::uint64_t seed = 0);
std::vector<int> author_topics(const AuthorCareer& career, const CorpusStore& store, std::uint64_t seed = 0);

/// Partition CSV: header "node,community".
void write_partition_csv(std::ostream& out, const WeightedGraph& graph, std::span<const std::size_t> membership);

}  // namespace streakforge
