#include <algorithm>
#include <functional>
#include <limits>

#include "oracles.hpp"

namespace oracle {

double betweenness(std::size_t nodes, std::size_t focal, const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  if (nodes < 3) return 0.0;
  std::vector<std::vector<bool>> adj(nodes, std::vector<bool>(nodes, false));
  for (const auto& [u, v] : edges) {
    if (u == v) continue;
    adj[u][v] = adj[v][u] = true;
  }
  // all-pairs hop distances by Floyd-Warshall
  const std::size_t inf = std::numeric_limits<std::size_t>::max() / 4;
  std::vector<std::vector<std::size_t>> d(nodes, std::vector<std::size_t>(nodes, inf));
  for (std::size_t i = 0; i < nodes; ++i) {
    d[i][i] = 0;
    for (std::size_t j = 0; j < nodes; ++j) {
      if (adj[i][j]) d[i][j] = 1;
    }
  }
  for (std::size_t k = 0; k < nodes; ++k) {
    for (std::size_t i = 0; i < nodes; ++i) {
      for (std::size_t j = 0; j < nodes; ++j) d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
    }
  }
  double total = 0.0;
  for (std::size_t s = 0; s < nodes; ++s) {
    for (std::size_t t = s + 1; t < nodes; ++t) {
      if (s == focal || t == focal || d[s][t] >= inf) continue;
      // enumerate every simple walk of length d[s][t] from s to t
      std::size_t paths = 0;
      std::size_t through = 0;
      std::vector<std::size_t> path{s};
      std::function<void(std::size_t)> walk = [&](std::size_t u) {
        if (path.size() - 1 == d[s][t]) {
          if (u == t) {
            ++paths;
            if (std::find(path.begin(), path.end(), focal) != path.end()) ++through;
          }
          return;
        }
        for (std::size_t v = 0; v < nodes; ++v) {
          if (!adj[u][v]) continue;
          path.push_back(v);
          walk(v);
          path.pop_back();
        }
      };
      walk(s);
      total += static_cast<double>(through) / static_cast<double>(paths);
    }
  }
  const double pairs = static_cast<double>((nodes - 1) * (nodes - 2)) / 2.0;
  return total / pairs;
}

std::optional<double> disruption(const std::vector<std::vector<bool>>& cites) {
  const std::size_t n = cites.size();
  std::size_t ni = 0;
  std::size_t nj = 0;
  std::size_t nk = 0;
  for (std::size_t u = 1; u < n; ++u) {
    const bool focal = cites[u][0];
    bool ref = false;
    for (std::size_t r = 1; r < n; ++r) {
      if (r != u && cites[0][r] && cites[u][r]) ref = true;
    }
    if (focal && !ref) ++ni;
    if (focal && ref) ++nj;
    if (!focal && ref) ++nk;
  }
  const std::size_t all = ni + nj + nk;
  if (all == 0) return std::nullopt;
  return (static_cast<double>(ni) - static_cast<double>(nj)) / static_cast<double>(all);
}

double modularity(const Matrix& w, const std::vector<std::size_t>& membership, double gamma) {
  const std::size_t n = w.size();
  double m2 = 0.0;
  std::vector<double> k(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) k[i] += w[i][j];
    m2 += k[i];
  }
  if (m2 == 0.0) return 0.0;
  double q = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (membership[i] == membership[j]) q += w[i][j] - gamma * k[i] * k[j] / m2;
    }
  }
  return q / m2;
}

double cpm(const Matrix& w, const std::vector<std::size_t>& membership, double gamma) {
  const std::size_t n = w.size();
  double q = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (membership[i] == membership[j]) q += w[i][j] - gamma;
    }
  }
  return q;
}

double best_partition_quality(const Matrix& w, Quality q, double gamma) {
  const std::size_t n = w.size();
  if (n == 0) return 0.0;
  std::vector<std::size_t> rgs(n, 0);
  double best = -std::numeric_limits<double>::infinity();
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t i, std::size_t used) {
    if (i == n) {
      best = std::max(best, q == Quality::Modularity ? modularity(w, rgs, gamma) : cpm(w, rgs, gamma));
      return;
    }
    for (std::size_t c = 0; c <= used; ++c) {
      rgs[i] = c;
      rec(i + 1, c == used ? used + 1 : used);
    }
  };
  rgs[0] = 0;
  rec(1, 1);
  return best;
}

}  // namespace oracle
