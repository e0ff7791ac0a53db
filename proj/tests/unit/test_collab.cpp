#include <doctest.h>

#include <algorithm>

#include "oracles.hpp"
#include "streakforge/collab.hpp"
#include "streakforge/error.hpp"
#include "streakforge/random.hpp"

using namespace streakforge;

namespace {

std::vector<AuthorList> lists_of_sizes(const std::vector<std::size_t>& sizes) {
  std::vector<AuthorList> out;
  int next = 0;
  for (const auto s : sizes) {
    AuthorList l{"F"};
    for (std::size_t i = 1; i < s; ++i) l.push_back("x" + std::to_string(next++));
    out.push_back(std::move(l));
  }
  return out;
}

}  // namespace

TEST_CASE("team size and big projects") {
  CHECK(mean_team_size(lists_of_sizes({3, 3, 3, 3, 3})) == 3.0);
  CHECK(mean_team_size(lists_of_sizes({1, 2, 3, 4, 5})) == 3.0);
  CHECK(mean_team_size(lists_of_sizes({2, 9, 9, 9, 9})) == doctest::Approx(7.6));
  CHECK(has_big_project(lists_of_sizes({2, 3, 10, 2, 2})));
  CHECK_FALSE(has_big_project(lists_of_sizes({9, 9, 9, 9, 9})));
  CHECK(has_big_project(lists_of_sizes({1, 1, 1, 1, 100})));
}

TEST_CASE("max co-author frequency and dense ties") {
  const std::vector<AuthorList> all_b{{"F", "B"}, {"F", "B"}, {"B", "F"}, {"F", "B"}, {"F", "B"}};
  CHECK(max_coauthor_freq(all_b, "F") == 5);
  CHECK(max_coauthor_freq(lists_of_sizes({2, 3, 2, 4, 2}), "F") == 1);
  const std::vector<AuthorList> mixed{{"F", "B"}, {"F", "B", "C"}, {"F", "C"}, {"F", "B"}, {"F"}};
  CHECK(max_coauthor_freq(mixed, "F") == 3);
  CHECK(is_dense_ties(mixed, "F"));
  const std::vector<AuthorList> two{{"F", "B"}, {"F", "B"}, {"F"}, {"F"}, {"F"}};
  CHECK_FALSE(is_dense_ties(two, "F"));
  const std::vector<AuthorList> solo(5, AuthorList{"F"});
  CHECK(max_coauthor_freq(solo, "F") == 0);
  CHECK_FALSE(is_dense_ties(solo, "F"));
  const std::vector<AuthorList> missing{{"F"}, {"B"}, {"F"}, {"F"}, {"F"}};
  CHECK_THROWS_AS(max_coauthor_freq(missing, "F"), DataError);
}

TEST_CASE("focal betweenness examples") {
  using E = std::pair<std::size_t, std::size_t>;
  SUBCASE("star") {
    const std::vector<E> e{{0, 1}, {0, 2}};
    CHECK(focal_betweenness(CoauthorshipLocalNet::from_edges(3, 0, e)) == doctest::Approx(1.0));
  }
  SUBCASE("triangle") {
    const std::vector<E> e{{0, 1}, {0, 2}, {1, 2}};
    CHECK(focal_betweenness(CoauthorshipLocalNet::from_edges(3, 0, e)) == 0.0);
  }
  SUBCASE("bridge between two pairs") {
    const std::vector<E> e{{1, 2}, {3, 4}, {0, 1}, {0, 2}, {0, 3}, {0, 4}};
    CHECK(focal_betweenness(CoauthorshipLocalNet::from_edges(5, 0, e)) == doctest::Approx(4.0 / 6.0));
  }
  SUBCASE("tiny nets") {
    CHECK(focal_betweenness(CoauthorshipLocalNet::from_edges(1, 0, {})) == 0.0);
    const std::vector<E> e{{0, 1}};
    CHECK(focal_betweenness(CoauthorshipLocalNet::from_edges(2, 0, e)) == 0.0);
  }
}

TEST_CASE("local net from author lists") {
  const std::vector<AuthorList> lists{{"F", "B"}, {"F", "B", "C"}, {"F"}, {"F", "D"}, {"F", "B"}};
  const auto net = CoauthorshipLocalNet::build(lists, "F");
  CHECK(net.node_count() == 4);
  const auto& t = net.tokens();
  const auto idx = [&](const std::string& s) { return static_cast<std::size_t>(std::find(t.begin(), t.end(), s) - t.begin()); };
  CHECK(net.focal() == idx("F"));
  CHECK(net.weight(idx("F"), idx("B")) == 3);
  CHECK(net.weight(idx("B"), idx("C")) == 1);
  CHECK(net.weight(idx("C"), idx("D")) == 0);
}

TEST_CASE("betweenness against path enumeration") {
  Rng rng(101);
  for (int g = 0; g < 100; ++g) {
    const std::size_t n = 1 + rng.uniform_index(8);
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (rng.bernoulli(0.4)) edges.emplace_back(i, j);
      }
    }
    const std::size_t focal = rng.uniform_index(n);
    const double got = focal_betweenness(CoauthorshipLocalNet::from_edges(n, focal, edges));
    CHECK(std::abs(got - oracle::betweenness(n, focal, edges)) <= 1e-9);
  }
}

TEST_CASE("topics") {
  CHECK(topic_diversity(std::vector<int>{4, 4, 4, 4, 4}) == 1);
  CHECK(topic_diversity(std::vector<int>{1, 2, 3, 4, 5}) == 5);
  CHECK(topic_diversity(std::vector<int>{1, 1, 2, 3, 3}) == 3);
  std::vector<int> t{1, 1, 2, 3, 3};
  std::sort(t.begin(), t.end());
  do {
    CHECK(topic_diversity(t) == 3);
  } while (std::next_permutation(t.begin(), t.end()));

  // a=1, b=2, c=3
  CHECK(dominant_topic(std::vector<int>{1, 1, 2, 2, 3}) == 1);
  CHECK(dominant_topic(std::vector<int>{2, 1, 1, 2, 3}) == 2);
  CHECK(is_new_topic(std::vector<int>{1, 1, 2, 2, 3}, {2, 3}));
  CHECK_FALSE(is_new_topic(std::vector<int>{1, 1, 1, 2, 3}, {1}));
  CHECK(is_new_topic(std::vector<int>{1, 1, 1, 2, 3}, {}));
}

TEST_CASE("streak types") {
  const std::vector<AuthorList> dense_small{{"F", "B"}, {"F", "B"}, {"F", "B"}, {"F", "B"}, {"F", "C"}};
  CHECK(classify_streak_type(dense_small, "F") == StreakTypeLabel{TieKind::Dense, TeamKind::Small});
  auto loose_large = lists_of_sizes({2, 3, 50, 2, 2});
  CHECK(classify_streak_type(loose_large, "F") == StreakTypeLabel{TieKind::Loose, TeamKind::Large});
  std::vector<AuthorList> dense_large{{"F", "B"}, {"F", "B"}, {"F", "B"}, {"F"}, {"F"}};
  for (int i = 0; i < 8; ++i) dense_large[3].push_back("m" + std::to_string(i));
  dense_large[3].push_back("B2");
  REQUIRE(dense_large[3].size() == 10);
  CHECK(classify_streak_type(dense_large, "F") == StreakTypeLabel{TieKind::Dense, TeamKind::Large});
  CHECK(classify_streak_type(dense_large, "F").name() == "dense_large");
  CHECK(StreakTypeLabel{TieKind::Loose, TeamKind::Small}.name() == "loose_small");
}

TEST_CASE("disruption index") {
  SUBCASE("balanced") {
    const std::map<std::string, std::set<std::string>> citing{{"A", {"F"}}, {"B", {"F", "R"}}, {"C", {"R"}}};
    CHECK(*disruption_index("F", {"R"}, citing) == doctest::Approx(0.0));
    const auto c = disruption_counts("F", {"R"}, citing);
    CHECK(c.n_i == 1);
    CHECK(c.n_j == 1);
    CHECK(c.n_k == 1);
  }
  CHECK(*disruption_index("F", {"R"}, {{"A", {"F"}}}) == 1.0);
  CHECK(*disruption_index("F", {"R"}, {{"A", {"F", "R"}}}) == -1.0);
  CHECK_FALSE(disruption_index("F", {"R"}, {}).has_value());
  CHECK_FALSE(disruption_index(DisruptionCounts{}).has_value());
  CHECK(*disruption_index(DisruptionCounts{3, 1, 2}) == doctest::Approx(-*disruption_index(DisruptionCounts{1, 3, 2})));
}

TEST_CASE("disruption index against motif enumeration") {
  Rng rng(55);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 2 + rng.uniform_index(7);
    std::vector<std::vector<bool>> cites(n, std::vector<bool>(n, false));
    for (std::size_t u = 0; u < n; ++u) {
      for (std::size_t v = 0; v < n; ++v) {
        if (u != v) cites[u][v] = rng.bernoulli(0.35);
      }
    }
    std::set<std::string> refs;
    for (std::size_t r = 1; r < n; ++r) {
      if (cites[0][r]) refs.insert("n" + std::to_string(r));
    }
    std::map<std::string, std::set<std::string>> citing;
    for (std::size_t u = 1; u < n; ++u) {
      std::set<std::string> cited;
      if (cites[u][0]) cited.insert("n0");
      for (std::size_t r = 1; r < n; ++r) {
        if (r != u && cites[0][r] && cites[u][r]) cited.insert("n" + std::to_string(r));
      }
      if (!cited.empty()) citing["n" + std::to_string(u)] = cited;
    }
    const auto got = disruption_index("n0", refs, citing);
    const auto want = oracle::disruption(cites);
    REQUIRE(got.has_value() == want.has_value());
    if (got) {
      CHECK(std::abs(*got - *want) <= 1e-9);
      CHECK(*got >= -1.0);
      CHECK(*got <= 1.0);
    }
  }
}

TEST_CASE("ranks and quintiles") {
  using K = RankGroupKey;
  const std::vector<double> v{1, 2, 3, 7, 5, 5, 5, 5};
  const std::vector<K> k{{0, 0, 0}, {0, 0, 0}, {0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {2, 0, 0}, {2, 0, 0}, {2, 0, 0}};
  const auto r = rank_within_groups(v, k);
  CHECK(r[0] == 0.0);
  CHECK(r[1] == 0.5);
  CHECK(r[2] == 1.0);
  CHECK(r[3] == 0.5);
  for (std::size_t i = 4; i < 8; ++i) CHECK(r[i] == 0.5);

  const std::vector<double> q{10, 20, 30, 40, 50, 60, 70, 80, 90, 100};
  CHECK(quintiles(q) == std::vector<int>{0, 0, 1, 1, 2, 2, 3, 3, 4, 4});
  CHECK(quintiles(std::vector<double>{1, 1, 1}) == std::vector<int>{0, 0, 0});
}

TEST_CASE("window metrics bundle") {
  const std::vector<AuthorList> lists{{"F", "B"}, {"F", "B"}, {"F", "B"}, {"F", "C"}, {"F"}};
  const std::vector<int> topics{1, 1, 2, 2, 3};
  const auto m = window_metrics(lists, "F", topics, {2});
  CHECK(m.mean_team_size == doctest::Approx(9.0 / 5.0));
  CHECK(m.max_freq == 3);
  CHECK(m.dense);
  CHECK_FALSE(m.big_project);
  CHECK(m.all_small_teams);
  CHECK(m.diversity == 3);
  CHECK(m.new_topic);
  CHECK(m.betweenness == doctest::Approx(1.0));
  CHECK(m.type.name() == "dense_small");
}
