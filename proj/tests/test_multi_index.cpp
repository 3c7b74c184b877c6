#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "dyngal/multi_index.hpp"

using namespace dyngal;

TEST_CASE("multi_index ordering and text form") {
  REQUIRE(multi_index(3, -2).to_string() == "(3,-2)");
  REQUIRE(multi_index(-5).to_string() == "(-5)");
  REQUIRE(multi_index::parse("(3,-2)") == multi_index(3, -2));
  REQUIRE(multi_index::parse("(-5)") == multi_index(-5));
  REQUIRE(multi_index(1) < multi_index(2));
  REQUIRE(multi_index(1, 5) < multi_index(2, -9));
  REQUIRE(multi_index(1, -1) < multi_index(1, 0));
  REQUIRE_THROWS_AS(multi_index::parse("3,-2"), std::invalid_argument);
}

TEST_CASE("index_set canonical order is insertion independent") {
  index_set a{multi_index(4), multi_index(-1), multi_index(4),
              multi_index(0)};
  REQUIRE(a.size() == 3);
  index_set b{multi_index(0), multi_index(4), multi_index(-1)};
  REQUIRE(a == b);
  REQUIRE(a.contains(multi_index(-1)));
  REQUIRE(!a.contains(multi_index(1)));

  index_set u = set_union(a, index_set{multi_index(1)});
  REQUIRE(u.size() == 4);
  REQUIRE(set_difference(u, a) == index_set{multi_index(1)});
  REQUIRE(a.is_subset_of(u));
}

TEST_CASE("ball in one dimension") {
  const window w(basis_kind::fourier, 1, 256);
  SECTION("zero radius") {
    ball_result b = ball(multi_index(5), 0, w);
    REQUIRE(b.set == index_set{multi_index(5)});
    REQUIRE(!b.saturated);
  }
  SECTION("interval of integers") {
    ball_result b = ball(multi_index(5), 2, w);
    REQUIRE(b.set == index_set{multi_index(3), multi_index(4), multi_index(5),
                               multi_index(6), multi_index(7)});
    REQUIRE(!b.saturated);
  }
  SECTION("saturation at the window edge") {
    ball_result b = ball(multi_index(255), 2, w);
    REQUIRE(b.saturated);
    REQUIRE(b.set.size() == 4);  // 253..256
  }
}

TEST_CASE("ball in two dimensions counts lattice points") {
  const window w(basis_kind::fourier, 2, 64);
  ball_result b = ball(multi_index(0, 0), 2, w);
  // enumeration oracle: all k with k1^2 + k2^2 <= 4
  index_set expected;
  for (int a = -2; a <= 2; ++a)
    for (int c = -2; c <= 2; ++c)
      if (a * a + c * c <= 4) expected.insert(multi_index(a, c));
  REQUIRE(b.set == expected);
  REQUIRE(b.set.size() == 13);
  REQUIRE(ball_lattice_count(2, 2) == 13);
}

TEST_CASE("legendre window clips the admissible range silently") {
  const window w(basis_kind::legendre_bs, 1, 64);
  ball_result b = ball(multi_index(2), 3, w);
  REQUIRE(b.set ==
          index_set{multi_index(2), multi_index(3), multi_index(4),
                    multi_index(5)});
  REQUIRE(!b.saturated);  // k < 2 is not part of the index universe
}

TEST_CASE("union_of_balls") {
  const window w(basis_kind::fourier, 1, 256);
  SECTION("empty seeds") {
    REQUIRE(union_of_balls(index_set{}, 3, w).set.empty());
  }
  SECTION("disjoint seeds") {
    ball_result b =
        union_of_balls(index_set{multi_index(0), multi_index(10)}, 1, w);
    REQUIRE(b.set == index_set{multi_index(-1), multi_index(0), multi_index(1),
                               multi_index(9), multi_index(10),
                               multi_index(11)});
    REQUIRE(std::int64_t(b.set.size()) <=
            ball_lattice_count(1, 1) * 2);
  }
  SECTION("overlapping seeds deduplicate") {
    ball_result b =
        union_of_balls(index_set{multi_index(0), multi_index(1)}, 1, w);
    REQUIRE(b.set == index_set{multi_index(-1), multi_index(0), multi_index(1),
                               multi_index(2)});
  }
}

TEST_CASE("union_of_balls properties", "[property]") {
  const window w(basis_kind::fourier, 1, 256);
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> pick(-100, 100);
  for (int trial = 0; trial < 50; ++trial) {
    index_set seeds;
    const int n = 1 + int(rng() % 6);
    for (int i = 0; i < n; ++i) seeds.insert(multi_index(pick(rng)));

    std::size_t prev = 0;
    for (int j = 0; j <= 4; ++j) {
      ball_result b = union_of_balls(seeds, j, w);
      // contains the seeds, equals them at j = 0
      REQUIRE(seeds.is_subset_of(b.set));
      if (j == 0) REQUIRE(b.set == seeds);
      // monotone in j, bounded by |ball| * |seeds|
      REQUIRE(b.set.size() >= prev);
      REQUIRE(std::int64_t(b.set.size()) <=
              ball_lattice_count(1, j) * std::int64_t(seeds.size()));
      prev = b.set.size();
    }
  }
}

TEST_CASE("index_set text round trip") {
  index_set s{multi_index(3), multi_index(-7), multi_index(0)};
  std::vector<multi_index> parsed;
  for (const auto& k : s) parsed.push_back(multi_index::parse(k.to_string()));
  REQUIRE(index_set(parsed) == s);
}
