#include <doctest.h>

#include <deque>
#include <set>

#include "ilgov/config_space.hpp"
#include "ilgov/errors.hpp"

using namespace ilgov;

TEST_CASE("default space enumerates 640 configurations in index order") {
  const ConfigSpace space;
  const auto all = space.enumerate();
  CHECK(all.size() == 640);
  CHECK(space.size() == 640);
  for (std::size_t i = 0; i < all.size(); ++i) CHECK(space.index_of(all[i]) == i);
  CHECK(std::set<Configuration>(all.begin(), all.end()).size() == 640);
  CHECK(all.front() == Configuration{1, 1, 600, 600});
  CHECK(all.back() == Configuration{4, 4, 2000, 1400});
  // Row-major: f_little varies fastest.
  CHECK(all[1] == Configuration{1, 1, 600, 800});
  CHECK(all[5] == Configuration{1, 1, 800, 600});
}

TEST_CASE("big-cluster frequencies cover 600..2000 in 200 MHz steps") {
  const ConfigSpace space;
  std::set<int> fb;
  for (const auto& c : space.enumerate()) fb.insert(c.f_big);
  CHECK(fb == std::set<int>{600, 800, 1000, 1200, 1400, 1600, 1800, 2000});
  CHECK(space.level_count(Knob::f_little) == 5);
}

TEST_CASE("single-level space has one configuration and no neighbors") {
  const ConfigSpace space(ConfigSpace::Levels{{{1}, {1}, {600}, {600}}});
  CHECK(space.enumerate().size() == 1);
  CHECK(space.neighbors(std::size_t{0}).empty());
}

TEST_CASE("malformed level lists are rejected") {
  CHECK_THROWS_AS(ConfigSpace(ConfigSpace::Levels{{{}, {1}, {600}, {600}}}), DomainError);
  CHECK_THROWS_AS(ConfigSpace(ConfigSpace::Levels{{{2, 1}, {1}, {600}, {600}}}), DomainError);
  CHECK_THROWS_AS(ConfigSpace(ConfigSpace::Levels{{{0, 1}, {1}, {600}, {600}}}), DomainError);
}

TEST_CASE("index mapping is a bijection") {
  const ConfigSpace space;
  for (std::size_t i = 0; i < space.size(); ++i) {
    const Configuration c = space.at(i);
    CHECK(space.index_of(c) == i);
    CHECK(space.from_level_indices(space.level_indices(c)) == c);
  }
  CHECK_THROWS_AS(space.at(640), DomainError);
}

TEST_CASE("neighbor counts at interior and corner points") {
  const ConfigSpace space;
  CHECK(space.neighbors(Configuration{2, 2, 1200, 1000}).size() == 8);
  CHECK(space.neighbors(Configuration{1, 1, 600, 600}).size() == 4);
  CHECK(space.neighbors(Configuration{4, 4, 2000, 1400}).size() == 4);
  const auto n = space.neighbors(Configuration{1, 1, 600, 600});
  CHECK(std::find(n.begin(), n.end(), Configuration{2, 1, 600, 600}) != n.end());
  CHECK(std::find(n.begin(), n.end(), Configuration{1, 1, 600, 800}) != n.end());
}

TEST_CASE("neighbors of an invalid configuration raise a domain error") {
  const ConfigSpace space;
  CHECK_THROWS_AS(space.neighbors(Configuration{5, 1, 600, 600}), DomainError);
  CHECK_THROWS_AS(space.neighbors(Configuration{1, 1, 700, 600}), DomainError);
  CHECK_THROWS_AS(space.neighbors(Configuration{1, 1, 600, 1600}), DomainError);
}

TEST_CASE("every neighbor differs in exactly one knob by one level") {
  const ConfigSpace space;
  for (std::size_t i = 0; i < space.size(); ++i) {
    const auto a = space.level_indices(space.at(i));
    for (std::size_t j : space.neighbors(i)) {
      const auto b = space.level_indices(space.at(j));
      int changed = 0, step = 0;
      for (int k = 0; k < 4; ++k)
        if (a[k] != b[k]) {
          ++changed;
          step = std::abs(a[k] - b[k]);
        }
      CHECK(changed == 1);
      CHECK(step == 1);
      CHECK(j != i);
    }
  }
}

TEST_CASE("neighborhood is symmetric and sized 4..8") {
  const ConfigSpace space;
  for (std::size_t a = 0; a < space.size(); ++a) {
    const auto& na = space.neighbors(a);
    CHECK(na.size() >= 4);
    CHECK(na.size() <= 8);
    for (std::size_t b : na) {
      const auto& nb = space.neighbors(b);
      CHECK(std::find(nb.begin(), nb.end(), a) != nb.end());
    }
  }
}

TEST_CASE("neighbor graph is connected") {
  const ConfigSpace space;
  std::vector<bool> seen(space.size(), false);
  std::deque<std::size_t> q{0};
  seen[0] = true;
  std::size_t reached = 1;
  while (!q.empty()) {
    const std::size_t v = q.front();
    q.pop_front();
    for (std::size_t w : space.neighbors(v))
      if (!seen[w]) {
        seen[w] = true;
        ++reached;
        q.push_back(w);
      }
  }
  CHECK(reached == 640);
}

TEST_CASE("knob level indices") {
  const ConfigSpace space;
  CHECK(space.knob_level_index({1, 1, 600, 600}, Knob::f_big) == 0);
  CHECK(space.knob_level_index({1, 1, 2000, 600}, Knob::f_big) == 7);
  CHECK(space.knob_level_index({3, 1, 600, 600}, Knob::n_big) == 2);
  CHECK(space.knob_level_index({1, 4, 600, 1400}, Knob::f_little) == 4);
}

TEST_CASE("text form round-trips") {
  const Configuration c{4, 4, 2000, 1400};
  CHECK(to_string(c) == "4,4,2000,1400");
  CHECK(parse_configuration("4,4,2000,1400") == c);
  CHECK_THROWS_AS(parse_configuration("4,4,2000"), ParseError);
  CHECK_THROWS_AS(parse_configuration("4,x,2000,1400"), ParseError);
}
