#include "doctest.h"

#include <algorithm>
#include <set>

#include "apsim/lattice.hpp"

using namespace apsim;

TEST_SUITE("lattice") {

TEST_CASE("door placement") {
  SUBCASE("L=60 with a 20 wide door covers columns 21..40") {
    const LatticeGeometry g(60, 20);
    CHECK(g.door_first_col() == 21);
    CHECK(g.door_last_col() == 40);
    CHECK_FALSE(g.odd_side());
  }
  SUBCASE("full-width door") {
    const LatticeGeometry g(5, 5);
    CHECK(g.door_first_col() == 1);
    CHECK(g.door_last_col() == 5);
    for (int c = 1; c <= 5; ++c) CHECK(g.is_door(Site{5, c}));
  }
  SUBCASE("single door site sits in the centre") {
    const LatticeGeometry g(5, 1);
    CHECK(g.door_first_col() == 3);
    CHECK(g.is_door(Site{5, 3}));
    CHECK_FALSE(g.is_door(Site{4, 3}));
  }
  SUBCASE("odd margin puts the extra column on the left") {
    const LatticeGeometry g(5, 2);
    CHECK(g.door_first_col() == 3);
    CHECK(g.door_last_col() == 4);
  }
}

TEST_CASE("door is centred for every side and width") {
  for (int side = 1; side <= 25; ++side) {
    for (int w = 1; w <= side; ++w) {
      const LatticeGeometry g(side, w);
      const int left = g.door_first_col() - 1;
      const int right = side - g.door_last_col();
      CHECK(g.door_last_col() - g.door_first_col() + 1 == w);
      CHECK(left >= right);
      CHECK(left - right <= 1);
      CHECK(LatticeGeometry(side, w) == g);
    }
  }
}

TEST_CASE("invalid geometry is rejected") {
  CHECK_THROWS_AS(LatticeGeometry(0, 1), std::invalid_argument);
  CHECK_THROWS_AS(LatticeGeometry(5, 0), std::invalid_argument);
  CHECK_THROWS_AS(LatticeGeometry(5, 6), std::invalid_argument);
  CHECK_THROWS_AS(LatticeGeometry(60, 20, ParityPolicy::RequireOdd), std::invalid_argument);
  CHECK_NOTHROW(LatticeGeometry(61, 20, ParityPolicy::RequireOdd));
}

TEST_CASE("neighbors") {
  const LatticeGeometry g(5, 1);
  auto as_set = [](std::vector<Site> v) {
    std::set<std::pair<int, int>> s;
    for (auto x : v) s.insert({x.row, x.col});
    return s;
  };
  CHECK(as_set(g.neighbors({1, 1})) == std::set<std::pair<int, int>>{{1, 2}, {2, 1}});
  CHECK(g.neighbors({3, 3}).size() == 4);
  CHECK(g.neighbors({1, 3}).size() == 3);
  CHECK_THROWS_AS(g.neighbors({0, 3}), std::out_of_range);
  CHECK_THROWS_AS(g.neighbors({3, 6}), std::out_of_range);

  // The door is not a neighbor: the top row reflects like any other wall.
  CHECK(g.neighbor(g.index({5, 3}), Direction::Up) == kNoSite);
  CHECK(g.neighbors({5, 3}).size() == 3);
}

TEST_CASE("index and site are inverse") {
  const LatticeGeometry g(7, 3);
  for (SiteIndex i = 0; i < g.site_count(); ++i) CHECK(g.index(g.site(i)) == i);
}

TEST_CASE("random configuration") {
  SUBCASE("1200 + 1200 on a 60 x 60 room") {
    const LatticeGeometry g(60, 20);
    Rng rng(3, 0);
    const auto c = random_configuration(g, 1200, 1200, rng);
    CHECK(counts(c) == Counts{1200, 1200});
    CHECK(c.counts() == Counts{1200, 1200});
    CHECK(c.consistent());
  }
  SUBCASE("empty") {
    const LatticeGeometry g(3, 1);
    Rng rng(3, 0);
    CHECK(counts(random_configuration(g, 0, 0, rng)) == Counts{0, 0});
  }
  SUBCASE("saturated lattice is seed independent") {
    const LatticeGeometry g(3, 1);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      Rng rng(seed, 0);
      const auto c = random_configuration(g, 9, 0, rng);
      for (SiteIndex i = 0; i < 9; ++i) CHECK(c.eta(i) == 1);
    }
  }
  SUBCASE("overfull") {
    const LatticeGeometry g(3, 1);
    Rng rng(3, 0);
    CHECK_THROWS_WITH_AS(random_configuration(g, 5, 5, rng), doctest::Contains("overfull lattice"),
                         std::invalid_argument);
  }
  SUBCASE("deterministic given the seed") {
    const LatticeGeometry g(10, 3);
    Rng a(9, 4), b(9, 4);
    CHECK(random_configuration(g, 20, 30, a) == random_configuration(g, 20, 30, b));
  }
}

TEST_CASE("random configuration is uniform over sites") {
  // One particle on a 3x3 lattice: each site has probability 1/9.
  const LatticeGeometry g(3, 1);
  Rng rng(11, 0);
  std::vector<int> hits(9, 0);
  const int n = 90000;
  for (int k = 0; k < n; ++k) {
    const auto c = random_configuration(g, 1, 0, rng);
    ++hits[static_cast<std::size_t>(c.particle(0).site)];
  }
  const double p = 1.0 / 9.0;
  const double se = std::sqrt(p * (1 - p) / n);
  for (int h : hits) CHECK(std::abs(h / double(n) - p) < 4 * se);
}

TEST_CASE("configuration mutations keep counts consistent") {
  const LatticeGeometry g(6, 2);
  Configuration c(g);
  CHECK(counts(c) == Counts{0, 0});
  const auto a = c.add({1, 1}, Species::Active);
  const auto p = c.add({1, 2}, Species::Passive);
  CHECK(c.counts() == Counts{1, 1});
  CHECK_THROWS_AS(c.add({1, 1}, Species::Passive), std::logic_error);
  CHECK_THROWS_AS(c.move(a, g.index({1, 2})), std::logic_error);
  c.move(a, g.index({2, 1}));
  CHECK(c.particle_at(g.index({2, 1})) == a);
  CHECK(c.empty(g.index({1, 1})));
  c.remove(a);
  CHECK(c.counts() == Counts{0, 1});
  CHECK_FALSE(c.particle(a).present());
  CHECK(c.particle(p).present());
  CHECK_THROWS_AS(c.particle(99), std::out_of_range);
  CHECK(c.consistent());
}

TEST_CASE("property: counts stay consistent under random event sequences") {
  Rng rng(21, 0);
  for (int trial = 0; trial < 50; ++trial) {
    const int side = 2 + static_cast<int>(rng.below(6));
    const LatticeGeometry g(side, 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(side))));
    const auto cap = static_cast<std::int64_t>(side * side);
    const auto na = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(cap / 2 + 1)));
    const auto np = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(cap - na + 1)));
    auto c = random_configuration(g, na, np, rng);
    for (int step = 0; step < 300; ++step) {
      const auto id = static_cast<ParticleId>(rng.below(static_cast<std::uint64_t>(c.registry_size() + 1)));
      if (id == c.registry_size() || !c.particle(id).present()) continue;
      if (rng.uniform() < 0.05) {
        c.remove(id);
      } else {
        const auto to = g.neighbor(c.particle(id).site, kDirections[rng.below(4)]);
        if (to != kNoSite && c.empty(to)) c.move(id, to);
      }
      REQUIRE(c.counts() == c.recount());
    }
    CHECK(c.consistent());
  }
}

TEST_CASE("species naming is a display alias") {
  CHECK(species_name(Species::Active) == "active");
  CHECK(species_name(Species::Passive) == "passive");
  CHECK(species_name(Species::Active, SpeciesNaming::Ions) == "Na+");
  CHECK(species_name(Species::Passive, SpeciesNaming::Ions) == "Cl-");
}

}
