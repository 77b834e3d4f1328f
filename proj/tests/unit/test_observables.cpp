#include "doctest.h"

#include <algorithm>
#include <numeric>

#include "apsim/observables.hpp"

using namespace apsim;

namespace {

// Two actives on the door row of a 3x3 room leaving at the given times.
EventLog hand_log(std::vector<double> exit_times) {
  const LatticeGeometry g(3, 3);
  Configuration c(g);
  for (int k = 0; k < 3; ++k) c.add({3, k + 1}, Species::Active);
  EventLog log{c, {}};
  for (std::size_t k = 0; k < exit_times.size(); ++k)
    log.events.push_back({exit_times[k], static_cast<ParticleId>(k), Species::Active, EventKind::Exit,
                          g.index({3, static_cast<int>(k) + 1}), kNoSite});
  log.final_time = exit_times.empty() ? 10.0 : exit_times.back();
  return log;
}

EventLog simulated(double eps, std::uint64_t seed, bool hops = true) {
  const LatticeGeometry g(10, 3);
  Rng init(seed, 1000);
  const auto c0 = random_configuration(g, 25, 25, init);
  KmcParams p;
  p.drift = eps;
  Rng rng(seed, 0);
  return simulate(c0, p, rng, {.record_hops = hops}).log;
}

}  // namespace

TEST_SUITE("observables") {

TEST_CASE("current") {
  SUBCASE("no exits gives zero current") {
    const std::vector<double> grid{1, 2, 5};
    const auto s = current(hand_log({}), grid);
    CHECK(s.values == std::vector<double>{0, 0, 0});
  }
  SUBCASE("direct count") {
    const std::vector<double> grid{0.5, 1.0, 2.0, 3.0, 4.0};
    const auto s = current(hand_log({1.0, 3.0}), grid);
    CHECK(s.exits == std::vector<std::int64_t>{0, 1, 1, 2, 2});
    CHECK(s.values.back() == 0.5);
    CHECK(s.values[1] == 1.0);
  }
  SUBCASE("bad grids") {
    const auto log = hand_log({1.0});
    CHECK_THROWS_AS(current(log, std::vector<double>{}), std::invalid_argument);
    CHECK_THROWS_AS(current(log, std::vector<double>{0.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(current(log, std::vector<double>{2.0, 1.0}), std::invalid_argument);
  }
  SUBCASE("passive current is zero") {
    const std::vector<double> grid{4.0};
    CHECK(current(hand_log({1.0, 3.0}), grid, Species::Passive).values.front() == 0.0);
  }
}

TEST_CASE("exit profile") {
  SUBCASE("no exits") {
    const auto p = exit_profile(hand_log({}));
    CHECK(p.residence.empty());
    CHECK(p.remaining.size() == 1);
    CHECK(p.remaining_at(100.0) == 3);
    CHECK_FALSE(p.evacuation_time);
  }
  SUBCASE("single exit") {
    const auto p = exit_profile(hand_log({2.5}));
    REQUIRE(p.residence.size() == 1);
    CHECK(p.residence.front().time == 2.5);
    CHECK(p.remaining_at(2.4) == 3);
    CHECK(p.remaining_at(2.5) == 2);
  }
  SUBCASE("full evacuation") {
    const auto p = exit_profile(hand_log({1, 2, 4}));
    CHECK(p.evacuation_time == 4.0);
    const auto cdf = residence_cdf(p, 3);
    CHECK(cdf.back().second == 1.0);
    CHECK(cdf.front() == std::pair<double, double>{1.0, 1.0 / 3});
  }
}

TEST_CASE("aggregate") {
  auto series = [](std::vector<double> values) {
    CurrentSeries s;
    s.times.resize(values.size());
    std::iota(s.times.begin(), s.times.end(), 1.0);
    s.values = std::move(values);
    return s;
  };
  SUBCASE("identical replicas have zero error") {
    const std::vector<CurrentSeries> r{series({0.2, 0.3}), series({0.2, 0.3}), series({0.2, 0.3})};
    const auto a = aggregate(r);
    CHECK(a.mean == std::vector<double>{0.2, 0.3});
    CHECK(a.se == std::vector<double>{0.0, 0.0});
    CHECK(a.n == 3);
  }
  SUBCASE("two-point statistics") {
    const std::vector<CurrentSeries> r{series({0.4}), series({0.6})};
    const auto a = aggregate(r);
    CHECK(a.mean[0] == doctest::Approx(0.5));
    CHECK(a.se[0] == doctest::Approx(0.1));
  }
  SUBCASE("single replica") {
    const std::vector<CurrentSeries> r{series({0.4})};
    CHECK(aggregate(r).se[0] == 0.0);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(aggregate(std::span<const CurrentSeries>{}), std::invalid_argument);
    const std::vector<CurrentSeries> r{series({0.4}), series({0.4, 0.5})};
    CHECK_THROWS_AS(aggregate(r), std::invalid_argument);
  }
  SUBCASE("permutation invariance over seeded replicas") {
    const auto grid = log_spaced_grid(1.0, 200.0, 8);
    std::vector<CurrentSeries> r;
    for (std::uint64_t s = 0; s < 10; ++s) r.push_back(current(simulated(0.2, s, false), grid));
    const auto a = aggregate(r);
    Rng shuffle(99, 0);
    for (int k = 0; k < 5; ++k) {
      std::shuffle(r.begin(), r.end(), shuffle);
      const auto b = aggregate(r);
      CHECK(a.mean == b.mean);
      CHECK(a.se == b.se);
    }
  }
}

TEST_CASE("snapshots and replay") {
  const auto log = simulated(0.3, 5);
  REQUIRE(log.status == Termination::AllActiveExited);
  SUBCASE("t=0 is the initial state") {
    const std::vector<double> t{0.0};
    CHECK(snapshot_series(log, t).front() == log.initial);
  }
  SUBCASE("final time matches the simulator and has no actives left") {
    const LatticeGeometry g(10, 3);
    Rng init(5, 1000);
    const auto c0 = random_configuration(g, 25, 25, init);
    KmcParams p;
    p.drift = 0.3;
    Rng rng(5, 0);
    const auto result = simulate(c0, p, rng);
    const std::vector<double> t{result.log.final_time};
    const auto last = snapshot_series(result.log, t).front();
    CHECK(last == result.final_state);
    CHECK(replay(result.log) == result.final_state);
    CHECK(last.counts().active == 0);
  }
  SUBCASE("nine ordered frames have non-increasing active counts") {
    std::vector<double> t;
    for (int k = 0; k < 9; ++k) t.push_back(log.final_time * k / 8.0);
    const auto frames = snapshot_series(log, t);
    for (std::size_t k = 1; k < frames.size(); ++k) {
      CHECK(frames[k].counts().active <= frames[k - 1].counts().active);
      CHECK(frames[k].counts().passive == 25);
    }
  }
  SUBCASE("dump beyond the log") {
    const std::vector<double> t{log.final_time + 1.0};
    CHECK_THROWS_AS(snapshot_series(log, t), std::out_of_range);
  }
  SUBCASE("exits-only logs cannot be replayed") {
    const std::vector<double> t{0.0};
    CHECK_THROWS_AS(snapshot_series(simulated(0.3, 5, false), t), std::invalid_argument);
  }
}

TEST_CASE("property: current times t equals exits so far") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto log = simulated(0.1 * static_cast<double>(seed), seed, false);
    const auto grid = log_spaced_grid(0.5, log.final_time, 16);
    const auto s = current(log, grid);
    const auto profile = exit_profile(log);
    const std::int64_t n_a = log.initial.counts().active;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      CHECK(s.exits[k] == n_a - profile.remaining_at(grid[k]));
      CHECK(std::round(s.values[k] * grid[k]) == static_cast<double>(s.exits[k]));
      if (k > 0) CHECK(s.exits[k] >= s.exits[k - 1]);
    }
    for (std::size_t k = 1; k < profile.remaining.size(); ++k)
      CHECK(profile.remaining[k].second < profile.remaining[k - 1].second);
    CHECK(profile.residence.size() == static_cast<std::size_t>(n_a));
  }
}

TEST_CASE("log-spaced grid") {
  const auto g = log_spaced_grid(1.0, 1000.0, 32);
  CHECK(g.front() == 1.0);
  CHECK(g.back() == 1000.0);
  CHECK(g.size() == 97);
  CHECK(std::is_sorted(g.begin(), g.end()));
  CHECK(std::adjacent_find(g.begin(), g.end()) == g.end());
  CHECK(log_spaced_grid(2.0, 2.0).size() == 1);
  CHECK_THROWS_AS(log_spaced_grid(0.0, 1.0), std::invalid_argument);
}

}
