#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "apsim/queueing.hpp"
#include "apsim/stats.hpp"
#include "oracles/markov.hpp"

using namespace apsim;

namespace {

double mean_occupancy(std::span<const double> dist) {
  double m = 0.0;
  for (std::size_t n = 0; n < dist.size(); ++n) m += static_cast<double>(n) * dist[n];
  return m;
}

}  // namespace

TEST_SUITE("queueing") {

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(validate(QueueParams{0.0, 1.0, 1, 1, 1.0, 0}), std::invalid_argument);
  CHECK_THROWS_AS(validate(QueueParams{1.0, 1.0, 3, 2, 1.0, 0}), std::invalid_argument);
  CHECK_THROWS_AS(validate(QueueParams{1.0, 1.0, 1, 2, 1.0, 3}), std::invalid_argument);
  CHECK_THROWS_AS(validate(QueueParams{1.0, 1.0, 1, 2, 0.0, 0}), std::invalid_argument);
}

TEST_CASE("starved queue has no events") {
  Rng rng(1, 0);
  CHECK(simulate_queue(QueueParams{1e-9, 1.0, 1, 3, 1.0, 0}, rng).events.empty());
}

TEST_CASE("property: traces are valid birth-death paths") {
  Rng pick(71, 0);
  for (int trial = 0; trial < 30; ++trial) {
    const int capacity = 1 + static_cast<int>(pick.below(8));
    const int servers = 1 + static_cast<int>(pick.below(static_cast<std::uint64_t>(capacity)));
    const QueueParams p{0.2 + 3 * pick.uniform(), 0.2 + 3 * pick.uniform(), servers, capacity, 200.0,
                        static_cast<int>(pick.below(static_cast<std::uint64_t>(capacity + 1)))};
    Rng rng(71, static_cast<std::uint64_t>(trial) + 1);
    const auto trace = simulate_queue(p, rng);
    int n = p.initial;
    double last = 0.0;
    for (const auto& e : trace.events) {
      REQUIRE(e.time > last);
      REQUIRE(e.time <= p.t_max);
      last = e.time;
      switch (e.kind) {
        case QueueEventKind::Arrival: REQUIRE(e.occupancy == n + 1); break;
        case QueueEventKind::Departure:
          REQUIRE(n > 0);
          REQUIRE(e.occupancy == n - 1);
          break;
        case QueueEventKind::Blocked:
          REQUIRE(n == capacity);
          REQUIRE(e.occupancy == n);
          break;
      }
      n = e.occupancy;
      REQUIRE(n >= 0);
      REQUIRE(n <= capacity);
    }
    const auto f = occupancy_time_fractions(trace);
    CHECK(std::accumulate(f.begin(), f.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("M/M/1/1 busy fraction is lambda / (lambda + mu)") {
  const QueueParams p{0.7, 1.3, 1, 1, 2000.0, 0};
  std::vector<double> busy;
  for (std::uint64_t r = 0; r < 40; ++r) {
    Rng rng(73, r);
    busy.push_back(occupancy_time_fractions(simulate_queue(p, rng))[1]);
  }
  const double mean = std::accumulate(busy.begin(), busy.end(), 0.0) / 40.0;
  double ss = 0.0;
  for (double b : busy) ss += (b - mean) * (b - mean);
  const double se = std::sqrt(ss / 39.0 / 40.0);
  CHECK(std::abs(mean - 0.7 / 2.0) < 3 * se);
}

TEST_CASE("stationary distribution") {
  SUBCASE("symmetric two-state chain") {
    const auto pi = stationary_distribution(QueueParams{2.0, 2.0, 1, 1, 1.0, 0});
    CHECK(pi[0] == doctest::Approx(0.5));
    CHECK(pi[1] == doctest::Approx(0.5));
  }
  SUBCASE("Erlang loss shape when servers == capacity") {
    const double a = 2.5;
    const auto pi = stationary_distribution(QueueParams{a, 1.0, 6, 6, 1.0, 0});
    std::vector<double> w(7);
    double fact = 1.0;
    for (int n = 0; n <= 6; ++n) {
      if (n > 0) fact *= n;
      w[static_cast<std::size_t>(n)] = std::pow(a, n) / fact;
    }
    const double z = std::accumulate(w.begin(), w.end(), 0.0);
    for (std::size_t n = 0; n < w.size(); ++n) CHECK(pi[n] == doctest::Approx(w[n] / z).epsilon(1e-12));
  }
  SUBCASE("matches the linear-solve oracle") {
    Rng pick(79, 0);
    for (int trial = 0; trial < 20; ++trial) {
      const int capacity = 1 + static_cast<int>(pick.below(50));
      const int servers = 1 + static_cast<int>(pick.below(static_cast<std::uint64_t>(capacity)));
      const QueueParams p{0.1 + 4 * pick.uniform(), 0.1 + 4 * pick.uniform(), servers, capacity, 1.0, 0};
      const auto pi = stationary_distribution(p);
      const auto oracle = oracle::stationary_by_linear_solve(
          oracle::birth_death_generator(p.arrival_rate, p.service_rate, servers, capacity));
      CHECK(std::accumulate(pi.begin(), pi.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
      for (std::size_t n = 0; n < pi.size(); ++n) REQUIRE(std::abs(pi[n] - oracle(static_cast<Eigen::Index>(n))) < 1e-10);
    }
  }
}

TEST_CASE("time-average occupancy converges to the stationary mean") {
  const QueueParams base{1.0, 1.0, 2, 5, 1.0, 0};
  const double target = mean_occupancy(stationary_distribution(base));
  for (double t_max : {1e3, 1e4, 1e5}) {
    QueueParams p = base;
    p.t_max = t_max;
    std::vector<double> means;
    for (std::uint64_t r = 0; r < 10; ++r) {
      Rng rng(83, r);
      means.push_back(mean_occupancy(occupancy_time_fractions(simulate_queue(p, rng))));
    }
    const double m = std::accumulate(means.begin(), means.end(), 0.0) / 10.0;
    double ss = 0.0;
    for (double v : means) ss += (v - m) * (v - m);
    const double se = std::sqrt(ss / 9.0 / 10.0);
    CHECK(std::abs(m - target) < 3 * se);
  }
}

TEST_CASE("clt-scaled arrivals have mean 0 and variance t") {
  const std::vector<double> grid{0.5, 1.0, 2.0};
  for (double alpha : {5.0, 200.0}) {
    const int n = 10000;
    std::vector<double> sum(3, 0.0), sum2(3, 0.0), sum4(3, 0.0);
    for (int r = 0; r < n; ++r) {
      Rng rng(89, static_cast<std::uint64_t>(r));
      const auto path = clt_scaled_arrivals(alpha, grid, rng);
      for (std::size_t k = 0; k < 3; ++k) {
        const double v = path.sample(k);
        sum[k] += v;
        sum2[k] += v * v;
        sum4[k] += v * v * v * v;
      }
    }
    for (std::size_t k = 0; k < 3; ++k) {
      const double mean = sum[k] / n;
      const double second = sum2[k] / n;
      const double var = second - mean * mean;
      CHECK(std::abs(mean) < 3 * std::sqrt(var / n));
      const double se_second = std::sqrt((sum4[k] / n - second * second) / n);
      CHECK(std::abs(second - grid[k]) < 3 * se_second);
    }
  }
}

TEST_CASE("clt-scaled arrivals approach the normal law") {
  const std::vector<double> grid{1.0};
  auto ks_at = [&](double alpha) {
    std::vector<double> sample;
    for (int r = 0; r < 10000; ++r) {
      Rng rng(97, static_cast<std::uint64_t>(r));
      sample.push_back(clt_scaled_arrivals(alpha, grid, rng).sample(0));
    }
    return oracle::ks_distance(sample, [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); });
  };
  const double ks10 = ks_at(10.0), ks1000 = ks_at(1000.0);
  MESSAGE("KS to N(0,1): alpha=10 " << ks10 << ", alpha=1000 " << ks1000);
  CHECK(ks1000 < 0.02);
  CHECK(ks1000 < ks10);
}

TEST_CASE("reflected scaled walk") {
  SUBCASE("skorokhod conditions hold exactly on every path") {
    const std::vector<double> grid{0.0, 0.25, 0.5, 1.0};
    for (std::uint64_t r = 0; r < 300; ++r) {
      Rng rng(101, r);
      const auto path = reflected_walk_scaled(30.0, grid, rng);
      REQUIRE(path.regulator.front() == 0.0);
      double complementarity = 0.0;
      for (std::size_t k = 0; k < path.values.size(); ++k) {
        REQUIRE(path.values[k] >= 0.0);
        if (k > 0) {
          REQUIRE(path.regulator[k] >= path.regulator[k - 1]);
          REQUIRE(path.times[k] >= path.times[k - 1]);
          complementarity += path.values[k] * (path.regulator[k] - path.regulator[k - 1]);
        }
      }
      REQUIRE(complementarity == 0.0);
      REQUIRE(path.sample_positions.size() == grid.size());
      CHECK(path.sample(0) == 0.0);
    }
  }
  SUBCASE("reflected value is the free value plus the regulator") {
    const std::vector<double> grid{0.1, 0.5, 1.0};
    for (std::uint64_t r = 0; r < 50; ++r) {
      Rng a(103, r), b(103, r);
      const auto refl = reflected_walk_scaled(200.0, grid, a);
      const auto free = clt_scaled_arrivals(200.0, grid, b);
      for (std::size_t k = 0; k < grid.size(); ++k) {
        const double phi = refl.regulator[refl.sample_positions[k]];
        CHECK(refl.sample(k) == doctest::Approx(free.sample(k) + phi).epsilon(1e-12));
      }
    }
  }
  SUBCASE("errors") {
    Rng rng(1, 0);
    const std::vector<double> grid{1.0};
    CHECK_THROWS_AS(reflected_walk_scaled(0.0, grid, rng), std::invalid_argument);
    CHECK_THROWS_AS(reflected_walk_scaled(1.0, std::vector<double>{}, rng), std::invalid_argument);
    CHECK_THROWS_AS(reflected_walk_scaled(1.0, std::vector<double>{1.0, 0.5}, rng), std::invalid_argument);
  }
}

TEST_CASE("limit report") {
  const std::vector<double> alphas{100.0, 10.0};
  const auto report = limit_report(alphas, 1.0, 2000, 7, 1);
  REQUIRE(report.rows.size() == 2);
  CHECK(report.rows[0].alpha == 10.0);
  CHECK(report.rows[1].alpha == 100.0);
  CHECK(report.rows[0].replicas == 2000);

  SUBCASE("stream isolation: the first rows do not depend on later alphas") {
    const std::vector<double> more{10.0, 100.0, 1000.0};
    const auto wider = limit_report(more, 1.0, 2000, 7, 1);
    CHECK(wider.rows[0].ks == report.rows[0].ks);
    CHECK(wider.rows[1].ks == report.rows[1].ks);
  }
  SUBCASE("thread count does not change the result") {
    const auto threaded = limit_report(alphas, 1.0, 2000, 7, 4);
    CHECK(threaded.rows[0].ks == report.rows[0].ks);
    CHECK(threaded.rows[1].ks == report.rows[1].ks);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(limit_report(std::vector<double>{10.0}, 1.0, 200, 1), std::invalid_argument);
    CHECK_THROWS_AS(limit_report(std::vector<double>{10.0, 10.0}, 1.0, 200, 1), std::invalid_argument);
    CHECK_THROWS_AS(limit_report(std::vector<double>{10.0, 20.0}, 1.0, 99, 1), std::invalid_argument);
    CHECK_THROWS_AS(limit_report(std::vector<double>{10.0, -1.0}, 1.0, 200, 1), std::invalid_argument);
  }
}

}
