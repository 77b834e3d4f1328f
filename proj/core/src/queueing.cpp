#include "apsim/queueing.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "apsim/parallel.hpp"
#include "apsim/sde.hpp"
#include "apsim/stats.hpp"

namespace apsim {

std::string_view queue_event_name(QueueEventKind k) {
  switch (k) {
    case QueueEventKind::Arrival: return "arrival";
    case QueueEventKind::Departure: return "departure";
    case QueueEventKind::Blocked: return "blocked";
  }
  return "?";
}

void validate(const QueueParams& p) {
  if (!(p.arrival_rate > 0.0) || !(p.service_rate > 0.0))
    throw std::invalid_argument("arrival and service rates must be positive");
  if (p.servers < 1 || p.servers > p.capacity)
    throw std::invalid_argument("need 1 <= servers <= capacity");
  if (p.initial < 0 || p.initial > p.capacity)
    throw std::invalid_argument("initial occupancy outside [0, capacity]");
  if (!(p.t_max > 0.0)) throw std::invalid_argument("horizon must be positive");
}

QueueTrace simulate_queue(const QueueParams& params, Rng& rng) {
  validate(params);
  QueueTrace trace{params, {}};
  int n = params.initial;
  double t = 0.0;
  for (;;) {
    const double departure = params.service_rate * std::min(n, params.servers);
    const double total = params.arrival_rate + departure;
    t += rng.exponential(total);
    if (t > params.t_max) break;
    if (rng.uniform() * total < params.arrival_rate) {
      if (n == params.capacity) {
        trace.events.push_back({t, n, QueueEventKind::Blocked});
      } else {
        trace.events.push_back({t, ++n, QueueEventKind::Arrival});
      }
    } else {
      trace.events.push_back({t, --n, QueueEventKind::Departure});
    }
  }
  return trace;
}

std::vector<double> occupancy_time_fractions(const QueueTrace& trace) {
  const auto& p = trace.params;
  std::vector<double> time_at(static_cast<std::size_t>(p.capacity) + 1, 0.0);
  int n = p.initial;
  double last = 0.0;
  for (const QueueEvent& e : trace.events) {
    time_at[static_cast<std::size_t>(n)] += e.time - last;
    last = e.time;
    n = e.occupancy;
  }
  time_at[static_cast<std::size_t>(n)] += p.t_max - last;
  for (double& v : time_at) v /= p.t_max;
  return time_at;
}

std::vector<double> stationary_distribution(const QueueParams& params) {
  validate(params);
  // Log-space product, normalised with the max subtracted.
  std::vector<double> log_w(static_cast<std::size_t>(params.capacity) + 1, 0.0);
  for (int k = 1; k <= params.capacity; ++k)
    log_w[static_cast<std::size_t>(k)] =
        log_w[static_cast<std::size_t>(k - 1)] +
        std::log(params.arrival_rate / (params.service_rate * std::min(k, params.servers)));
  const double top = *std::max_element(log_w.begin(), log_w.end());
  double sum = 0.0;
  for (double& v : log_w) sum += (v = std::exp(v - top));
  for (double& v : log_w) v /= sum;
  return log_w;
}

namespace {

void check_scaling(double alpha, std::span<const double> grid) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("alpha must be positive");
  if (grid.empty()) throw std::invalid_argument("empty time grid");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] >= 0.0)) throw std::invalid_argument("grid times must be non-negative");
    if (i > 0 && !(grid[i] > grid[i - 1])) throw std::invalid_argument("grid must be strictly increasing");
  }
}

}  // namespace

ScaledPath clt_scaled_arrivals(double alpha, std::span<const double> grid, Rng& rng) {
  check_scaling(alpha, grid);
  ScaledPath out;
  out.alpha = alpha;
  const double scale = std::sqrt(alpha);
  double next = rng.exponential(alpha);
  std::int64_t count = 0;
  for (double t : grid) {
    while (next <= t) {
      ++count;
      next += rng.exponential(alpha);
    }
    out.sample_positions.push_back(out.times.size());
    out.times.push_back(t);
    out.values.push_back((static_cast<double>(count) - alpha * t) / scale);
  }
  return out;
}

ScaledPath reflected_walk_scaled(double alpha, std::span<const double> grid, Rng& rng) {
  check_scaling(alpha, grid);
  const double scale = std::sqrt(alpha);
  const double t_end = grid.back();

  std::vector<double> times{0.0};
  std::vector<double> free{0.0};
  std::vector<std::size_t> positions;
  positions.reserve(grid.size());
  auto level = [&](std::int64_t count, double t) {
    return (static_cast<double>(count) - alpha * t) / scale;
  };

  std::int64_t count = 0;
  std::size_t g = 0;
  auto emit_grid_before = [&](double limit, bool inclusive) {
    for (; g < grid.size() && (grid[g] < limit || (inclusive && grid[g] == limit)); ++g) {
      if (grid[g] == 0.0) {
        positions.push_back(0);
        continue;
      }
      positions.push_back(times.size());
      times.push_back(grid[g]);
      free.push_back(level(count, grid[g]));
    }
  };

  for (double arrival = rng.exponential(alpha); arrival <= t_end; arrival += rng.exponential(alpha)) {
    emit_grid_before(arrival, false);
    times.push_back(arrival);  // left limit
    free.push_back(level(count, arrival));
    ++count;
    times.push_back(arrival);
    free.push_back(level(count, arrival));
  }
  emit_grid_before(t_end, true);

  SkorokhodResult reflected = skorokhod_map(free, 0.0);
  ScaledPath out;
  out.alpha = alpha;
  out.times = std::move(times);
  out.values = std::move(reflected.reflected);
  out.regulator = std::move(reflected.regulator);
  out.sample_positions = std::move(positions);
  return out;
}

LimitReport limit_report(std::span<const double> alphas, double t, std::size_t replicas,
                         std::uint64_t seed, unsigned threads) {
  if (alphas.size() < 2) throw std::invalid_argument("limit report needs at least two alphas");
  if (replicas < 100) throw std::invalid_argument("limit report needs at least 100 replicas");
  if (!(t > 0.0)) throw std::invalid_argument("evaluation time must be positive");
  std::vector<double> sorted(alphas.begin(), alphas.end());
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw std::invalid_argument("duplicate alpha values");
  for (double a : sorted)
    if (!(a > 0.0)) throw std::invalid_argument("alpha must be positive");

  LimitReport report;
  const double grid[] = {t};
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double alpha = sorted[i];
    auto sample = parallel_map(replicas, threads, [&](std::size_t r) {
      Rng rng(seed, (static_cast<std::uint64_t>(i) << 32) | r);
      return reflected_walk_scaled(alpha, grid, rng).sample(0);
    });
    const double ks = ks_statistic(std::move(sample), [t](double x) { return half_normal_cdf(x, t); });
    report.rows.push_back({alpha, t, ks, replicas});
  }
  report.decreasing = true;
  for (std::size_t i = 1; i < report.rows.size(); ++i)
    report.decreasing = report.decreasing && report.rows[i].ks < report.rows[i - 1].ks;
  return report;
}

}  // namespace apsim
